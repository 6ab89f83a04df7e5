#pragma once

// Encoding of a metric system by array-names: movable-radius ball covers,
// partition labels, tent-function boundary-mass estimates and the staged
// clopen selector of a boundary-avoiding radius parameter.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zdm/shift_spaces.hpp"

namespace zdm {

/// A point of the system. Circle points are fractions angle / 2^64, so the
/// rotation is exact integer addition. Symbolic points are a position inside
/// a shared finite word; the shift moves the position.
struct Point {
    std::uint64_t angle = 0;
    std::shared_ptr<const Word> word;
    std::int64_t position = 0;

    double circle_value() const;
    bool operator==(const Point& other) const;
};

Point circle_point(double value);
std::uint64_t to_fixed(long double value);  // value mod 1 as a 64-bit fraction

/// Rotation numbers accepted by name; anything else must be a decimal.
std::optional<long double> named_rotation(const std::string& name);

class MetricSystem {
public:
    enum class Kind { CircleRotation, Symbolic };

    static MetricSystem circle_rotation(long double alpha, std::string alpha_text = "");
    /// Points are positions in `host_word`; distances look at most
    /// `resolution` letters away from the position.
    static MetricSystem symbolic(Subshift s, std::size_t resolution = 24);
    static MetricSystem from_json(const nlohmann::json& spec);
    static MetricSystem load(const std::string& path);

    Kind kind() const noexcept { return kind_; }
    std::uint64_t alpha() const noexcept { return alpha_; }
    const std::string& alpha_text() const noexcept { return alpha_text_; }
    const Subshift& subshift() const;
    std::size_t resolution() const noexcept { return resolution_; }

    Point apply(const Point& x, std::int64_t steps = 1) const;
    double distance(const Point& a, const Point& b) const;

    /// A symbolic point at the centre of a long admissible word.
    Point symbolic_point(const Word& word, std::int64_t position) const;

    nlohmann::json to_json() const;

private:
    Kind kind_ = Kind::CircleRotation;
    std::uint64_t alpha_ = 0;
    std::string alpha_text_;
    std::optional<Subshift> subshift_;
    std::size_t resolution_ = 0;
};

struct CoverFamily {
    std::size_t level = 1;
    std::vector<Point> centers;
    double covering_radius = 0.0;
    double r0 = 0.0;
    double r1 = 0.0;
    std::size_t grid_points = 0;  // size of the covering certificate grid

    std::size_t size() const { return centers.size(); }
    double radius(double t) const { return r0 + t * (r1 - r0); }
    /// Parameter whose radius equals r (may fall outside [0, 1]).
    double parameter_of(double r) const { return (r - r0) / (r1 - r0); }
};

CoverFamily build_cover_family(const MetricSystem& sys, std::size_t level, std::size_t m,
                               double slack);

/// m_k for level k: 2^(k+1) arcs on the circle, the number of central words
/// of length 2k-1 for symbolic systems.
std::size_t schedule_size(const MetricSystem& sys, std::size_t level);

std::vector<CoverFamily> build_schedule(const MetricSystem& sys, std::size_t levels,
                                        double slack = 0.2);

using PartitionLabel = std::vector<std::uint8_t>;

PartitionLabel label(const MetricSystem& sys, const CoverFamily& fam, double t, const Point& x);
std::string render_label(const PartitionLabel& eta);

struct Atom {
    Point point;
    double weight = 0.0;
};

/// A measure of the index set: Haar (Lebesgue on the circle, integrated by
/// orbit averaging with a grid cross-check) or finitely many atoms.
struct Measure {
    enum class Kind { Haar, Atomic };
    Kind kind = Kind::Haar;
    std::string name;
    std::string address;  // Cantor address of the index (binary digits)
    std::vector<Atom> atoms;
};

Measure haar_measure(std::string name = "haar", std::string address = "");
/// Equal-weight atoms on the spheres of radius r_t about `center` for each t.
Measure sphere_measure(const CoverFamily& fam, std::size_t center, const std::vector<double>& ts,
                       std::string name, std::string address);

/// Measure list of a selector config. Kinds: "haar"; "sphere" with level
/// (1-based), center and ts; "atomic" with atoms [{x, weight}] on the circle.
std::vector<Measure> measures_from_json(const nlohmann::json& list, const MetricSystem& sys,
                                        const std::vector<CoverFamily>& schedule);

struct QuadratureConfig {
    enum class Scheme { Orbit, Grid };
    double d = 0.01;
    Scheme scheme = Scheme::Orbit;
    std::size_t samples = 20000;
    std::size_t budget = 10'000'000;
    std::uint64_t seed = 1;
};

struct PsiEstimate {
    double value = 0.0;
    double tolerance = 0.0;  // |value - integral| <= tolerance
    std::size_t samples = 0;
    std::optional<double> cross_check;  // grid value for orbit estimates
};

/// Integral of g_{t,d} = max_i h_{t,d}(dist(., x_i)) against the measure.
PsiEstimate psi_estimate(const MetricSystem& sys, const CoverFamily& fam, const Measure& mu,
                         double t, const QuadratureConfig& cfg);

/// Upper bound for psi over every t in [t_lo, t_hi]: the tents are widened to
/// plateaus over [r_{t_lo}, r_{t_hi}].
PsiEstimate psi_piece_bound(const MetricSystem& sys, const CoverFamily& fam, const Measure& mu,
                            double t_lo, double t_hi, const QuadratureConfig& cfg);

/// Exact star discrepancy of points in [0, 1).
double star_discrepancy(std::vector<double> points);

/// Parameters t in [0, 1] at which an atomic measure charges some sphere of
/// some level: t = (dist - r0) / (r1 - r0).
std::vector<double> bad_parameters(const MetricSystem& sys, const CoverFamily& fam,
                                   const Measure& mu);

/// Cylinder of the middle-thirds Cantor set: binary digits b_i give the
/// ternary digits 2 b_i.
struct CantorCylinder {
    std::string bits;

    double left() const;
    double diameter() const;
    bool contains(const CantorCylinder& other) const;
};

struct SelectorPiece {
    std::vector<std::size_t> members;  // indices into the measure list
    std::string index_prefix;          // shared address prefix of the members
    CantorCylinder cylinder;
    std::size_t parent = 0;
    double bound = 0.0;                // worst psi bound over members and levels
    double tolerance = 0.0;
};

struct SelectorStage {
    std::size_t n = 1;
    std::size_t depth = 0;  // index and Cantor cylinder depth at this stage
    std::vector<SelectorPiece> pieces;
};

struct SelectorTable {
    std::vector<SelectorStage> stages;
    std::vector<CantorCylinder> limit;  // s(mu) as the final cylinder, per measure
    std::vector<double> limit_value;    // left endpoint of that cylinder

    nlohmann::json to_json(const std::vector<Measure>& measures) const;
};

/// Stage depth: least m with 3^-m <= 2^(1-n).
std::size_t stage_depth(std::size_t n);

SelectorTable selector_build(const MetricSystem& sys, const std::vector<CoverFamily>& schedule,
                             const std::vector<Measure>& measures, std::size_t n_max,
                             const QuadratureConfig& cfg, std::size_t extra_depth = 8);

struct SelectorCheck {
    bool base = false;
    bool nesting = false;
    bool diameters = false;
    bool smallness = false;
    std::string witness;

    bool passed() const { return base && nesting && diameters && smallness; }
};

/// Re-derives the four invariants from the table alone plus fresh bounds.
SelectorCheck check_selector(const SelectorTable& table, const MetricSystem& sys,
                             const std::vector<CoverFamily>& schedule,
                             const std::vector<Measure>& measures, const QuadratureConfig& cfg);

struct ArrayName {
    std::size_t depth = 0;
    std::int64_t halfwidth = 0;
    std::vector<std::vector<PartitionLabel>> cells;  // [row][j + halfwidth]

    const PartitionLabel& at(std::size_t row, std::int64_t j) const {
        return cells[row][static_cast<std::size_t>(j + halfwidth)];
    }
    nlohmann::json to_json() const;
};

ArrayName array_name(const MetricSystem& sys, const std::vector<CoverFamily>& schedule, double t,
                     const Point& x, std::size_t depth, std::int64_t halfwidth);

struct Recoverability {
    bool separated = false;
    std::size_t k = 0;
    std::int64_t n = 0;
};

/// Scans k = 1..depth and, for each, n = 0..halfwidth; reports the first
/// (k, n) at which all sample points get distinct names.
Recoverability recoverability_check(const MetricSystem& sys,
                                    const std::vector<CoverFamily>& schedule, double t,
                                    const std::vector<Point>& points, std::size_t depth,
                                    std::int64_t halfwidth);

}  // namespace zdm
