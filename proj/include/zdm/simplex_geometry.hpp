#pragma once

// Finite-dimensional simplices: barycentric calculus, faces, nearest-point
// retractions onto faces, disjoint decomposition of set families and the
// staged gluing of vertex maps with a Cauchy certificate.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "zdm/error.hpp"

namespace zdm {

using Vector = Eigen::VectorXd;

inline constexpr double kAffineTolerance = 1e-9;
inline constexpr double kStrictGuard = 1e-12;

/// Affine independence by the singular values of the difference matrix.
bool affinely_independent(const std::vector<Vector>& points, double tol = kAffineTolerance);

class FiniteSimplex {
public:
    FiniteSimplex() = default;
    /// Throws InvalidArgument on dimension mismatch, label count mismatch or
    /// affinely dependent vertices.
    FiniteSimplex(std::vector<Vector> vertices, std::vector<std::string> labels = {});

    static FiniteSimplex from_json(const nlohmann::json& j);
    static FiniteSimplex load(const std::string& path);
    nlohmann::json to_json() const;

    std::size_t size() const noexcept { return vertices_.size(); }
    std::size_t dimension() const noexcept { return dim_; }
    const Vector& vertex(std::size_t i) const { return vertices_.at(i); }
    const std::vector<Vector>& vertices() const noexcept { return vertices_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    /// Largest distance between two vertices.
    double diameter() const;

private:
    std::vector<Vector> vertices_;
    std::vector<std::string> labels_;
    std::size_t dim_ = 0;
};

struct Face {
    FiniteSimplex parent;
    std::vector<std::size_t> indices;  // sorted, unique, nonempty

    static Face of(const FiniteSimplex& parent, std::vector<std::size_t> indices);
    static Face whole(const FiniteSimplex& parent);

    /// Face of this face, given by positions into `indices`; it is again a
    /// face of the parent.
    Face sub(const std::vector<std::size_t>& local) const;
    bool contains(std::size_t vertex) const;
    std::vector<Vector> points() const;
    FiniteSimplex as_simplex() const;
};

/// Faces of one simplex with disjoint vertex sets have disjoint hulls; this
/// checks it by the rank test on the union of their vertices.
bool hulls_disjoint(const Face& a, const Face& b);

/// Coordinates of p; throws OutsideSimplex off the affine hull or when a
/// coordinate is below -1e-9. Tiny negatives are clamped and renormalised.
Vector barycentric(const FiniteSimplex& K, const Vector& p);

struct Projection {
    Vector point;
    Vector weights;  // convex weights over the input points
    double distance = 0.0;
};

/// Nearest point of conv(points) to p (Wolfe's minimum-norm-point method).
Projection nearest_point(const std::vector<Vector>& points, const Vector& p);

class AffineMapOnSimplex {
public:
    AffineMapOnSimplex() = default;
    AffineMapOnSimplex(FiniteSimplex domain, std::vector<Vector> images);

    /// Identity, with images padded by zeros up to `ambient` coordinates.
    static AffineMapOnSimplex identity(const FiniteSimplex& domain, std::size_t ambient = 0);

    const FiniteSimplex& domain() const noexcept { return domain_; }
    const std::vector<Vector>& images() const noexcept { return images_; }
    const Vector& image(std::size_t i) const { return images_.at(i); }
    std::size_t ambient() const;

    Vector apply(const Vector& p) const;
    Vector apply_weights(const Vector& weights) const;

    /// Injective iff the vertex images are affinely independent.
    bool injective() const;
    bool injective_on(const std::vector<std::size_t>& vertices) const;
    /// max over vertices of |image - vertex|; by convexity of the norm this
    /// bounds the displacement on the whole simplex.
    double sup_displacement() const;
    double sup_distance(const AffineMapOnSimplex& other) const;

    nlohmann::json to_json() const;

private:
    FiniteSimplex domain_;
    std::vector<Vector> images_;
};

/// Vertices of F stay put, every other vertex goes to its nearest point in
/// conv(F). Throws NotDense naming the vertex and gap when a gap exceeds eps.
AffineMapOnSimplex retract(const FiniteSimplex& K, const Face& F, double eps);

template <class T>
using Splitter = std::function<std::vector<std::vector<T>>(const std::vector<T>&)>;

template <class T>
Splitter<T> singleton_splitter() {
    return [](const std::vector<T>& set) {
        std::vector<std::vector<T>> out;
        for (const auto& x : set) out.push_back({x});
        return out;
    };
}

template <class T>
Splitter<T> whole_splitter() {
    return [](const std::vector<T>& set) { return std::vector<std::vector<T>>{set}; };
}

/// Pairwise disjoint family with the same union, each member inside some
/// input: the first set whole, then each new difference split into pieces.
/// Empty differences are dropped. Throws InvalidArgument if the splitter
/// does not partition the difference it was given.
template <class T>
std::vector<std::vector<T>> decompose(const std::vector<std::vector<T>>& sets,
                                      const Splitter<T>& split) {
    std::vector<std::vector<T>> out;
    std::set<T> seen;
    for (std::size_t n = 0; n < sets.size(); ++n) {
        std::vector<T> diff;
        std::set<T> fresh;
        for (const auto& x : sets[n]) {
            if (!seen.count(x) && fresh.insert(x).second) diff.push_back(x);
        }
        seen.insert(diff.begin(), diff.end());
        if (diff.empty()) continue;
        if (n == 0) {
            out.push_back(std::move(diff));
            continue;
        }
        std::set<T> covered;
        std::size_t total = 0;
        for (auto& piece : split(diff)) {
            for (const auto& x : piece) {
                if (!fresh.count(x) || !covered.insert(x).second) {
                    throw Error(ErrorKind::InvalidArgument, "splitter output is not a partition");
                }
            }
            total += piece.size();
            if (!piece.empty()) out.push_back(std::move(piece));
        }
        if (total != diff.size()) {
            throw Error(ErrorKind::InvalidArgument, "splitter output is not a partition");
        }
    }
    return out;
}

/// Summable tolerance schedule eps_1, eps_2, ...
struct EpsSchedule {
    enum class Kind { Geometric, Explicit };
    Kind kind = Kind::Geometric;
    double ratio = 0.5;
    std::vector<double> values;

    /// "geometric:r" gives eps_k = r^k; "list:a,b,c" gives explicit values.
    static EpsSchedule parse(const std::string& text);
    double eps(std::size_t k) const;  // k >= 1
    /// sum of eps_j over j > k
    double tail_after(std::size_t k) const;
    std::size_t horizon() const;  // stages available (SIZE_MAX if geometric)
    std::string to_string() const;
};

struct StageRecord {
    std::size_t stage = 0;
    double eps = 0.0;
    double alpha = 0.0;
    std::size_t groups_used = 0;                    // n_k after the stage
    std::vector<std::vector<std::size_t>> pieces;   // new vertex pieces
    double blend_shift = 0.0;
    double retract_shift = 0.0;
    double placement_shift = 0.0;
    double displacement = 0.0;                      // sup over vertices vs previous map
    bool agrees_on_previous_face = true;            // bit-identical images
};

struct GlueState {
    FiniteSimplex K;
    std::vector<std::vector<std::size_t>> groups;
    std::vector<double> group_diameters;
    EpsSchedule schedule;
    bool subdivide = true;                // split coarse groups into pieces
    std::size_t stage = 0;
    std::size_t groups_used = 0;
    std::vector<std::size_t> face;        // vertices of L_k in order of addition
    AffineMapOnSimplex map;               // phi_k
    std::vector<std::string> image_labels;  // label carried by each image, "" if none yet
    std::vector<StageRecord> history;

    /// Stage 0: identity map into R^(D + #vertices), empty face. Groups must
    /// be pairwise disjoint and cover the vertices.
    static GlueState initial(FiniteSimplex K, std::vector<std::vector<std::size_t>> groups,
                             EpsSchedule schedule);
    bool complete() const { return groups_used == groups.size(); }
};

GlueState glue_step(const GlueState& state);

struct GlueCertificate {
    std::vector<StageRecord> stages;
    double tail_bound = 0.0;   // 4 * sum of eps_j beyond the last stage
    bool displacement_ok = true;
    bool agreement_ok = true;
    bool injective = true;
    bool labels_ok = true;

    bool passed() const { return displacement_ok && agreement_ok && injective && labels_ok; }
    nlohmann::json to_json() const;
};

struct GlueRun {
    GlueState state;
    GlueCertificate certificate;
};

GlueRun glue_run(GlueState state, std::size_t stages);

std::vector<std::vector<std::size_t>> load_groups(const std::string& path);

}  // namespace zdm
