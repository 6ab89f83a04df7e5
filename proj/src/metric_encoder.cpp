#include "zdm/metric_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>

#include "zdm/error.hpp"

namespace zdm {

namespace {

constexpr long double kTwo64 = 18446744073709551616.0L;

double fixed_to_double(std::uint64_t a) { return std::ldexp(static_cast<double>(a), -64); }

// Arc length between two angles on the circle of circumference 1.
double circle_distance(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t forward = a - b;
    const std::uint64_t backward = b - a;
    return fixed_to_double(std::min(forward, backward));
}

double tent(double u, double r, double d) { return std::max(0.0, 1.0 - std::abs(u - r) / d); }

double plateau(double u, double r_lo, double r_hi, double d) {
    if (u >= r_lo && u <= r_hi) return 1.0;
    const double gap = u < r_lo ? r_lo - u : u - r_hi;
    return std::max(0.0, 1.0 - gap / d);
}

}  // namespace

// ---------------------------------------------------------------------------
// Points and systems

double Point::circle_value() const { return fixed_to_double(angle); }

bool Point::operator==(const Point& other) const {
    if (word || other.word) {
        if (!word || !other.word) return false;
        return *word == *other.word && position == other.position;
    }
    return angle == other.angle;
}

std::uint64_t to_fixed(long double value) {
    long double frac = value - std::floor(value);
    const long double scaled = frac * kTwo64;
    if (scaled >= kTwo64) return 0;
    return static_cast<std::uint64_t>(scaled);
}

Point circle_point(double value) { return Point{to_fixed(value), nullptr, 0}; }

std::optional<long double> named_rotation(const std::string& name) {
    if (name == "sqrt2-1") return std::sqrt(2.0L) - 1.0L;
    if (name == "golden") return (std::sqrt(5.0L) - 1.0L) / 2.0L;
    if (name == "sqrt3-1") return std::sqrt(3.0L) - 1.0L;
    if (name == "sqrt5-2") return std::sqrt(5.0L) - 2.0L;
    if (name == "e-2") return std::exp(1.0L) - 2.0L;
    if (name == "pi-3") return std::numbers::pi_v<long double> - 3.0L;
    return std::nullopt;
}

MetricSystem MetricSystem::circle_rotation(long double alpha, std::string alpha_text) {
    MetricSystem sys;
    sys.kind_ = Kind::CircleRotation;
    sys.alpha_ = to_fixed(alpha);
    if (sys.alpha_ == 0) throw Error(ErrorKind::InvalidArgument, "rotation by an integer");
    sys.alpha_text_ = alpha_text.empty() ? std::to_string(static_cast<double>(alpha)) : alpha_text;
    return sys;
}

MetricSystem MetricSystem::symbolic(Subshift s, std::size_t resolution) {
    MetricSystem sys;
    sys.kind_ = Kind::Symbolic;
    sys.subshift_ = std::move(s);
    sys.resolution_ = resolution;
    return sys;
}

MetricSystem MetricSystem::from_json(const nlohmann::json& spec) {
    try {
        const auto type = spec.at("type").get<std::string>();
        if (type == "circle_rotation") {
            const auto& a = spec.at("alpha");
            if (a.is_number()) return circle_rotation(a.get<double>());
            const auto text = a.get<std::string>();
            if (auto named = named_rotation(text)) return circle_rotation(*named, text);
            std::size_t used = 0;
            long double value = 0;
            try {
                value = std::stold(text, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != text.size() || used == 0) {
                throw Error(ErrorKind::ParseError, "alpha '" + text + "' is neither a known name nor a decimal");
            }
            return circle_rotation(value, text);
        }
        if (type == "symbolic") {
            return symbolic(Subshift::from_json(spec.at("subshift")),
                            spec.value("resolution", std::size_t{24}));
        }
        throw Error(ErrorKind::ParseError, "unknown metric system type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

MetricSystem MetricSystem::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
}

nlohmann::json MetricSystem::to_json() const {
    if (kind_ == Kind::CircleRotation) {
        return {{"type", "circle_rotation"}, {"alpha", alpha_text_}};
    }
    return {{"type", "symbolic"}, {"subshift", subshift_->to_json()}, {"resolution", resolution_}};
}

const Subshift& MetricSystem::subshift() const {
    if (!subshift_) throw Error(ErrorKind::InvalidArgument, "not a symbolic system");
    return *subshift_;
}

Point MetricSystem::apply(const Point& x, std::int64_t steps) const {
    Point y = x;
    if (kind_ == Kind::CircleRotation) {
        y.angle = x.angle + static_cast<std::uint64_t>(steps) * alpha_;
    } else {
        y.position += steps;
    }
    return y;
}

Point MetricSystem::symbolic_point(const Word& word, std::int64_t position) const {
    return Point{0, std::make_shared<const Word>(word), position};
}

// Symbolic distance 2^-n with n the least |i| where the points differ. When
// one word runs out first the distance is only known to be at most
// 2^-(r+1) for the agreeing radius r, and that upper bound is returned.
double MetricSystem::distance(const Point& a, const Point& b) const {
    if (kind_ == Kind::CircleRotation) return circle_distance(a.angle, b.angle);
    if (!a.word || !b.word) throw Error(ErrorKind::InvalidArgument, "symbolic point without a word");
    auto at = [](const Point& p, std::int64_t i) -> std::optional<Symbol> {
        const std::int64_t k = p.position + i;
        if (k < 0 || k >= static_cast<std::int64_t>(p.word->size())) return std::nullopt;
        return (*p.word)[static_cast<std::size_t>(k)];
    };
    for (std::int64_t n = 0; n <= static_cast<std::int64_t>(resolution_); ++n) {
        for (std::int64_t i : {-n, n}) {
            auto x = at(a, i), y = at(b, i);
            if (!x || !y) return std::ldexp(1.0, -static_cast<int>(n));
            if (*x != *y) return std::ldexp(1.0, -static_cast<int>(n));
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Covers and labels

std::size_t schedule_size(const MetricSystem& sys, std::size_t level) {
    if (level == 0) throw Error(ErrorKind::InvalidArgument, "levels start at 1");
    if (sys.kind() == MetricSystem::Kind::CircleRotation) {
        if (level > 60) throw Error(ErrorKind::InvalidArgument, "level too deep");
        return std::size_t{1} << (level + 1);
    }
    return sys.subshift().language(2 * level - 1).size();
}

CoverFamily build_cover_family(const MetricSystem& sys, std::size_t level, std::size_t m,
                               double slack) {
    if (m < 2) throw Error(ErrorKind::InvalidArgument, "a cover needs at least two balls");
    if (!(slack > 0.0 && slack < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "slack must lie in (0, 1)");
    }
    CoverFamily fam;
    fam.level = level;
    std::vector<Point> grid;
    double grid_slack = 0.0;
    if (sys.kind() == MetricSystem::Kind::CircleRotation) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto angle = static_cast<std::uint64_t>(
                (static_cast<unsigned __int128>(i) << 64) / m);
            fam.centers.push_back(Point{angle, nullptr, 0});
        }
        fam.covering_radius = 0.5 / static_cast<double>(m);
        const std::size_t g = 64 * m;
        for (std::size_t j = 0; j < g; ++j) {
            grid.push_back(circle_point((static_cast<double>(j) + 0.5) / static_cast<double>(g)));
        }
        grid_slack = 0.5 / static_cast<double>(g);
    } else {
        const auto& s = sys.subshift();
        std::size_t h = 0;
        while (s.language(2 * h + 1).size() < m && 2 * h + 1 <= 2 * sys.resolution()) ++h;
        const auto& words = s.language(2 * h + 1);
        if (words.size() != m) {
            throw Error(ErrorKind::InvalidArgument,
                        "no cylinder depth gives exactly " + std::to_string(m) + " centers");
        }
        for (const auto& w : words) {
            fam.centers.push_back(sys.symbolic_point(w, static_cast<std::int64_t>(h)));
        }
        fam.covering_radius = std::ldexp(1.0, -static_cast<int>(h + 1));
        for (const auto& u : s.language(2 * h + 3)) {
            grid.push_back(sys.symbolic_point(u, static_cast<std::int64_t>(h + 1)));
        }
    }
    fam.r0 = fam.covering_radius * (1.0 + slack / 2.0);
    fam.r1 = fam.covering_radius * (1.0 + slack);
    fam.grid_points = grid.size();
    for (const auto& x : grid) {
        double nearest = 2.0;
        for (const auto& c : fam.centers) nearest = std::min(nearest, sys.distance(x, c));
        if (!(nearest + grid_slack < fam.r0)) {
            throw Error(ErrorKind::CoverFailure, "grid point not covered at level " +
                                                     std::to_string(level));
        }
    }
    return fam;
}

std::vector<CoverFamily> build_schedule(const MetricSystem& sys, std::size_t levels,
                                        double slack) {
    std::vector<CoverFamily> out;
    for (std::size_t k = 1; k <= levels; ++k) {
        out.push_back(build_cover_family(sys, k, schedule_size(sys, k), slack));
    }
    return out;
}

PartitionLabel label(const MetricSystem& sys, const CoverFamily& fam, double t, const Point& x) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidArgument, "t must lie in [0, 1]");
    const double r = fam.radius(t);
    PartitionLabel eta(fam.size());
    bool inside_some = false;
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const bool inside = sys.distance(x, fam.centers[i]) < r;
        eta[i] = inside ? 0 : 1;
        inside_some = inside_some || inside;
    }
    if (!inside_some) throw Error(ErrorKind::CoverFailure, "point outside every ball");
    return eta;
}

std::string render_label(const PartitionLabel& eta) {
    std::string s;
    for (auto v : eta) s += static_cast<char>('0' + v);
    return s;
}

// ---------------------------------------------------------------------------
// Measures and boundary-mass estimates

Measure haar_measure(std::string name, std::string address) {
    return Measure{Measure::Kind::Haar, std::move(name), std::move(address), {}};
}

Measure sphere_measure(const CoverFamily& fam, std::size_t center, const std::vector<double>& ts,
                       std::string name, std::string address) {
    if (ts.empty()) throw Error(ErrorKind::InvalidArgument, "sphere measure needs radii");
    const auto& c = fam.centers.at(center);
    if (c.word) throw Error(ErrorKind::InvalidArgument, "sphere measures live on the circle");
    Measure mu{Measure::Kind::Atomic, std::move(name), std::move(address), {}};
    for (double t : ts) {
        Point p{c.angle + to_fixed(fam.radius(t)), nullptr, 0};
        mu.atoms.push_back(Atom{p, 1.0 / static_cast<double>(ts.size())});
    }
    return mu;
}

std::vector<Measure> measures_from_json(const nlohmann::json& list, const MetricSystem& sys,
                                        const std::vector<CoverFamily>& schedule) {
    std::vector<Measure> out;
    try {
        for (const auto& item : list) {
            const std::string kind = item.at("kind").get<std::string>();
            std::string name = item.value("name", "mu" + std::to_string(out.size()));
            std::string address = item.value("address", "");
            if (address.find_first_not_of("01") != std::string::npos) {
                throw Error(ErrorKind::ParseError, "address of " + name + " is not binary");
            }
            if (kind == "haar") {
                out.push_back(haar_measure(std::move(name), std::move(address)));
            } else if (kind == "sphere") {
                const auto level = item.at("level").get<std::size_t>();
                if (level == 0 || level > schedule.size()) {
                    throw Error(ErrorKind::InvalidArgument, "sphere level outside the schedule");
                }
                const auto& fam = schedule[level - 1];
                const auto center = item.at("center").get<std::size_t>();
                if (center >= fam.size()) throw Error(ErrorKind::InvalidArgument, "no such center");
                out.push_back(sphere_measure(fam, center, item.at("ts").get<std::vector<double>>(),
                                             std::move(name), std::move(address)));
            } else if (kind == "atomic") {
                if (sys.kind() != MetricSystem::Kind::CircleRotation) {
                    throw Error(ErrorKind::InvalidArgument, "atomic measures are read on the circle only");
                }
                Measure mu{Measure::Kind::Atomic, std::move(name), std::move(address), {}};
                for (const auto& atom : item.at("atoms")) {
                    mu.atoms.push_back(Atom{circle_point(atom.at("x").get<double>()),
                                            atom.at("weight").get<double>()});
                }
                if (mu.atoms.empty()) throw Error(ErrorKind::InvalidArgument, "atomic measure without atoms");
                out.push_back(std::move(mu));
            } else {
                throw Error(ErrorKind::ParseError, "unknown measure kind '" + kind + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    return out;
}

double star_discrepancy(std::vector<double> points) {
    if (points.empty()) return 1.0;
    std::sort(points.begin(), points.end());
    const auto n = static_cast<double>(points.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double k = static_cast<double>(i);
        worst = std::max({worst, (k + 1.0) / n - points[i], points[i] - k / n});
    }
    return worst;
}

namespace {

template <class Fn>
PsiEstimate integrate(const MetricSystem& sys, const CoverFamily& fam, const Measure& mu,
                      const QuadratureConfig& cfg, Fn profile) {
    if (!(cfg.d > 0.0)) throw Error(ErrorKind::InvalidArgument, "tent half-width must be positive");
    auto g = [&](const Point& x) {
        double best = 0.0;
        for (const auto& c : fam.centers) best = std::max(best, profile(sys.distance(x, c)));
        return best;
    };
    PsiEstimate est;
    if (mu.kind == Measure::Kind::Atomic) {
        for (const auto& a : mu.atoms) est.value += a.weight * g(a.point);
        est.samples = mu.atoms.size();
        return est;
    }
    if (sys.kind() != MetricSystem::Kind::CircleRotation) {
        throw Error(ErrorKind::InvalidArgument, "Haar quadrature is only defined on the circle");
    }
    const std::size_t q = cfg.samples;
    const std::size_t needed = cfg.scheme == QuadratureConfig::Scheme::Orbit ? 2 * q : q;
    if (q == 0 || needed > cfg.budget) {
        throw Error(ErrorKind::QuadratureBudgetExceeded,
                    std::to_string(needed) + " samples > budget " + std::to_string(cfg.budget));
    }
    // Koksma: |mean - integral| <= V(g) D*, and each ball contributes two
    // unimodal bumps of height 1, so V(g) <= 4 m.
    const double variation = 4.0 * static_cast<double>(fam.size());
    double grid_sum = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
        grid_sum += g(circle_point((static_cast<double>(j) + 0.5) / static_cast<double>(q)));
    }
    const double grid_value = grid_sum / static_cast<double>(q);
    const double grid_tol = variation * 0.5 / static_cast<double>(q);
    if (cfg.scheme == QuadratureConfig::Scheme::Grid) {
        est.value = grid_value;
        est.tolerance = grid_tol;
        est.samples = q;
        return est;
    }
    std::mt19937_64 rng(cfg.seed);
    Point x{rng(), nullptr, 0};
    std::vector<double> visited(q);
    double sum = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
        sum += g(x);
        visited[j] = x.circle_value();
        x = sys.apply(x);
    }
    est.value = sum / static_cast<double>(q);
    est.tolerance = variation * star_discrepancy(std::move(visited));
    est.samples = q;
    est.cross_check = grid_value;
    return est;
}

}  // namespace

PsiEstimate psi_estimate(const MetricSystem& sys, const CoverFamily& fam, const Measure& mu,
                         double t, const QuadratureConfig& cfg) {
    const double r = fam.radius(t);
    return integrate(sys, fam, mu, cfg, [&](double u) { return tent(u, r, cfg.d); });
}

PsiEstimate psi_piece_bound(const MetricSystem& sys, const CoverFamily& fam, const Measure& mu,
                            double t_lo, double t_hi, const QuadratureConfig& cfg) {
    const double lo = fam.radius(t_lo), hi = fam.radius(t_hi);
    return integrate(sys, fam, mu, cfg, [&](double u) { return plateau(u, lo, hi, cfg.d); });
}

std::vector<double> bad_parameters(const MetricSystem& sys, const CoverFamily& fam,
                                   const Measure& mu) {
    std::vector<double> out;
    for (const auto& a : mu.atoms) {
        for (const auto& c : fam.centers) {
            const double t = fam.parameter_of(sys.distance(a.point, c));
            if (t >= 0.0 && t <= 1.0) out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Selector

double CantorCylinder::left() const {
    double value = 0.0, scale = 1.0;
    for (char b : bits) {
        scale /= 3.0;
        if (b == '1') value += 2.0 * scale;
    }
    return value;
}

double CantorCylinder::diameter() const { return std::pow(3.0, -static_cast<double>(bits.size())); }

bool CantorCylinder::contains(const CantorCylinder& other) const {
    return other.bits.size() >= bits.size() && other.bits.compare(0, bits.size(), bits) == 0;
}

std::size_t stage_depth(std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "stages start at 1");
    std::size_t m = 0;
    // 3^-m <= 2^(1-n)  <=>  m log 3 >= (n - 1) log 2
    while (static_cast<double>(m) * std::log(3.0) < static_cast<double>(n - 1) * std::log(2.0) - 1e-12) {
        ++m;
    }
    return m;
}

namespace {

std::string padded(const std::string& address, std::size_t length) {
    std::string out = address.substr(0, std::min(address.size(), length));
    out.resize(length, '0');
    return out;
}

void validate_address(const Measure& mu) {
    for (char c : mu.address) {
        if (c != '0' && c != '1') {
            throw Error(ErrorKind::InvalidArgument, "index address of " + mu.name + " is not binary");
        }
    }
}

struct PieceBound {
    bool small = true;
    double bound = 0.0;
    double tolerance = 0.0;
};

PieceBound bound_piece(const MetricSystem& sys, const std::vector<CoverFamily>& schedule,
                       const std::vector<Measure>& measures, const std::vector<std::size_t>& members,
                       const CantorCylinder& cyl, std::size_t n, const QuadratureConfig& cfg) {
    const double threshold = std::ldexp(1.0, 1 - static_cast<int>(n));
    const double t_lo = cyl.left();
    const double t_hi = std::min(1.0, t_lo + cyl.diameter());
    PieceBound out;
    const std::size_t levels = std::min(n, schedule.size());
    for (std::size_t i : members) {
        for (std::size_t k = 0; k < levels; ++k) {
            const auto est = psi_piece_bound(sys, schedule[k], measures[i], t_lo, t_hi, cfg);
            out.bound = std::max(out.bound, est.value);
            out.tolerance = std::max(out.tolerance, est.tolerance);
            if (est.value > threshold + est.tolerance) {
                out.small = false;
                return out;
            }
        }
    }
    return out;
}

}  // namespace

SelectorTable selector_build(const MetricSystem& sys, const std::vector<CoverFamily>& schedule,
                             const std::vector<Measure>& measures, std::size_t n_max,
                             const QuadratureConfig& cfg, std::size_t extra_depth) {
    if (measures.empty()) throw Error(ErrorKind::InvalidArgument, "no measures");
    if (schedule.empty()) throw Error(ErrorKind::InvalidArgument, "empty cover schedule");
    if (n_max == 0) throw Error(ErrorKind::InvalidArgument, "n_max must be >= 1");
    for (const auto& mu : measures) validate_address(mu);

    SelectorTable table;
    SelectorStage base{1, 0, {}};
    SelectorPiece all;
    for (std::size_t i = 0; i < measures.size(); ++i) all.members.push_back(i);
    const auto whole = bound_piece(sys, schedule, measures, all.members, all.cylinder, 1, cfg);
    all.bound = whole.bound;
    all.tolerance = whole.tolerance;
    base.pieces.push_back(all);
    table.stages.push_back(base);

    for (std::size_t n = 2; n <= n_max; ++n) {
        const std::size_t m = stage_depth(n);
        SelectorStage stage{n, m, {}};
        const auto& previous = table.stages.back();
        for (std::size_t j = 0; j < previous.pieces.size(); ++j) {
            const auto& parent = previous.pieces[j];
            std::map<std::string, std::vector<std::size_t>> groups;
            for (std::size_t i : parent.members) groups[padded(measures[i].address, m)].push_back(i);
            for (auto& [prefix, members] : groups) {
                std::optional<SelectorPiece> found;
                const std::size_t start = std::max(m, parent.cylinder.bits.size());
                for (std::size_t depth = start; depth <= start + extra_depth && !found; ++depth) {
                    const std::size_t free = depth - parent.cylinder.bits.size();
                    if (free >= 24) break;
                    for (std::uint64_t e = 0; e < (std::uint64_t{1} << free) && !found; ++e) {
                        CantorCylinder cyl{parent.cylinder.bits};
                        for (std::size_t b = free; b-- > 0;) cyl.bits += ((e >> b) & 1) ? '1' : '0';
                        auto pb = bound_piece(sys, schedule, measures, members, cyl, n, cfg);
                        if (pb.small) {
                            found = SelectorPiece{members, prefix, cyl, j, pb.bound, pb.tolerance};
                        }
                    }
                }
                if (!found) {
                    throw Error(ErrorKind::NoSmallPiece,
                                "n=" + std::to_string(n) + ", piece " + std::to_string(j) +
                                    ", index prefix " + prefix);
                }
                stage.pieces.push_back(std::move(*found));
            }
        }
        table.stages.push_back(std::move(stage));
    }

    table.limit.resize(measures.size());
    table.limit_value.resize(measures.size());
    for (const auto& piece : table.stages.back().pieces) {
        for (std::size_t i : piece.members) {
            table.limit[i] = piece.cylinder;
            table.limit_value[i] = piece.cylinder.left();
        }
    }
    return table;
}

SelectorCheck check_selector(const SelectorTable& table, const MetricSystem& sys,
                             const std::vector<CoverFamily>& schedule,
                             const std::vector<Measure>& measures, const QuadratureConfig& cfg) {
    SelectorCheck check;
    auto fail = [&](bool& flag, const std::string& why) {
        flag = false;
        if (check.witness.empty()) check.witness = why;
    };
    check.base = check.nesting = check.diameters = check.smallness = true;

    if (table.stages.empty() || table.stages[0].n != 1 || table.stages[0].pieces.size() != 1 ||
        table.stages[0].pieces[0].members.size() != measures.size() ||
        !table.stages[0].pieces[0].cylinder.bits.empty()) {
        fail(check.base, "stage 1 is not (all indices, full Cantor set)");
    }
    auto index_value = [&](std::size_t i) { return CantorCylinder{padded(measures[i].address, 40)}.left(); };

    for (std::size_t s = 0; s < table.stages.size(); ++s) {
        const auto& stage = table.stages[s];
        const double limit = std::ldexp(1.0, 1 - static_cast<int>(stage.n));
        std::vector<int> seen(measures.size(), 0);
        for (std::size_t p = 0; p < stage.pieces.size(); ++p) {
            const auto& piece = stage.pieces[p];
            const std::string where = "stage " + std::to_string(stage.n) + " piece " + std::to_string(p);
            for (std::size_t i : piece.members) ++seen.at(i);
            if (s > 0) {
                const auto& prev = table.stages[s - 1];
                if (piece.parent >= prev.pieces.size()) {
                    fail(check.nesting, where + ": no parent");
                } else {
                    const auto& parent = prev.pieces[piece.parent];
                    for (std::size_t i : piece.members) {
                        if (std::find(parent.members.begin(), parent.members.end(), i) ==
                            parent.members.end()) {
                            fail(check.nesting, where + ": index outside parent");
                        }
                    }
                    if (!parent.cylinder.contains(piece.cylinder)) {
                        fail(check.nesting, where + ": cylinder outside parent");
                    }
                }
            }
            double index_diam = 0.0;
            for (std::size_t a : piece.members)
                for (std::size_t b : piece.members)
                    index_diam = std::max(index_diam, std::abs(index_value(a) - index_value(b)));
            if (index_diam > limit || piece.cylinder.diameter() > limit * (1.0 + 1e-12)) {
                fail(check.diameters, where + ": diameter above 2^(1-n)");
            }
            auto pb = bound_piece(sys, schedule, measures, piece.members, piece.cylinder, stage.n, cfg);
            if (!pb.small) fail(check.smallness, where + ": psi bound " + std::to_string(pb.bound));
        }
        if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
            fail(check.nesting, "stage " + std::to_string(stage.n) + " does not partition the indices");
        }
    }
    return check;
}

nlohmann::json SelectorTable::to_json(const std::vector<Measure>& measures) const {
    nlohmann::json j;
    j["stages"] = nlohmann::json::array();
    for (const auto& stage : stages) {
        nlohmann::json s{{"n", stage.n}, {"depth", stage.depth}, {"pieces", nlohmann::json::array()}};
        for (const auto& p : stage.pieces) {
            nlohmann::json names = nlohmann::json::array();
            for (auto i : p.members) names.push_back(measures.at(i).name);
            s["pieces"].push_back({{"members", names},
                                   {"index_prefix", p.index_prefix},
                                   {"cylinder", p.cylinder.bits},
                                   {"t_left", p.cylinder.left()},
                                   {"diameter", p.cylinder.diameter()},
                                   {"parent", p.parent},
                                   {"psi_bound", p.bound},
                                   {"tolerance", p.tolerance}});
        }
        j["stages"].push_back(s);
    }
    j["limit"] = nlohmann::json::array();
    for (std::size_t i = 0; i < limit.size(); ++i) {
        j["limit"].push_back(
            {{"measure", measures.at(i).name}, {"address", limit[i].bits}, {"t", limit_value[i]}});
    }
    return j;
}

// ---------------------------------------------------------------------------
// Array-names

ArrayName array_name(const MetricSystem& sys, const std::vector<CoverFamily>& schedule, double t,
                     const Point& x, std::size_t depth, std::int64_t halfwidth) {
    if (depth == 0 || depth > schedule.size()) {
        throw Error(ErrorKind::InvalidArgument, "depth outside the cover schedule");
    }
    if (halfwidth < 0) throw Error(ErrorKind::InvalidArgument, "negative halfwidth");
    ArrayName name{depth, halfwidth, {}};
    for (std::size_t k = 0; k < depth; ++k) {
        std::vector<PartitionLabel> row;
        for (std::int64_t j = -halfwidth; j <= halfwidth; ++j) {
            row.push_back(label(sys, schedule[k], t, sys.apply(x, j)));
        }
        name.cells.push_back(std::move(row));
    }
    return name;
}

nlohmann::json ArrayName::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : cells) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& eta : row) r.push_back(render_label(eta));
        rows.push_back(r);
    }
    return {{"depth", depth}, {"halfwidth", halfwidth}, {"rows", rows}};
}

Recoverability recoverability_check(const MetricSystem& sys,
                                    const std::vector<CoverFamily>& schedule, double t,
                                    const std::vector<Point>& points, std::size_t depth,
                                    std::int64_t halfwidth) {
    Recoverability out;
    if (points.size() < 2) {
        out.separated = true;
        out.k = 1;
        return out;
    }
    std::vector<ArrayName> names;
    for (const auto& p : points) names.push_back(array_name(sys, schedule, t, p, depth, halfwidth));

    // first_split[a][b]: least |j| at which rows 1..k of a and b differ.
    const std::size_t count = points.size();
    std::vector<std::int64_t> split(count * count, halfwidth + 1);
    for (std::size_t k = 0; k < depth; ++k) {
        std::int64_t needed = 0;
        for (std::size_t a = 0; a < count; ++a) {
            for (std::size_t b = a + 1; b < count; ++b) {
                auto& s = split[a * count + b];
                for (std::int64_t n = 0; n < s; ++n) {
                    if (names[a].at(k, n) != names[b].at(k, n) ||
                        names[a].at(k, -n) != names[b].at(k, -n)) {
                        s = n;
                        break;
                    }
                }
                needed = std::max(needed, s);
            }
        }
        if (needed <= halfwidth) {
            out.separated = true;
            out.k = k + 1;
            out.n = needed;
            return out;
        }
    }
    return out;
}

}  // namespace zdm
