#include "zdm/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "zdm/dense_embedding.hpp"
#include "zdm/error.hpp"
#include "zdm/markers.hpp"
#include "zdm/metric_encoder.hpp"
#include "zdm/report.hpp"
#include "zdm/simplex_geometry.hpp"

namespace zdm {

namespace {

// Limits and tolerances of the desk matrix.
constexpr double kMarkerLimit = 10.0;
constexpr double kNegativeLimit = 5.0;
constexpr double kDenseLimit = 60.0;
constexpr double kOneSidedLimit = 10.0;
constexpr double kEncoderLimit = 60.0;
constexpr double kSelectorLimit = 30.0;
constexpr double kSimplexLimit = 30.0;
constexpr double kEndToEndLimit = 300.0;

constexpr std::size_t kMarkerMaxL = 16;
constexpr std::size_t kNegativeMaxL = 4;
constexpr double kWindowFactor = 20.0;      // host windows of 20 N0 / eps columns
constexpr int kDensityWindows = 5;
constexpr int kInjectivityWindows = 1000;
constexpr int kLocalityMutations = 1000;
constexpr int kOneSidedWindows = 100;
constexpr double kPsiThreshold = 0.02;      // at d = 0.01
constexpr int kPsiParameters = 20;
constexpr int kOrbitPoints = 100;
constexpr int kRecoverPairs = 50;
constexpr std::int64_t kRecoverHalfwidth = 8192;
constexpr double kSelectorD = 1e-6;
constexpr std::size_t kSelectorStages = 6;
constexpr double kBadSetGap = 1e-9;
constexpr int kSimplexInstances = 100;
constexpr int kDecomposeFamilies = 100;
constexpr double kAffineCheck = 1e-9;
constexpr std::size_t kGlueStages = 5;

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

ArrayWindow host_window(const Word& text, std::size_t start, std::size_t cols) {
    Word row(text.begin() + static_cast<long>(start), text.begin() + static_cast<long>(start + cols));
    return ArrayWindow::single_row(Alphabet::binary(), row, 0);
}

std::uint64_t window_digest(const ArrayWindow& w) {
    std::string bytes;
    for (std::size_t r = 0; r < w.depth(); ++r) {
        for (auto s : w.row(r)) bytes.push_back(static_cast<char>(s));
        bytes.push_back('\n');
    }
    return fnv1a64(bytes);
}

// Distance from p to conv(points) by trying the affine hull of every subset.
double brute_force_gap(const std::vector<Vector>& points, const Vector& p) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = points.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> S;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) S.push_back(i);
        const auto m = static_cast<Eigen::Index>(S.size());
        Eigen::MatrixXd A(p.size() + 1, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            A.col(j).head(p.size()) = points[S[static_cast<std::size_t>(j)]];
            A(p.size(), j) = 1e6;
        }
        Vector b(p.size() + 1);
        b.head(p.size()) = p;
        b[p.size()] = 1e6;
        Vector w = A.completeOrthogonalDecomposition().solve(b);
        if (w.minCoeff() < -1e-12) continue;
        Vector q = Vector::Zero(p.size());
        for (Eigen::Index j = 0; j < m; ++j) q += w[j] * points[S[static_cast<std::size_t>(j)]];
        best = std::min(best, (q - p).norm());
    }
    return best;
}

FiniteSimplex random_simplex(std::mt19937_64& rng, std::size_t dim, std::size_t count, double scale) {
    std::normal_distribution<double> gauss;
    for (;;) {
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < count; ++i) {
            Vector v(static_cast<Eigen::Index>(dim));
            for (auto& x : v) x = scale * gauss(rng);
            pts.push_back(v);
        }
        if (affinely_independent(pts, 1e-3 * scale)) return FiniteSimplex(pts);
    }
}

}  // namespace

bool CriterionResult::passed() const {
    if (!within_time()) return false;
    return std::all_of(subchecks.begin(), subchecks.end(), [](const Subcheck& s) { return s.passed; });
}

std::string CriterionResult::line() const {
    std::ostringstream out;
    out << "criterion " << id << " " << (passed() ? "PASS" : "FAIL") << "  " << title << "  ("
        << fmt(seconds) << " s, limit " << limit_seconds << " s)";
    std::vector<const Subcheck*> failed;
    for (const auto& s : subchecks)
        if (!s.passed) failed.push_back(&s);
    if (!within_time()) out << "  over time";
    if (!failed.empty()) {
        out << "  failed:";
        for (std::size_t i = 0; i < failed.size(); ++i) {
            out << (i ? ";" : "") << " " << failed[i]->name;
            if (!failed[i]->detail.empty()) out << " [" << failed[i]->detail << "]";
        }
    } else {
        out << "  " << subchecks.size() << " checks";
    }
    return out.str();
}

nlohmann::json CriterionResult::to_json() const {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& s : subchecks) checks.push_back({{"name", s.name}, {"passed", s.passed}, {"detail", s.detail}});
    return {{"id", id},
            {"title", title},
            {"passed", passed()},
            {"seconds", seconds},
            {"limit_seconds", limit_seconds},
            {"checks", checks}};
}

CriterionResult marker_suite(std::uint64_t) {
    Stopwatch clock;
    CriterionResult r{1, "marker suite", 0.0, kMarkerLimit, {}};
    const std::vector<std::pair<std::string, Subshift>> systems{{"fibonacci", Subshift::fibonacci()},
                                                                {"thue-morse", Subshift::thue_morse()}};
    for (const auto& [name, s] : systems) {
        for (std::size_t n = 2; n <= 5; ++n) {
            Subcheck c{name + " n=" + std::to_string(n), false, ""};
            try {
                auto m = find_marker(s, n, kMarkerMaxL);
                auto v = verify_marker(s, m.W, n);
                c.passed = v.valid && v.N == std::optional<std::size_t>(m.N);
                c.detail = "L=" + std::to_string(m.L) + " |W|=" + std::to_string(m.W.size()) +
                           " N=" + std::to_string(m.N);
            } catch (const Error& e) {
                c.detail = e.what();
            }
            r.subchecks.push_back(std::move(c));
        }
    }
    Subcheck exact{"fibonacci n=2 gives W={1}, N=3", false, ""};
    try {
        auto m = find_marker(Subshift::fibonacci(), 2, kMarkerMaxL);
        exact.passed = m.W == std::vector<Word>{Word{1}} && m.N == 3;
        exact.detail = m.to_json()["W"].dump() + " N=" + std::to_string(m.N);
    } catch (const Error& e) {
        exact.detail = e.what();
    }
    r.subchecks.push_back(std::move(exact));
    r.seconds = clock.seconds();
    return r;
}

CriterionResult marker_negative_control(std::uint64_t) {
    Stopwatch clock;
    CriterionResult r{2, "marker negative control", 0.0, kNegativeLimit, {}};
    Subcheck c{"full 2-shift n=2 max_L=4 is NotFound", false, ""};
    try {
        auto m = find_marker(Subshift::full_shift(), 2, kNegativeMaxL);
        c.detail = "unexpected marker " + m.to_json().dump();
    } catch (const Error& e) {
        c.passed = e.kind() == ErrorKind::NotFound;
        c.detail = e.what();
    }
    r.subchecks.push_back(std::move(c));
    r.seconds = clock.seconds();
    return r;
}

CriterionResult dense_embedding_suite(std::uint64_t seed) {
    Stopwatch clock;
    CriterionResult r{3, "dense-embedding suite", 0.0, kDenseLimit, {}};
    const auto tm = Subshift::thue_morse();
    const auto fib = Subshift::fibonacci();
    const std::vector<Shape> shapes{{1, 1}, {1, 2}};
    const Word text = tm.iterate(0, 1 << 18);
    std::mt19937_64 rng(seed);

    for (double eps : {0.5, 0.25, 0.1}) {
        const std::string tag = "eps=" + fmt(eps) + " ";
        std::optional<EmbeddingPlan> planned;
        try {
            planned = plan_embedding(tm, fib, shapes, eps);
        } catch (const Error& e) {
            r.subchecks.push_back({tag + "plan", false, e.what()});
            continue;
        }
        const auto& plan = *planned;
        const auto cols = static_cast<std::size_t>(std::ceil(kWindowFactor * static_cast<double>(plan.N0) / eps));

        std::vector<ArrayWindow> outputs;
        for (int i = 0; i < kDensityWindows; ++i) {
            const std::size_t start = rng() % (text.size() - cols);
            outputs.push_back(build_phi(plan, host_window(text, start, cols)));
        }
        auto verdict = verify_density(plan, outputs);
        r.subchecks.push_back({tag + "inside with worst deviation < eps", verdict.inside && verdict.worst_deviation < eps,
                               "N0=" + std::to_string(plan.N0) + " cols=" + std::to_string(cols) +
                                   " worst=" + fmt(verdict.worst_deviation)});

        // Injectivity: distinct windows have distinct images and the host row
        // is carried through unchanged.
        std::set<std::uint64_t> inputs_seen;
        std::map<std::uint64_t, std::size_t> images;
        std::vector<std::size_t> starts;
        bool injective = true;
        std::string witness;
        for (int attempts = 0; starts.size() < kInjectivityWindows && attempts < 50 * kInjectivityWindows; ++attempts) {
            const std::size_t start = rng() % (text.size() - cols);
            auto x = host_window(text, start, cols);
            if (!inputs_seen.insert(window_digest(x)).second) continue;
            auto y = build_phi(plan, x);
            if (!(y.rows_slice(plan.N0, plan.N0 + 1) == x)) {
                injective = false;
                witness = "host row altered at start " + std::to_string(start);
            }
            auto [it, fresh] = images.emplace(window_digest(y), start);
            if (!fresh) {
                auto other = build_phi(plan, host_window(text, it->second, cols));
                if (other == y) {
                    injective = false;
                    witness = "starts " + std::to_string(it->second) + " and " + std::to_string(start);
                }
            }
            starts.push_back(start);
        }
        r.subchecks.push_back({tag + "injective on 1000 distinct windows",
                               injective && starts.size() == kInjectivityWindows,
                               witness.empty() ? std::to_string(starts.size()) + " windows" : witness});

        // Locality: another occurrence of the central block agrees on
        // [j - radius, j + radius] and differs somewhere outside.
        const auto radius = static_cast<std::int64_t>(plan.locality_radius());
        const std::size_t lcols = std::max<std::size_t>(400, static_cast<std::size_t>(6 * radius));
        const auto block = static_cast<std::size_t>(2 * radius + 1);
        int effective = 0;
        bool local = true;
        for (int attempts = 0; effective < kLocalityMutations && attempts < 50 * kLocalityMutations; ++attempts) {
            const std::size_t a = rng() % (text.size() - 2 * lcols);
            const std::int64_t j = radius + static_cast<std::int64_t>(rng() % (lcols - 2 * static_cast<std::size_t>(radius)));
            const std::size_t centre = a + static_cast<std::size_t>(j - radius);
            auto first = text.begin() + static_cast<long>(centre);
            auto it = std::search(text.begin() + static_cast<long>(centre + 1), text.end(), first,
                                  first + static_cast<long>(block));
            if (it == text.end()) continue;
            const std::size_t b = static_cast<std::size_t>(it - text.begin()) - static_cast<std::size_t>(j - radius);
            if (b + lcols > text.size()) continue;
            auto x = host_window(text, a, lcols);
            auto y = host_window(text, b, lcols);
            if (x == y) continue;
            auto fx = build_phi(plan, x);
            auto fy = build_phi(plan, y);
            for (std::size_t row = 0; row < fx.depth(); ++row) {
                if (fx.at_col(row, j) != fy.at_col(row, j)) {
                    local = false;
                    witness = "starts " + std::to_string(a) + "/" + std::to_string(b) + " column " + std::to_string(j);
                }
            }
            ++effective;
        }
        r.subchecks.push_back({tag + "local under 1000 out-of-radius mutations",
                               local && effective == kLocalityMutations,
                               "radius=" + std::to_string(radius) + " mutations=" + std::to_string(effective)});
    }
    r.seconds = clock.seconds();
    return r;
}

CriterionResult noninvertible_suite(std::uint64_t seed) {
    Stopwatch clock;
    CriterionResult r{4, "noninvertible variant", 0.0, kOneSidedLimit, {}};
    const auto tm = Subshift::thue_morse();
    auto plan = plan_embedding(tm, Subshift::fibonacci(), {{1, 1}, {1, 2}}, 0.5);
    const std::size_t bound = 2 * plan.N0 - 1;
    r.subchecks.push_back({"marker certificate N <= 2 N0 - 1", plan.marker.N <= bound,
                           "N=" + std::to_string(plan.marker.N) + " 2N0-1=" + std::to_string(bound)});
    const Word text = tm.iterate(0, 1 << 16);
    std::mt19937_64 rng(seed + 4);
    const std::size_t cols = 300;
    std::size_t unfilled = 0;
    std::string witness;
    int done = 0;
    for (int i = 0; i < kOneSidedWindows; ++i) {
        const std::size_t start = rng() % (text.size() - cols);
        try {
            auto out = phi_noninvertible(plan, host_window(text, start, cols));
            const auto holes = out.unfilled_count();
            if (holes > 0 || out.cols() == 0) witness = "start " + std::to_string(start);
            unfilled += holes;
            done += out.cols() > 0 ? 1 : 0;
        } catch (const Error& e) {
            witness = "start " + std::to_string(start) + ": " + e.what();
        }
    }
    r.subchecks.push_back({"no unfilled cell on columns >= 0 over 100 windows", unfilled == 0 && done == kOneSidedWindows,
                           witness.empty() ? std::to_string(done) + " windows filled" : witness});
    r.seconds = clock.seconds();
    return r;
}

CriterionResult encoder_suite(std::uint64_t seed) {
    Stopwatch clock;
    CriterionResult r{5, "encoder suite", 0.0, kEncoderLimit, {}};
    auto sys = MetricSystem::circle_rotation(*named_rotation("sqrt2-1"), "sqrt2-1");
    const std::size_t levels = 3;
    auto schedule = build_schedule(sys, levels);
    auto haar = haar_measure();
    std::mt19937_64 rng(seed + 5);
    std::uniform_real_distribution<double> unit;

    QuadratureConfig cfg;
    cfg.seed = seed;
    bool monotone = true;
    double worst_small = 0.0;
    std::string witness;
    for (int i = 0; i < kPsiParameters; ++i) {
        const double t = unit(rng);
        for (std::size_t k = 0; k < levels; ++k) {
            double previous = 0.0, previous_tol = 0.0;
            bool first = true;
            for (double d : {0.1, 0.05, 0.01}) {
                cfg.d = d;
                auto est = psi_estimate(sys, schedule[k], haar, t, cfg);
                if (!first && est.value > previous + previous_tol + est.tolerance) {
                    monotone = false;
                    witness = "t=" + fmt(t) + " level " + std::to_string(k + 1);
                }
                if (d == 0.01) worst_small = std::max(worst_small, est.value);
                previous = est.value;
                previous_tol = est.tolerance;
                first = false;
            }
        }
    }
    r.subchecks.push_back({"psi decreases in d over 20 t and levels <= 3", monotone, witness});
    r.subchecks.push_back({"psi below 0.02 at d=0.01", worst_small < kPsiThreshold, "max psi " + fmt(worst_small)});

    bool equivariant = true;
    Point x = circle_point(unit(rng));
    const std::int64_t h = 16;
    for (int i = 0; i < kOrbitPoints; ++i, x = sys.apply(x)) {
        const double t = unit(rng);
        auto here = array_name(sys, schedule, t, x, levels, h);
        auto next = array_name(sys, schedule, t, sys.apply(x), levels, h);
        for (std::size_t k = 0; k < levels; ++k)
            for (std::int64_t j = -h; j < h; ++j) equivariant = equivariant && next.at(k, j) == here.at(k, j + 1);
    }
    r.subchecks.push_back({"array names shift-equivariant on 100 orbit points", equivariant, ""});

    int separated = 0;
    std::int64_t worst_n = 0;
    for (int i = 0; i < kRecoverPairs; ++i) {
        std::vector<Point> pair{circle_point(unit(rng)), circle_point(unit(rng))};
        auto rec = recoverability_check(sys, schedule, unit(rng), pair, levels, kRecoverHalfwidth);
        if (rec.separated) ++separated, worst_n = std::max(worst_n, rec.n);
    }
    r.subchecks.push_back({"recoverability separates 50 random pairs", separated == kRecoverPairs,
                           std::to_string(separated) + " separated, largest n " + std::to_string(worst_n)});
    r.seconds = clock.seconds();
    return r;
}

CriterionResult selector_suite(std::uint64_t seed) {
    Stopwatch clock;
    CriterionResult r{6, "selector suite", 0.0, kSelectorLimit, {}};
    auto sys = MetricSystem::circle_rotation(*named_rotation("sqrt2-1"), "sqrt2-1");
    auto schedule = build_schedule(sys, 3);
    QuadratureConfig cfg;
    cfg.d = kSelectorD;
    cfg.scheme = QuadratureConfig::Scheme::Grid;
    cfg.seed = seed;

    const std::vector<std::vector<double>> radii{
        {0.0, 0.05, 0.1, 0.15}, {0.0, 0.3, 0.6, 0.9}, {0.25, 0.5, 0.75}, {0.125, 0.375, 0.625, 0.875}};
    const std::vector<std::string> addresses{"00", "01", "10", "11"};
    std::vector<Measure> measures;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        measures.push_back(sphere_measure(schedule[0], i, radii[i], "sphere" + std::to_string(i), addresses[i]));
    }

    // The radius parameters each measure was built on must be bad.
    bool known = true;
    for (std::size_t i = 0; i < measures.size(); ++i) {
        auto bad = bad_parameters(sys, schedule[0], measures[i]);
        for (double t : radii[i]) {
            known = known && std::any_of(bad.begin(), bad.end(), [&](double b) { return std::abs(b - t) < 1e-9; });
        }
    }
    r.subchecks.push_back({"bad sets contain the construction radii", known, ""});

    try {
        auto table = selector_build(sys, schedule, measures, kSelectorStages, cfg);
        auto check = check_selector(table, sys, schedule, measures, cfg);
        r.subchecks.push_back({"base", check.base, check.witness});
        r.subchecks.push_back({"nesting", check.nesting, check.witness});
        r.subchecks.push_back({"diameters 2^(1-n)", check.diameters, check.witness});
        r.subchecks.push_back({"psi smallness", check.smallness, check.witness});
        bool avoids = true;
        std::string witness;
        for (std::size_t i = 0; i < measures.size(); ++i) {
            const double s = table.limit_value[i];
            for (const auto& fam : schedule) {
                for (double b : bad_parameters(sys, fam, measures[i])) {
                    if (std::abs(s - b) <= kBadSetGap) {
                        avoids = false;
                        witness = measures[i].name + " s=" + fmt(s);
                    }
                }
            }
        }
        r.subchecks.push_back({"every s(mu) avoids its bad set", avoids, witness});
    } catch (const Error& e) {
        r.subchecks.push_back({"selector_build", false, e.what()});
    }
    r.seconds = clock.seconds();
    return r;
}

CriterionResult simplex_suite(std::uint64_t seed) {
    Stopwatch clock;
    CriterionResult r{7, "simplex suite", 0.0, kSimplexLimit, {}};
    std::mt19937_64 rng(seed + 7);
    std::uniform_real_distribution<double> unit;
    std::exponential_distribution<double> expo;

    double worst_affine = 0.0, worst_idem = 0.0, worst_excess = -1.0;
    for (int trial = 0; trial < kSimplexInstances; ++trial) {
        const std::size_t dim = 1 + static_cast<std::size_t>(trial) % 6;
        const std::size_t count = 2 + rng() % dim;
        auto K = random_simplex(rng, dim, count, 1.0);
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < count; ++i)
            if (unit(rng) < 0.5) idx.push_back(i);
        if (idx.empty()) idx.push_back(rng() % count);
        auto F = Face::of(K, idx);
        double gap = 0.0;
        for (std::size_t v = 0; v < count; ++v) gap = std::max(gap, brute_force_gap(F.points(), K.vertex(v)));
        const double eps = gap + 0.05 * unit(rng) + 1e-9;
        auto theta = retract(K, F, eps);
        auto point = [&] {
            Vector w(static_cast<Eigen::Index>(count));
            for (auto& c : w) c = expo(rng);
            w /= w.sum();
            Vector p = Vector::Zero(static_cast<Eigen::Index>(dim));
            for (std::size_t i = 0; i < count; ++i) p += w[static_cast<Eigen::Index>(i)] * K.vertex(i);
            return p;
        };
        for (int k = 0; k < 10; ++k) {
            Vector x = point(), y = point();
            const double t = unit(rng);
            worst_affine = std::max(worst_affine,
                                    (theta.apply(t * x + (1 - t) * y) - (t * theta.apply(x) + (1 - t) * theta.apply(y))).norm());
            Vector tx = theta.apply(x);
            worst_idem = std::max(worst_idem, (theta.apply(tx) - tx).norm());
            worst_excess = std::max(worst_excess, (tx - x).norm() - eps);
        }
        worst_excess = std::max(worst_excess, theta.sup_displacement() - eps);
    }
    r.subchecks.push_back({"retract affine on 100 instances", worst_affine <= kAffineCheck, "max " + fmt(worst_affine)});
    r.subchecks.push_back({"retract idempotent on the face", worst_idem <= kAffineCheck, "max " + fmt(worst_idem)});
    r.subchecks.push_back({"retract displacement <= eps", worst_excess <= 0.0, "max excess " + fmt(worst_excess)});

    bool disjoint = true, union_kept = true;
    std::uniform_int_distribution<int> elem(0, 40), size(0, 10), count(1, 8);
    for (int trial = 0; trial < kDecomposeFamilies; ++trial) {
        std::vector<std::vector<int>> sets(static_cast<std::size_t>(count(rng)));
        std::set<int> all;
        for (auto& s : sets)
            for (int i = size(rng); i > 0; --i) s.push_back(elem(rng)), all.insert(s.back());
        auto out = decompose<int>(sets, trial % 2 ? singleton_splitter<int>() : whole_splitter<int>());
        std::set<int> seen;
        for (const auto& piece : out)
            for (int x : piece) disjoint = disjoint && seen.insert(x).second;
        union_kept = union_kept && seen == all;
    }
    r.subchecks.push_back({"decompose disjoint on 100 families", disjoint, ""});
    r.subchecks.push_back({"decompose keeps the union", union_kept, ""});

    auto K = random_simplex(rng, 5, 6, 0.1);
    try {
        auto run = glue_run(GlueState::initial(K, {{0, 1}, {2}, {3}, {4}, {5}}, EpsSchedule::parse("geometric:0.5")),
                            kGlueStages);
        std::string shifts;
        for (const auto& s : run.certificate.stages) shifts += (shifts.empty() ? "" : ",") + fmt(s.displacement);
        r.subchecks.push_back({"glue displacements < 4 eps_k", run.certificate.displacement_ok, shifts});
        r.subchecks.push_back({"glue agrees exactly on L_k", run.certificate.agreement_ok, ""});
        r.subchecks.push_back({"glue final map injective", run.certificate.injective, ""});
        r.subchecks.push_back({"glue labels preserved", run.certificate.labels_ok, ""});
        r.subchecks.push_back({"glue tail bound is 0.125", run.certificate.tail_bound == 0.125,
                               fmt(run.certificate.tail_bound)});
    } catch (const Error& e) {
        r.subchecks.push_back({"glue_run", false, e.what()});
    }
    r.seconds = clock.seconds();
    return r;
}

std::vector<CriterionResult> run_desk_suite(std::uint64_t seed,
                                            const std::function<void(const CriterionResult&)>& on_result) {
    const std::vector<CriterionResult (*)(std::uint64_t)> suites{
        marker_suite,   marker_negative_control, dense_embedding_suite, noninvertible_suite,
        encoder_suite,  selector_suite,          simplex_suite};
    std::vector<CriterionResult> out;
    for (std::size_t i = 0; i < suites.size(); ++i) {
        CriterionResult r;
        try {
            r = suites[i](seed);
        } catch (const std::exception& e) {
            r.id = static_cast<int>(i) + 1;
            r.title = "suite aborted";
            r.limit_seconds = 1.0;
            r.subchecks.push_back({"no exception", false, e.what()});
        }
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

CriterionResult end_to_end(const std::string& zdm_binary, std::uint64_t seed) {
    Stopwatch clock;
    CriterionResult r{8, "end-to-end verify-all", 0.0, kEndToEndLimit, {}};
    const std::string cmd = "\"" + zdm_binary + "\" verify-all --suite desk --seed " + std::to_string(seed) +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    r.subchecks.push_back({"verify-all --suite desk exits 0", code == 0, "exit status " + std::to_string(code)});
    r.seconds = clock.seconds();
    return r;
}

}  // namespace zdm
