#include "doctest_main.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "zdm/error.hpp"
#include "zdm/metric_encoder.hpp"

using namespace zdm;

namespace {

MetricSystem rotation() {
    return MetricSystem::circle_rotation(*named_rotation("sqrt2-1"), "sqrt2-1");
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("rotation systems") {
    auto sys = MetricSystem::from_json(
        nlohmann::json::parse(R"({"type":"circle_rotation","alpha":"sqrt2-1"})"));
    CHECK(circle_point(0).circle_value() == 0.0);
    CHECK(Point{sys.alpha()}.circle_value() == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
    auto dec = MetricSystem::from_json(
        nlohmann::json::parse(R"({"type":"circle_rotation","alpha":"0.25"})"));
    CHECK(dec.alpha() == (std::uint64_t{1} << 62));
    CHECK(kind_of([] {
              MetricSystem::from_json(
                  nlohmann::json::parse(R"({"type":"circle_rotation","alpha":"abc"})"));
          }) == ErrorKind::ParseError);

    Point x = circle_point(0.3);
    CHECK(sys.apply(sys.apply(x, 12345), -12345) == x);
    CHECK(sys.distance(circle_point(0.1), circle_point(0.9)) == doctest::Approx(0.2));
}

TEST_CASE("cover families") {
    auto sys = rotation();
    auto fam = build_cover_family(sys, 1, 4, 0.2);
    CHECK(fam.covering_radius == 0.125);
    CHECK(fam.r0 == doctest::Approx(0.1375));
    CHECK(fam.r1 == doctest::Approx(0.15));
    CHECK(fam.radius(0.5) == doctest::Approx(0.14375));
    CHECK_THROWS_AS(build_cover_family(sys, 1, 1, 0.2), Error);
    CHECK_THROWS_AS(build_cover_family(sys, 1, 4, 1.5), Error);

    auto schedule = build_schedule(sys, 3);
    CHECK(schedule[2].size() == 16);
    for (std::size_t k = 1; k < schedule.size(); ++k) CHECK(schedule[k].r1 < schedule[k - 1].r1);

    auto sym = MetricSystem::symbolic(Subshift::full_shift(), 8);
    auto cyl = build_cover_family(sym, 1, 2, 0.2);
    CHECK(cyl.covering_radius == 0.5);
    CHECK(cyl.r0 == doctest::Approx(0.55));
    CHECK(cyl.r1 == doctest::Approx(0.6));
    CHECK(schedule_size(sym, 2) == 8);
    auto fib = MetricSystem::symbolic(Subshift::fibonacci(), 8);
    CHECK(build_cover_family(fib, 2, schedule_size(fib, 2), 0.2).size() == 4);
}

TEST_CASE("labels") {
    auto sys = rotation();
    auto fam = build_cover_family(sys, 1, 4, 0.2);
    CHECK(label(sys, fam, 0.3, fam.centers[1])[1] == 0);
    CHECK(render_label(label(sys, fam, 1.0, circle_point(0.5))) == "1101");

    // A point exactly r_t away from a center lies outside that ball.
    CoverFamily exact{1, {circle_point(0.0), circle_point(0.2), circle_point(0.5)}, 0.25, 0.125, 0.375, 0};
    auto eta = label(sys, exact, 0.0, circle_point(0.125));
    CHECK(eta[0] == 1);
    CHECK(eta[1] == 0);

    CoverFamily thin{1, {circle_point(0.0), circle_point(0.5)}, 0.25, 0.01, 0.02, 0};
    CHECK(kind_of([&] { label(sys, thin, 0.0, circle_point(0.25)); }) == ErrorKind::CoverFailure);

    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        Point p{rng()};
        auto e = label(sys, fam, 0.0, p);
        CHECK(std::count(e.begin(), e.end(), 0) >= 1);
    }
}

TEST_CASE("array names follow the orbit coding") {
    auto sys = rotation();
    auto schedule = build_schedule(sys, 3);
    const double t = 0.2013;
    auto name = array_name(sys, schedule, t, circle_point(0.0), 3, 40);
    const long double alpha = std::sqrt(2.0L) - 1.0L;
    int compared = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        const long double m = static_cast<long double>(schedule[k].size());
        const long double r = schedule[k].radius(t);
        for (std::int64_t j = -40; j <= 40; ++j) {
            long double x = std::fmod(static_cast<long double>(j) * alpha, 1.0L);
            if (x < 0) x += 1.0L;
            bool near_boundary = false;
            std::string expected;
            for (std::size_t i = 0; i < schedule[k].size(); ++i) {
                long double c = static_cast<long double>(i) / m;
                long double diff = std::fabs(x - c);
                diff = std::min(diff, 1.0L - diff);
                near_boundary = near_boundary || std::fabs(diff - r) < 1e-9L;
                expected += diff < r ? '0' : '1';
            }
            if (near_boundary) continue;
            CHECK(render_label(name.at(k, j)) == expected);
            ++compared;
        }
    }
    CHECK(compared > 200);

    auto single = array_name(sys, schedule, t, circle_point(0.3), 1, 0);
    CHECK(single.cells.size() == 1);
    CHECK(single.at(0, 0) == label(sys, schedule[0], t, circle_point(0.3)));
}

TEST_CASE("array names are shift equivariant") {
    auto sys = rotation();
    auto schedule = build_schedule(sys, 3);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        Point x{rng()};
        const double t = static_cast<double>(rng() % 1000) / 1000.0;
        auto a = array_name(sys, schedule, t, x, 3, 10);
        auto b = array_name(sys, schedule, t, sys.apply(x), 3, 10);
        for (std::size_t k = 0; k < 3; ++k)
            for (std::int64_t j = -10; j < 10; ++j) CHECK(b.at(k, j) == a.at(k, j + 1));
    }
}

TEST_CASE("boundary mass estimates") {
    auto sys = rotation();
    auto schedule = build_schedule(sys, 3);
    auto haar = haar_measure();
    QuadratureConfig cfg;
    cfg.samples = 20000;

    for (std::size_t k = 0; k < 3; ++k) {
        const auto& fam = schedule[k];
        for (double t : {0.0, 0.37, 1.0}) {
            double previous = 2.0;
            for (double d : {0.1, 0.05, 0.01}) {
                cfg.d = d;
                auto est = psi_estimate(sys, fam, haar, t, cfg);
                CHECK(est.value <= previous);
                previous = est.value;
                // Tents of half-width d at 2m separated peaks have area 2 m d.
                const double peaks_apart = std::abs(0.5 / fam.size() - fam.radius(t)) * 2.0;
                if (peaks_apart > 2 * d) {
                    const double exact = 2.0 * static_cast<double>(fam.size()) * d;
                    CHECK(std::abs(est.value - exact) <= est.tolerance);
                    REQUIRE(est.cross_check);
                    CHECK(std::abs(*est.cross_check - exact) <= 4.0 * fam.size() * 0.5 / cfg.samples + 1e-12);
                }
            }
        }
    }

    cfg.d = 0.01;
    const auto& fam = schedule[0];
    Measure at_center{Measure::Kind::Atomic, "delta", "", {{fam.centers[0], 1.0}}};
    CHECK(psi_estimate(sys, fam, at_center, 0.5, cfg).value == 0.0);

    auto sphere = sphere_measure(fam, 0, {0.4}, "sphere", "");
    for (double d : {0.1, 0.01, 0.001}) {
        cfg.d = d;
        CHECK(psi_estimate(sys, fam, sphere, 0.4, cfg).value >= 1.0 - 1e-9);
        CHECK(psi_estimate(sys, fam, sphere, 0.9, cfg).value <= std::max(0.0, 1.0 - 0.5 * (fam.r1 - fam.r0) / d) + 1e-12);
    }

    cfg.samples = 100;
    cfg.budget = 50;
    CHECK(kind_of([&] { psi_estimate(sys, fam, haar, 0.5, cfg); }) ==
          ErrorKind::QuadratureBudgetExceeded);
}

TEST_CASE("piece bounds dominate pointwise estimates") {
    auto sys = rotation();
    auto schedule = build_schedule(sys, 2);
    QuadratureConfig cfg;
    cfg.d = 0.005;
    cfg.samples = 5000;
    auto sphere = sphere_measure(schedule[0], 1, {0.2, 0.21, 0.7}, "s", "");
    for (const auto& mu : {haar_measure(), sphere}) {
        for (double lo : {0.0, 0.19, 0.5}) {
            const double hi = lo + 0.05;
            auto bound = psi_piece_bound(sys, schedule[0], mu, lo, hi, cfg);
            for (double t = lo; t <= hi; t += 0.005) {
                auto est = psi_estimate(sys, schedule[0], mu, t, cfg);
                CHECK(est.value <= bound.value + 1e-12);
            }
        }
    }
}

TEST_CASE("upper semicontinuity surrogate") {
    auto sys = rotation();
    auto fam = build_cover_family(sys, 1, 4, 0.2);
    QuadratureConfig cfg;
    cfg.d = 0.01;
    cfg.samples = 5000;
    auto sphere = sphere_measure(fam, 0, {0.3}, "s", "");
    for (const auto& mu : {haar_measure(), sphere}) {
        for (double t : {0.1, 0.3, 0.6}) {
            const auto at = psi_estimate(sys, fam, mu, t, cfg);
            double limsup = 0.0;
            for (double delta : {1e-4, 1e-5, 1e-6}) {
                double local = 0.0;
                for (double s : {-delta, delta}) {
                    local = std::max(local, psi_estimate(sys, fam, mu, t + s, cfg).value);
                }
                limsup = local;
            }
            CHECK(limsup <= at.value + 2 * at.tolerance + 1e-4);
        }
    }
}

TEST_CASE("star discrepancy") {
    CHECK(star_discrepancy({0.5}) == 0.5);
    std::vector<double> grid;
    for (int j = 0; j < 100; ++j) grid.push_back((j + 0.5) / 100.0);
    CHECK(star_discrepancy(grid) == doctest::Approx(0.005));
}

TEST_CASE("cantor cylinders and stage depths") {
    CHECK(CantorCylinder{""}.left() == 0.0);
    CHECK(CantorCylinder{"1"}.left() == doctest::Approx(2.0 / 3.0));
    CHECK(CantorCylinder{"01"}.left() == doctest::Approx(2.0 / 9.0));
    CHECK(CantorCylinder{"01"}.diameter() == doctest::Approx(1.0 / 9.0));
    CHECK(CantorCylinder{"0"}.contains(CantorCylinder{"01"}));
    CHECK_FALSE(CantorCylinder{"1"}.contains(CantorCylinder{"01"}));
    const std::size_t expected[] = {0, 1, 2, 2, 3, 4};
    for (std::size_t n = 1; n <= 6; ++n) CHECK(stage_depth(n) == expected[n - 1]);
}

TEST_CASE("selector") {
    auto sys = rotation();
    auto schedule = build_schedule(sys, 3);
    QuadratureConfig cfg;
    cfg.d = 1e-4;
    cfg.samples = 20000;
    cfg.scheme = QuadratureConfig::Scheme::Grid;

    SUBCASE("single haar measure picks the leftmost address") {
        std::vector<Measure> one{haar_measure("lebesgue", "0")};
        auto table = selector_build(sys, schedule, one, 6, cfg);
        CHECK(table.limit_value[0] == 0.0);
        CHECK(check_selector(table, sys, schedule, one, cfg).passed());
    }
    SUBCASE("n_max = 1") {
        std::vector<Measure> one{haar_measure("lebesgue", "")};
        auto table = selector_build(sys, schedule, one, 1, cfg);
        REQUIRE(table.stages.size() == 1);
        CHECK(table.stages[0].pieces[0].cylinder.bits.empty());
        CHECK(check_selector(table, sys, schedule, one, cfg).passed());
    }
    SUBCASE("atoms on spheres") {
        cfg.d = 1e-6;
        std::vector<Measure> ms{
            sphere_measure(schedule[0], 0, {0.0, 0.05, 0.1, 0.15}, "a", "00"),
            sphere_measure(schedule[0], 1, {0.0, 0.3, 0.6, 0.9}, "b", "01"),
        };
        auto table = selector_build(sys, schedule, ms, 6, cfg);
        auto check = check_selector(table, sys, schedule, ms, cfg);
        CHECK(check.passed());
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const double s = table.limit_value[i];
            for (std::size_t k = 0; k < schedule.size(); ++k) {
                for (double bad : bad_parameters(sys, schedule[k], ms[i])) {
                    CHECK(std::abs(s - bad) > 1e-9);
                }
                CHECK(psi_estimate(sys, schedule[k], ms[i], s, cfg).value == 0.0);
            }
        }
        // The first measure's bad parameters include the leftmost address.
        auto bad0 = bad_parameters(sys, schedule[0], ms[0]);
        CHECK(bad0.front() == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(table.limit_value[0] > 0.0);
    }
    SUBCASE("tampered tables fail their check") {
        std::vector<Measure> one{haar_measure("lebesgue", "0")};
        auto table = selector_build(sys, schedule, one, 4, cfg);
        table.stages[2].pieces[0].cylinder.bits = "1";
        auto check = check_selector(table, sys, schedule, one, cfg);
        CHECK_FALSE(check.nesting);
        CHECK_FALSE(check.passed());
    }
}

TEST_CASE("recoverability") {
    auto sys = rotation();
    auto schedule = build_schedule(sys, 3);
    const double t = 0.5;
    auto far = recoverability_check(sys, schedule, t, {circle_point(0.0), circle_point(0.5)}, 3, 10);
    CHECK(far.separated);
    CHECK(far.k == 1);
    CHECK(far.n == 0);

    auto same = recoverability_check(sys, schedule, t, {circle_point(0.2), circle_point(0.2)}, 3, 50);
    CHECK_FALSE(same.separated);

    Point x = circle_point(0.123);
    auto orbit = recoverability_check(sys, schedule, t, {x, sys.apply(x)}, 3, 50);
    CHECK(orbit.separated);
}
