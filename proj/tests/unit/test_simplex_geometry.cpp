#include "doctest_main.hpp"

#include <random>

#include "zdm/simplex_geometry.hpp"

using namespace zdm;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

// Distance from p to conv(points) by trying the affine hull of every subset.
double brute_force_distance(const std::vector<Vector>& points, const Vector& p) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = points.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> S;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) S.push_back(i);
        const auto m = static_cast<Eigen::Index>(S.size());
        Eigen::MatrixXd A(p.size() + 1, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            A.col(j).head(p.size()) = points[S[j]];
            A(p.size(), j) = 1e6;
        }
        Vector b(p.size() + 1);
        b.head(p.size()) = p;
        b[p.size()] = 1e6;
        Vector w = A.completeOrthogonalDecomposition().solve(b);
        if (w.minCoeff() < -1e-12) continue;
        Vector q = Vector::Zero(p.size());
        for (Eigen::Index j = 0; j < m; ++j) q += w[j] * points[S[j]];
        best = std::min(best, (q - p).norm());
    }
    return best;
}

FiniteSimplex random_simplex(std::mt19937_64& rng, std::size_t dim, std::size_t count, double scale = 1.0) {
    std::normal_distribution<double> gauss;
    for (;;) {
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < count; ++i) {
            Vector v(static_cast<Eigen::Index>(dim));
            for (auto& x : v) x = scale * gauss(rng);
            pts.push_back(v);
        }
        if (affinely_independent(pts, 1e-3)) return FiniteSimplex(pts);
    }
}

Vector random_weights(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e;
    Vector w(static_cast<Eigen::Index>(n));
    for (auto& x : w) x = e(rng);
    return w / w.sum();
}

Vector combine(const FiniteSimplex& K, const Vector& w) {
    Vector p = Vector::Zero(static_cast<Eigen::Index>(K.dimension()));
    for (std::size_t i = 0; i < K.size(); ++i) p += w[static_cast<Eigen::Index>(i)] * K.vertex(i);
    return p;
}

}  // namespace

TEST_CASE("barycentric coordinates") {
    FiniteSimplex tri({vec({0, 0}), vec({1, 0}), vec({0, 1})});
    Vector c = barycentric(tri, vec({1.0 / 3, 1.0 / 3}));
    for (int i = 0; i < 3; ++i) CHECK(c[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i) {
        Vector e = barycentric(tri, tri.vertex(i));
        for (std::size_t j = 0; j < 3; ++j) CHECK(e[static_cast<Eigen::Index>(j)] == doctest::Approx(i == j ? 1.0 : 0.0));
    }
    CHECK_THROWS_AS(barycentric(tri, vec({1, 1})), Error);
    FiniteSimplex seg({vec({0, 0, 0}), vec({1, 0, 0})});
    try {
        barycentric(seg, vec({0.5, 0.1, 0}));
        FAIL("expected OutsideSimplex");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OutsideSimplex);
    }
    CHECK_THROWS_AS(FiniteSimplex({vec({0, 0}), vec({1, 1}), vec({2, 2})}), Error);
}

TEST_CASE("faces compose and disjoint faces have disjoint hulls") {
    std::mt19937_64 rng(7);
    auto K = random_simplex(rng, 5, 6);
    auto F = Face::of(K, {5, 1, 3});
    CHECK(F.indices == std::vector<std::size_t>{1, 3, 5});
    auto G = F.sub({0, 2});
    CHECK(G.indices == std::vector<std::size_t>{1, 5});
    CHECK(hulls_disjoint(Face::of(K, {0, 1}), Face::of(K, {2, 3, 4})));
    CHECK_FALSE(hulls_disjoint(Face::of(K, {0, 1}), Face::of(K, {1, 2})));
    CHECK_THROWS_AS(Face::of(K, {}), Error);
    CHECK_THROWS_AS(Face::of(K, {6}), Error);
}

TEST_CASE("nearest point agrees with subset enumeration") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t dim = 1 + trial % 6;
        const std::size_t count = 1 + trial % 7;
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < count; ++i) {
            Vector v(static_cast<Eigen::Index>(dim));
            for (auto& x : v) x = gauss(rng);
            pts.push_back(v);
        }
        Vector p(static_cast<Eigen::Index>(dim));
        for (auto& x : p) x = 2.0 * gauss(rng);
        auto proj = nearest_point(pts, p);
        CHECK(proj.distance == doctest::Approx(brute_force_distance(pts, p)).epsilon(1e-9));
        CHECK(proj.weights.minCoeff() >= 0.0);
        CHECK(proj.weights.sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("retract examples") {
    FiniteSimplex K({vec({0, 0}), vec({1, 0}), vec({0.5, 0.05})});
    auto theta = retract(K, Face::of(K, {0, 1}), 0.1);
    CHECK((theta.image(2) - vec({0.5, 0})).norm() < 1e-12);
    CHECK(theta.sup_displacement() == doctest::Approx(0.05));
    CHECK(theta.image(0) == K.vertex(0));

    auto id = retract(K, Face::whole(K), 0.1);
    CHECK(id.sup_displacement() == 0.0);

    FiniteSimplex tall({vec({0, 0}), vec({1, 0}), vec({0.5, 0.2})});
    try {
        retract(tall, Face::of(tall, {0, 1}), 0.1);
        FAIL("expected NotDense");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotDense);
    }
}

TEST_CASE("retraction is affine, idempotent on the face and displacement bounded") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 1 + trial % 6;
        const std::size_t count = 2 + static_cast<std::size_t>(trial) % dim;
        auto K = random_simplex(rng, dim, count);
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < count; ++i)
            if (unit(rng) < 0.5) idx.push_back(i);
        if (idx.empty()) idx.push_back(0);
        auto F = Face::of(K, idx);
        double gap = 0.0;
        for (std::size_t v = 0; v < count; ++v) gap = std::max(gap, brute_force_distance(F.points(), K.vertex(v)));
        const double eps = gap + 0.01;
        auto theta = retract(K, F, eps);
        CHECK(theta.sup_displacement() <= eps);
        for (int k = 0; k < 10; ++k) {
            Vector x = combine(K, random_weights(rng, count));
            Vector y = combine(K, random_weights(rng, count));
            const double t = unit(rng);
            Vector lhs = theta.apply(t * x + (1 - t) * y);
            Vector rhs = t * theta.apply(x) + (1 - t) * theta.apply(y);
            CHECK((lhs - rhs).norm() < 1e-9);
            Vector tx = theta.apply(x);
            CHECK((theta.apply(tx) - tx).norm() < 1e-9);
            CHECK((tx - x).norm() <= eps + 1e-12);
        }
    }
}

TEST_CASE("decompose") {
    auto single = singleton_splitter<char>();
    CHECK(decompose<char>({{'a', 'b'}, {'b', 'c'}}, single) == std::vector<std::vector<char>>{{'a', 'b'}, {'c'}});
    CHECK(decompose<char>({{'a'}, {'b', 'c'}}, whole_splitter<char>()) ==
          std::vector<std::vector<char>>{{'a'}, {'b', 'c'}});
    CHECK(decompose<char>({{'a', 'b', 'c'}, {'b', 'c'}}, single) == std::vector<std::vector<char>>{{'a', 'b', 'c'}});

    Splitter<char> broken = [](const std::vector<char>&) { return std::vector<std::vector<char>>{{'z'}}; };
    CHECK_THROWS_AS(decompose<char>({{'a'}, {'b'}}, broken), Error);

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> elem(0, 30), size(0, 8), count(1, 6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<int>> sets(static_cast<std::size_t>(count(rng)));
        std::set<int> uni;
        for (auto& s : sets) {
            for (int i = size(rng); i > 0; --i) s.push_back(elem(rng)), uni.insert(s.back());
        }
        auto out = decompose<int>(sets, trial % 2 ? singleton_splitter<int>() : whole_splitter<int>());
        std::set<int> seen;
        for (const auto& piece : out) {
            CHECK_FALSE(piece.empty());
            bool inside_some = false;
            for (const auto& s : sets) {
                inside_some = inside_some || std::all_of(piece.begin(), piece.end(), [&](int x) {
                                  return std::find(s.begin(), s.end(), x) != s.end();
                              });
            }
            CHECK(inside_some);
            for (int x : piece) CHECK(seen.insert(x).second);
        }
        CHECK(seen == uni);
    }
}

TEST_CASE("eps schedules") {
    auto g = EpsSchedule::parse("geometric:0.5");
    CHECK(g.eps(1) == 0.5);
    CHECK(g.eps(5) == 0.03125);
    CHECK(4.0 * g.tail_after(5) == 0.125);
    auto l = EpsSchedule::parse("list:0.3,0.2,0.1");
    CHECK(l.horizon() == 3);
    CHECK(l.tail_after(1) == doctest::Approx(0.3));
    CHECK_THROWS_AS(EpsSchedule::parse("geometric:1.5"), Error);
    CHECK_THROWS_AS(EpsSchedule::parse("list:"), Error);
    CHECK_THROWS_AS(EpsSchedule::parse("harmonic:1"), Error);
}

TEST_CASE("glue runs") {
    std::mt19937_64 rng(17);
    auto K = random_simplex(rng, 5, 6, 0.1);
    auto schedule = EpsSchedule::parse("geometric:0.5");

    SUBCASE("zero stages is the identity") {
        auto run = glue_run(GlueState::initial(K, {{0, 1}, {2, 3}, {4, 5}}, schedule), 0);
        CHECK(run.certificate.stages.empty());
        CHECK(run.state.map.sup_displacement() == 0.0);
        CHECK(run.certificate.passed());
    }

    SUBCASE("one stage from stage one keeps the first face exactly") {
        auto s1 = glue_step(GlueState::initial(K, {{0, 1, 2}, {3, 4, 5}}, schedule));
        REQUIRE(s1.face.size() == 3);
        auto run = glue_run(s1, 1);
        const auto& rec = run.certificate.stages.at(0);
        CHECK(rec.eps == 0.25);
        CHECK(rec.displacement < 4 * 0.25);
        CHECK(rec.agrees_on_previous_face);
        for (auto u : s1.face) CHECK((run.state.map.image(u).array() == s1.map.image(u).array()).all());
        CHECK(run.certificate.passed());
    }

    SUBCASE("three stages over three groups") {
        auto run = glue_run(GlueState::initial(K, {{0, 1}, {2, 3}, {4, 5}}, schedule), 3);
        CHECK(run.certificate.passed());
        CHECK(run.state.complete());
        const auto& images = run.state.map.images();
        for (std::size_t a = 0; a < images.size(); ++a)
            for (std::size_t b = a + 1; b < images.size(); ++b) CHECK((images[a] - images[b]).norm() > 1e-6);
        for (std::size_t v = 0; v < K.size(); ++v) CHECK(run.state.image_labels[v] == K.label(v));
    }

    SUBCASE("five stages and the geometric tail") {
        auto run = glue_run(GlueState::initial(K, {{0, 1}, {2}, {3}, {4}, {5}}, schedule), 5);
        CHECK(run.certificate.tail_bound == 0.125);
        for (const auto& r : run.certificate.stages) {
            CHECK(r.displacement < 4 * r.eps);
            CHECK(r.alpha > 0.0);
            CHECK(r.groups_used == r.stage);
        }
        CHECK(run.certificate.passed());
        for (std::size_t k = 1; k < run.state.history.size(); ++k) {
            CHECK(run.state.history[k].groups_used >= run.state.history[k - 1].groups_used);
        }
    }

    SUBCASE("nothing left to add leaves the map alone") {
        auto done = glue_run(GlueState::initial(K, {{0, 1, 2, 3, 4, 5}}, schedule), 1).state;
        auto again = glue_step(done);
        CHECK(again.history.back().alpha == 0.0);
        CHECK(again.history.back().displacement == 0.0);
        for (std::size_t v = 0; v < K.size(); ++v)
            CHECK((again.map.image(v).array() == done.map.image(v).array()).all());
    }

    SUBCASE("coarse groups") {
        auto wide = random_simplex(rng, 3, 4, 1.0);
        auto state = GlueState::initial(wide, {{0, 1, 2, 3}}, EpsSchedule::parse("list:0.01"));
        state.subdivide = false;
        try {
            glue_step(state);
            FAIL("expected GroupTooCoarse");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::GroupTooCoarse);
        }
        state.subdivide = true;
        auto split = glue_step(state);
        CHECK(split.history.back().pieces.size() == 4);
    }

    SUBCASE("invalid groups") {
        CHECK_THROWS_AS(GlueState::initial(K, {{0, 1}, {1, 2, 3, 4, 5}}, schedule), Error);
        CHECK_THROWS_AS(GlueState::initial(K, {{0, 1}}, schedule), Error);
        CHECK_THROWS_AS(glue_run(GlueState::initial(K, {{0, 1, 2, 3, 4, 5}}, EpsSchedule::parse("list:0.5")), 2),
                        Error);
    }
}

TEST_CASE("blending the identity with itself") {
    std::mt19937_64 rng(23);
    auto K = random_simplex(rng, 3, 4);
    auto id = AffineMapOnSimplex::identity(K, 7);
    CHECK(id.ambient() == 7);
    CHECK(id.injective());
    auto state = GlueState::initial(K, {{0}, {1}, {2}, {3}}, EpsSchedule::parse("geometric:0.5"));
    // The first stage blends phi_0 = id with id; the face images are only
    // lifted into their slab coordinates.
    auto s1 = glue_step(state);
    CHECK(s1.history.back().blend_shift == 0.0);
}
