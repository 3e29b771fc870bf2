#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "hotype/space.hpp"

using namespace hotype;

namespace {

Point random_heis(Rng& r, int n, double s) {
    Point p{SpaceKind::Heisenberg, n, gen::uniform_vec(r, 2 * n + 1, -s, s)};
    return p;
}

double heis_dist(const Point& a, const Point& b) { return heisenberg_norm(heisenberg_mul(heisenberg_inverse(b), a)); }

}  // namespace

TEST_CASE("grid space has cell-centred points and total measure of the box") {
    const auto s = build_grid_space(2, 1.0, 11);
    CHECK(s.size() == 121);
    CHECK(s.total_measure() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(s.coords(0)[0] == doctest::Approx(-1.0 + 1.0 / 11));
    CHECK(s.min_distance() == doctest::Approx(2.0 / 11));
    CHECK_THROWS_AS(build_grid_space(3, 1.0, 40, BuildOptions{1000}), BudgetExceeded);
    CHECK_THROWS_AS(s.check_index(121), IndexOutOfRange);
}

TEST_CASE("from_points validates its input") {
    CHECK_THROWS_AS(DiscreteSpace::from_points(SpaceKind::Euclidean, 1, {0.0, 0.0}, {1.0, 1.0}, {}, {}),
                    DuplicatePoint);
    CHECK_THROWS(DiscreteSpace::from_points(SpaceKind::Euclidean, 1, {0.0, 1.0}, {1.0, -1.0}, {}, {}));
    CHECK_THROWS(DiscreteSpace::from_points(SpaceKind::Euclidean, 2, {0.0, 1.0, 2.0}, {1.0, 1.0}, {}, {}));
}

TEST_CASE("ball and radial order agree with a brute-force count") {
    const auto s = build_grid_space(2, 1.0, 15);
    for (std::uint64_t t = 0; t < 40; ++t) {
        auto r = gen::stream(10, t);
        const std::size_t c = r.below(s.size());
        const double rad = r.uniform(0.05, 2.5);
        std::vector<std::size_t> want;
        double mu = 0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double dx = s.coords(j)[0] - s.coords(c)[0], dy = s.coords(j)[1] - s.coords(c)[1];
            if (std::sqrt(dx * dx + dy * dy) < rad) {
                want.push_back(j);
                mu += s.weight(j);
            }
        }
        const Ball b = ball(s, c, rad);
        CHECK(b.members == want);
        CHECK(b.measure == doctest::Approx(mu).epsilon(1e-12));
        const Ball b2 = radial_order(s, c).ball(rad);
        CHECK(b2.members == want);
    }
}

TEST_CASE("Heisenberg group law: associativity, inverse, homogeneous gauge") {
    for (std::uint64_t t = 0; t < 100; ++t) {
        auto r = gen::stream(11, t);
        const Point a = random_heis(r, 1, 2), b = random_heis(r, 1, 2), c = random_heis(r, 1, 2);
        const Point l = heisenberg_mul(heisenberg_mul(a, b), c), rr = heisenberg_mul(a, heisenberg_mul(b, c));
        for (int k = 0; k < 3; ++k) CHECK(l.coords[k] == doctest::Approx(rr.coords[k]).epsilon(1e-12));
        const Point e = heisenberg_mul(a, heisenberg_inverse(a));
        for (double x : e.coords) CHECK(std::abs(x) < 1e-12);
        const double lam = r.uniform(0.1, 5);
        CHECK(heisenberg_norm(heisenberg_dilate(a, lam)) == doctest::Approx(lam * heisenberg_norm(a)).epsilon(1e-12));
        CHECK(heisenberg_norm(heisenberg_inverse(a)) == doctest::Approx(heisenberg_norm(a)).epsilon(1e-12));
        // left invariance of the gauge distance
        CHECK(heis_dist(heisenberg_mul(c, a), heisenberg_mul(c, b)) == doctest::Approx(heis_dist(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("gauge distance obeys a quasi-triangle inequality with the stored constant") {
    const auto s = build_heisenberg_space(1, 1.0, 9);
    const auto q = quasi_triangle(s, 5000, 3);
    CHECK(q.triples > 0);
    CHECK(q.constant <= s.constants().A * (1 + 1e-12));
    CHECK(q.constant >= 1.0);
}

TEST_CASE("sphere points are unit vectors with uniform weights") {
    const auto s = build_sphere_space(2, 500, 7);
    CHECK(s.size() == 500);
    CHECK(s.total_measure() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < s.size(); ++i) {
        double n2 = 0;
        for (int k = 0; k < 4; ++k) n2 += s.coords(i)[k] * s.coords(i)[k];
        CHECK(n2 == doctest::Approx(1.0).epsilon(1e-14));
    }
    const auto lat = build_sphere_lattice(4, 6);
    CHECK(lat.size() == 4 * 6 * 6);
}

TEST_CASE("model ball measure on the line is 2r") {
    const auto s = build_grid_space(1, 1.0, 101);
    REQUIRE(s.has_model_measure());
    CHECK(s.model_ball_measure(0.3) == doctest::Approx(0.6));
}

TEST_CASE("Vitali cover: selected balls are disjoint and their dilates cover") {
    const auto s = build_grid_space(2, 1.0, 21);
    for (std::uint64_t t = 0; t < 10; ++t) {
        auto r = gen::stream(12, t);
        std::vector<Ball> balls;
        for (int k = 0; k < 30; ++k) balls.push_back(ball(s, r.below(s.size()), r.uniform(0.1, 0.6)));
        const auto cov = vitali_cover(s, balls);
        CHECK(cov.disjoint);
        CHECK(cov.covers);
        for (std::size_t i = 0; i < cov.selected.size(); ++i)
            for (std::size_t j = i + 1; j < cov.selected.size(); ++j) {
                std::vector<std::size_t> both;
                std::set_intersection(cov.selected[i].members.begin(), cov.selected[i].members.end(),
                                      cov.selected[j].members.begin(), cov.selected[j].members.end(),
                                      std::back_inserter(both));
                CHECK(both.empty());
            }
    }
}

TEST_CASE("doubling fit recovers the grid dimension") {
    const auto s1 = build_grid_space(1, 1.0, 2001);
    const auto d1 = doubling_report(s1, 40, 1);
    CHECK(std::isfinite(d1.K_est));
    CHECK(d1.gamma_fit == doctest::Approx(1.0).epsilon(0.15));
    const auto s2 = build_grid_space(2, 1.0, 61);
    CHECK(doubling_report(s2, 40, 1).gamma_fit == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("engulfing holds on the grid with c = 3") {
    const auto s = build_grid_space(1, 1.0, 301);
    const auto e = check_engulfing(s, 500, 9);
    CHECK(e.pairs > 0);
    CHECK(e.violations == 0);
}

TEST_CASE("normalized metric makes ball measure grow like r^gamma") {
    const auto s = build_grid_space(1, 1.0, 801);
    const auto n = normalize_metric(s, 1.0);
    CHECK(n.metric().normalized);
    CHECK(n.hash() != s.hash());
    std::vector<std::size_t> centers = {200, 400, 600};
    CHECK(fit_growth_exponent(n, centers, 0.02, 0.3) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(n.constants().c >= 3.0);
}

TEST_CASE("space hash is a function of the content") {
    const auto a = build_grid_space(1, 1.0, 101), b = build_grid_space(1, 1.0, 101), c = build_grid_space(1, 1.0, 103);
    CHECK(a.id() == b.id());
    CHECK(a.id() != c.id());
}

TEST_CASE("integral bound ratio matches a direct double sum") {
    const auto s = build_grid_space(1, 1.0, 201);
    for (std::uint64_t t = 0; t < 10; ++t) {
        auto r = gen::stream(13, t);
        const std::size_t x0 = r.below(s.size());
        const double tt = r.uniform(0.05, 0.3), sx = r.uniform(1.2, 3.0);
        double acc = 0;
        for (std::size_t x = 0; x < s.size(); ++x) {
            if (std::abs(s.coords(x)[0] - s.coords(x0)[0]) < tt) continue;
            double mu = 0;
            for (std::size_t y = 0; y < s.size(); ++y)
                if (std::abs(s.coords(y)[0] - s.coords(x)[0]) < tt) mu += s.weight(y);
            acc += std::pow(mu, -sx) * s.weight(x);
        }
        const double want = acc / std::pow(ball(s, x0, tt).measure, 1 - sx);
        CHECK(integral_bound_ratio(s, sx, tt, x0) == doctest::Approx(want).epsilon(1e-10));
    }
}
