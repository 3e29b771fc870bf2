#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "gen.hpp"
#include "hotype/fnspaces.hpp"

using namespace hotype;

namespace {

double brute_oscillation(const DiscreteSpace& s, const DiscreteFunction& f, const Ball& b) {
    cplx m = 0;
    for (auto i : b.members) m += f[i] * s.weight(i);
    m /= b.measure;
    double acc = 0;
    for (auto i : b.members) acc += std::abs(f[i] - m) * s.weight(i);
    return acc / b.measure;
}

// weighted least squares in plain monomials, solved by normal equations
double brute_poly_l2(const DiscreteSpace& s, const DiscreteFunction& f, const Ball& b, int k) {
    const std::size_t n = b.members.size();
    const double x0 = s.coords(b.center)[0];
    Eigen::MatrixXd V(n, k + 1);
    Eigen::VectorXd y(n), w(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double x = s.coords(b.members[r])[0] - x0;
        for (int j = 0; j <= k; ++j) V(r, j) = std::pow(x, j);
        y(r) = f[b.members[r]].real();
        w(r) = s.weight(b.members[r]);
    }
    const Eigen::MatrixXd G = V.transpose() * w.asDiagonal() * V;
    const Eigen::VectorXd c = G.ldlt().solve(V.transpose() * w.asDiagonal() * y);
    const Eigen::VectorXd res = y - V * c;
    return std::sqrt(res.cwiseProduct(res).dot(w) / w.sum());
}

}  // namespace

TEST_CASE("lp norms against direct sums") {
    const auto s = build_grid_space(1, 1.0, 201);
    const auto f = DiscreteFunction::from(s, [](const double* x) { return cplx(x[0], 0.5); });
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        double acc = 0;
        for (std::size_t i = 0; i < s.size(); ++i) acc += std::pow(std::abs(f[i]), p) * s.weight(i);
        CHECK(lp_norm(s, f, p) == doctest::Approx(std::pow(acc, 1 / p)).epsilon(1e-12));
    }
    CHECK(lp_norm(s, f, INFINITY) == doctest::Approx(std::abs(cplx(s.coords(200)[0], 0.5))));
}

TEST_CASE("mean oscillation equals the brute-force ball average") {
    const auto s = build_grid_space(1, 1.0, 401);
    const auto f = DiscreteFunction::from(s, [](const double* x) { return cplx(std::abs(x[0]) < 0.3 ? 1.0 : x[0]); });
    GridSpec gs;
    gs.num_centers = 12;
    const auto g = sample_grid(s, gs);
    const double r = g.radii[g.radii.size() / 2];
    const auto rep = mean_oscillation(s, f, r, g);
    double want = 0;
    for (auto c : g.centers) want = std::max(want, brute_oscillation(s, f, ball(s, c, r)));
    CHECK(rep.value == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("BMO seminorm is invariant under constants and homogeneous") {
    const auto s = build_grid_space(1, 1.0, 301);
    for (std::uint64_t t = 0; t < 5; ++t) {
        auto r = gen::stream(20, t);
        const double a = r.uniform(-3, 3), w = r.uniform(1, 6);
        const auto f = DiscreteFunction::from(s, [w](const double* x) { return cplx(std::sin(w * x[0])); });
        const auto g = sample_grid(s);
        const double b0 = bmo_norm(s, f, g).value;
        CHECK(bmo_norm(s, f + DiscreteFunction::constant(s, a), g).value == doctest::Approx(b0).epsilon(1e-10));
        CHECK(bmo_norm(s, cplx(a) * f, g).value == doctest::Approx(std::abs(a) * b0).epsilon(1e-10));
    }
    CHECK(bmo_norm(s, DiscreteFunction::constant(s, 2.0)).value < 1e-14);
}

TEST_CASE("local polynomial L2 error matches an unconditioned least-squares fit") {
    const auto s = build_grid_space(1, 1.0, 401);
    const auto fam = PolynomialFamily::for_space(s);
    const auto f = DiscreteFunction::from(s, [](const double* x) { return cplx(std::exp(x[0]) * std::cos(3 * x[0])); });
    for (std::uint64_t t = 0; t < 20; ++t) {
        auto r = gen::stream(21, t);
        const Ball b = ball(s, r.below(s.size()), r.uniform(0.05, 0.8));
        const int k = int(r.below(3));
        CHECK(local_poly_error(s, fam, f, b, k, 2.0) == doctest::Approx(brute_poly_l2(s, f, b, k)).epsilon(1e-6));
    }
}

TEST_CASE("Campanato seminorm annihilates polynomials and sees their degree") {
    const auto s = build_grid_space(1, 1.0, 401);
    const auto fam = PolynomialFamily::for_space(s);
    const auto quad = DiscreteFunction::from(s, [](const double* x) { return cplx(1 - 2 * x[0] + 3 * x[0] * x[0]); });
    CHECK(campanato_norm(s, fam, quad, 1.0, 2, 2.0).value < 1e-9);
    CHECK(campanato_norm(s, fam, quad, 1.0, 1, 2.0).value > 1e-3);
}

TEST_CASE("Lipschitz norm of a linear function is its slope") {
    const auto s = build_grid_space(1, 1.0, 301);
    const auto f = DiscreteFunction::from(s, [](const double* x) { return cplx(2.5 * x[0]); });
    CHECK(lipschitz_norm(s, f, 1.0).value == doctest::Approx(2.5).epsilon(1e-12));
    PairSpec few;
    few.max_pairs = 1000;
    CHECK(lipschitz_norm(s, f, 1.0, few).value == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("polynomial families have the graded dimension counts") {
    const auto e2 = build_grid_space(2, 1.0, 11);
    const auto fe = PolynomialFamily::for_space(e2);
    CHECK(fe.exponents(e2, 2).size() == 6);
    CHECK(fe.degree_count(e2, 2) == 3);
    const auto h = build_heisenberg_space(1, 1.0, 7);
    const auto fh = PolynomialFamily::for_space(h);
    // t has degree 2 in the graded count
    CHECK(fh.degree_count(h, 1) == 2);
    CHECK(fh.degree_count(h, 2) == 4);
    const auto sp = build_sphere_space(2, 200, 3);
    CHECK_THROWS_AS(PolynomialFamily::for_space(sp).check(sp, 1), UnsupportedFamily);
}

TEST_CASE("functions from another space are rejected") {
    const auto a = build_grid_space(1, 1.0, 101), b = build_grid_space(1, 1.0, 103);
    const auto f = DiscreteFunction::constant(a, 1.0);
    CHECK_THROWS_AS(lp_norm(b, f, 2.0), SpaceMismatch);
}
