#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "hotype/atoms.hpp"

using namespace hotype;

TEST_CASE("moment order follows floor(gamma (1/p - 1))") {
    CHECK(moment_spec(1.0, 1.0).k == 0);
    CHECK(moment_spec(0.5, 1.0).k == 1);
    CHECK(moment_spec(0.45, 1.0).k == 1);
    CHECK(moment_spec(0.3, 1.0).k == 2);
    CHECK(moment_spec(1.0, 4.0).k == 0);
    // alpha + k / gamma is the Campanato exponent 1/p - 1
    for (double p : {1.0, 0.7, 0.5, 0.45, 0.3})
        for (double g : {1.0, 2.0, 4.0}) {
            const auto s = moment_spec(p, g);
            CHECK(s.alpha >= 0);
            CHECK(s.alpha + s.k / g == doctest::Approx(1 / p - 1));
        }
}

TEST_CASE("atoms are supported on their ball, sized and annihilate polynomials") {
    const auto s = build_grid_space(1, 1.0, 1001);
    const auto fam = PolynomialFamily::for_space(s);
    for (double p : {1.0, 0.5, 0.45, 0.3}) {
        const auto spec = moment_spec(p, 1.0);
        for (std::uint64_t t = 0; t < 10; ++t) {
            auto r = gen::stream(30, t);
            const Ball b = ball(s, r.below(s.size()), r.uniform(0.02, 0.5));
            for (auto kind : {AtomKind::SupNormalized, AtomKind::L2Normalized})
                for (auto prof : {AtomProfile::Uniform, AtomProfile::Smooth}) {
                    const Atom a = make_atom(s, fam, b, spec, kind, r.next_u64(), prof);
                    const auto chk = verify_atom(s, fam, a);
                    CHECK(chk.pass());
                    CHECK(chk.outside_max == 0.0);
                    // independent moment check in raw monomials about the ball center
                    const double x0 = s.coords(b.center)[0];
                    for (int j = 0; j <= spec.k; ++j) {
                        cplx m = 0;
                        double scale = 0;
                        for (auto i : b.members) {
                            const double u = (s.coords(i)[0] - x0) / b.radius;
                            m += a.function[i] * std::pow(u, j) * s.weight(i);
                            scale += std::abs(a.function[i]) * std::pow(std::abs(u), j) * s.weight(i);
                        }
                        CHECK(std::abs(m) <= 1e-10 * scale);
                    }
                    if (kind == AtomKind::SupNormalized) {
                        CHECK(a.function.sup_norm() <= std::pow(b.measure, -1 / p) * (1 + 1e-12));
                        CHECK(verify_atom_as(s, fam, a, AtomKind::L2Normalized).pass());
                    }
                }
        }
    }
}

TEST_CASE("too small a ball cannot carry the moments") {
    const auto s = build_grid_space(1, 1.0, 101);
    const auto fam = PolynomialFamily::for_space(s);
    const Ball b = ball(s, 50, 0.5 * s.min_distance() + 1e-9);
    CHECK_THROWS_AS(make_atom(s, fam, b, moment_spec(0.3, 1.0), AtomKind::SupNormalized, 1), DegenerateBall);
}

TEST_CASE("ensembles are reproducible and independent of the worker count") {
    const auto s = build_grid_space(1, 1.0, 501);
    const auto fam = PolynomialFamily::for_space(s);
    EnsembleSpec es;
    es.num_atoms = 60;
    es.seed = 99;
    const auto a = atom_ensemble(s, fam, moment_spec(0.5, 1.0), es);
    const auto b = atom_ensemble(s, fam, moment_spec(0.5, 1.0), es);
    REQUIRE(a.atoms.size() == 60);
    for (std::size_t i = 0; i < a.atoms.size(); ++i) CHECK(a.atoms[i].function.values == b.atoms[i].function.values);
    es.seed = 100;
    const auto c = atom_ensemble(s, fam, moment_spec(0.5, 1.0), es);
    CHECK(c.atoms[0].function.values != a.atoms[0].function.values);
}

TEST_CASE("pairing with a polynomial of degree <= k vanishes") {
    const auto s = build_grid_space(1, 1.0, 801);
    const auto fam = PolynomialFamily::for_space(s);
    const auto poly = DiscreteFunction::from(s, [](const double* x) { return cplx(3 - x[0]); });
    const auto r = duality_experiment(s, fam, poly, moment_spec(0.5, 1.0), 80, 4);
    CHECK(r.max_scaled_pairing <= 1e-10);
}

TEST_CASE("decomposition upper bound reconstructs a mean-zero function") {
    const auto s = build_grid_space(1, 1.0, 201);
    const auto fam = PolynomialFamily::for_space(s);
    const auto f = DiscreteFunction::from(s, [](const double* x) { return cplx(std::sin(M_PI * x[0])); });
    std::vector<Ball> fam_balls = {ball(s, 100, 1.2)};
    for (std::size_t c = 10; c < 200; c += 20) fam_balls.push_back(ball(s, c, 0.25));
    const auto d = decomposition_upper_bound(s, fam, f, moment_spec(1.0, 1.0), fam_balls);
    CHECK(d.converged);
    CHECK(d.remainder < 1e-8);
    CHECK(d.value > 0);
}
