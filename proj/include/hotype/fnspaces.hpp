#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hotype/space.hpp"

namespace hotype {

struct DiscreteFunction {
    std::string space_id;
    std::vector<cplx> values;

    DiscreteFunction() = default;
    DiscreteFunction(const DiscreteSpace& space, std::vector<cplx> v);
    static DiscreteFunction constant(const DiscreteSpace& space, cplx c);
    static DiscreteFunction from(const DiscreteSpace& space, const std::function<cplx(const double*)>& fn);

    std::size_t size() const { return values.size(); }
    cplx operator[](std::size_t i) const { return values[i]; }
    cplx& operator[](std::size_t i) { return values[i]; }
    double sup_norm() const;
    void check(const DiscreteSpace& space) const;
};

DiscreteFunction operator+(const DiscreteFunction& a, const DiscreteFunction& b);
DiscreteFunction operator-(const DiscreteFunction& a, const DiscreteFunction& b);
DiscreteFunction operator*(const DiscreteFunction& a, const DiscreteFunction& b);
DiscreteFunction operator*(cplx s, const DiscreteFunction& a);

/// L^p(mu) norm for p in [1, inf] (p = inf gives the max).
double lp_norm(const DiscreteSpace& space, const DiscreteFunction& f, double p);

enum class FamilyKind { EuclideanMonomials, HeisenbergGraded, SphereNone };

struct PolynomialFamily {
    FamilyKind kind = FamilyKind::EuclideanMonomials;

    static PolynomialFamily for_space(const DiscreteSpace& space);
    void check(const DiscreteSpace& space, int k) const;
    /// Exponent vectors of degree <= k, graded order. Heisenberg vectors are
    /// (alpha_1..alpha_2n, alpha_0) with alpha_0 the power of t.
    std::vector<std::vector<int>> exponents(const DiscreteSpace& space, int k) const;
    /// n(i): number of basis polynomials of exact degree i.
    std::size_t degree_count(const DiscreteSpace& space, int i) const;
    /// Basis evaluated at idx, in local coordinates of the center divided by scale.
    Eigen::MatrixXd evaluate(const DiscreteSpace& space, const Point& center, int k,
                             const std::vector<std::size_t>& idx, double scale = 1.0) const;
};

std::vector<DiscreteFunction> polynomial_basis(const PolynomialFamily& family, const DiscreteSpace& space,
                                               const Point& center, int k);

/// Scale used to condition local polynomial fits on a ball.
double ball_scale(const DiscreteSpace& space, const Ball& b);

struct Witness {
    std::size_t center = 0;
    double radius = 0.0;
};

struct NormReport {
    std::string name;
    double value = 0.0;
    Witness witness;
    SampleGrid grid;
    bool upper_bound = false;
};

cplx mean_on_ball(const DiscreteSpace& space, const DiscreteFunction& f, const Ball& b);

NormReport mean_oscillation(const DiscreteSpace& space, const DiscreteFunction& f, double r,
                            const SampleGrid& grid);
NormReport mean_oscillation(const DiscreteSpace& space, const DiscreteFunction& f, double r);

NormReport bmo_norm(const DiscreteSpace& space, const DiscreteFunction& f, const SampleGrid& grid);
NormReport bmo_norm(const DiscreteSpace& space, const DiscreteFunction& f);

/// (r, M(r,f)) ascending in r.
std::vector<std::pair<double, double>> vmo_profile(const DiscreteSpace& space, const DiscreteFunction& f,
                                                   const SampleGrid& grid);
std::vector<std::pair<double, double>> vmo_profile(const DiscreteSpace& space, const DiscreteFunction& f);

struct PairSpec {
    std::size_t max_pairs = 200000;
    std::uint64_t seed = 23;
    double min_factor = 4.0;  // pairs closer than min_factor * min distance are skipped
};

NormReport lipschitz_norm(const DiscreteSpace& space, const DiscreteFunction& f, double beta,
                          const PairSpec& pairs = {});

NormReport campanato_norm(const DiscreteSpace& space, const PolynomialFamily& family, const DiscreteFunction& f,
                          double alpha, int k, double q, const SampleGrid& grid);
NormReport campanato_norm(const DiscreteSpace& space, const PolynomialFamily& family, const DiscreteFunction& f,
                          double alpha, int k, double q);

/// k = 0 quotient with the ball mean in place of the infimum.
NormReport campanato_mean_norm(const DiscreteSpace& space, const DiscreteFunction& f, double alpha, double q,
                               const SampleGrid& grid);

/// inf over polynomials of degree <= k of (avg_B |f - p|^q)^{1/q}; q = inf allowed.
double local_poly_error(const DiscreteSpace& space, const PolynomialFamily& family, const DiscreteFunction& f,
                        const Ball& b, int k, double q);

DiscreteFunction sharp_maximal(const DiscreteSpace& space, const DiscreteFunction& f, const SampleGrid& grid);
DiscreteFunction sharp_maximal(const DiscreteSpace& space, const DiscreteFunction& f);
DiscreteFunction q_maximal(const DiscreteSpace& space, const DiscreteFunction& f, double q, const SampleGrid& grid);
DiscreteFunction q_maximal(const DiscreteSpace& space, const DiscreteFunction& f, double q);

/// Smallest C with |m_B f| <= C ||f||_* log(C / mu(B)) over sampled balls of radius <= rmax.
double log_mean_constant(const DiscreteSpace& space, const DiscreteFunction& f, const SampleGrid& grid,
                         double bmo, double rmax = 1.0);

/// max over sampled balls and 1 <= k <= kmax of |m_{2^k B} - m_B| / (||f||_* k).
double dyadic_mean_drift(const DiscreteSpace& space, const DiscreteFunction& f, const SampleGrid& grid,
                         double bmo, int kmax = 5);

}  // namespace hotype
