#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hotype/atoms.hpp"

namespace hotype {

enum class Symmetry { Antisymmetric, Hermitian, None };
std::string to_string(Symmetry s);

using KernelFn = std::function<cplx(const DiscreteSpace&, std::size_t, std::size_t)>;

/// Off-diagonal kernel; evaluators are pure and never called with i == j.
struct Kernel {
    KernelFn evaluator;
    std::string name;
    Symmetry symmetry = Symmetry::None;
    double claimed_epsilon = 1.0;
    int claimed_order = 0;
    std::optional<SpaceKind> kind;  // required space kind, if any
    int param = 0;                  // required dimension parameter, 0 for any
    bool zero = false;

    cplx operator()(const DiscreteSpace& s, std::size_t i, std::size_t j) const { return evaluator(s, i, j); }
    void require(const DiscreteSpace& space) const;
};

Kernel kernel_zero();
Kernel kernel_constant(cplx c);
/// 1/(pi (x - y)) on the line.
Kernel kernel_hilbert();
/// 1/(x - y) on the line.
Kernel kernel_hilbert_unnormalized();
Kernel kernel_riesz(int component, int dim);
/// mu(X)^{-1} (1 - <z,w>)^{-n}.
Kernel kernel_szego_sphere(int n);
/// mu(X)^{-1} sum_{k<=degree} C(k+n-1, n-1) <z,w>^k.
Kernel kernel_szego_banded(int n, int degree);
/// |x - y|^{-s} on the line (even, no cancellation).
Kernel kernel_power(double s);
/// (1 + w(x) + w(y)) / (pi (x - y)) with w a lacunary Weierstrass sum of
/// Hoelder order 1/2; standard of order 1/2 but without first-order
/// polynomial smoothness.
Kernel kernel_rough_hilbert();

/// Kernel by name: hilbert, hilbert-unnormalized, riesz<j>, szego, szego-banded,
/// power<s>, rough-hilbert, zero.
Kernel kernel_by_name(const std::string& name, const DiscreteSpace& space);

/// mu(B(x, d(x,y))): continuum model measure when available, else discrete.
double kernel_lambda(const DiscreteSpace& space, std::size_t i, std::size_t j);

/// Dense matrix A_ij = K(i,j) tau(d_ij) w_j. tau is the hard window d >= eta
/// when taper_c <= 1, else the linear taper from 0 at eta/taper_c to 1 at eta.
Eigen::MatrixXcd kernel_matrix(const DiscreteSpace& space, const Kernel& K, double eta, double taper_c = 0.0);
Eigen::MatrixXcd pv_matrix(const DiscreteSpace& space, const Kernel& K);
DiscreteFunction apply_matrix(const DiscreteSpace& space, const Eigen::MatrixXcd& A, const DiscreteFunction& f);
/// mu-weighted adjoint W^{-1} A^H W.
Eigen::MatrixXcd weighted_adjoint(const DiscreteSpace& space, const Eigen::MatrixXcd& A);

DiscreteFunction apply_truncated(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f, double eta);
DiscreteFunction apply_pv(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f);
DiscreteFunction maximal_truncation(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f,
                                    const std::vector<double>& etas);

struct PairWitness {
    std::size_t x = 0, y = 0, xp = 0;
    double value = 0.0;
};

struct StandardKernelReport {
    double C_size = 0.0;
    double size_slope = 0.0;      // log-log slope of banded |K| lambda against d
    double C_smooth = 0.0;        // at epsilon_fit
    double epsilon_fit = 0.0;
    std::vector<double> eps_grid;
    std::vector<double> eps_slopes;  // per epsilon, slope of banded constant against log u
    bool size_ok = false;
    bool smooth_ok = false;
    bool pass = false;
    PairWitness size_witness;
    PairWitness smooth_witness;
    std::size_t pairs = 0, triples = 0;
};

StandardKernelReport standard_kernel_check(const DiscreteSpace& space, const Kernel& K, std::size_t sample_pairs,
                                           std::uint64_t seed);

struct PkKernelReport {
    int degree = 0;
    double exponent = 0.0;         // epsilon + degree
    double fitted_constant = 0.0;
    double band_slope = 0.0;       // slope of banded residual ratio against log u
    std::vector<std::pair<double, double>> bands;  // (u, max ratio), ascending u
    bool pass = false;
    PairWitness witness;
    std::size_t samples = 0;
};

/// Far-field polynomial approximability in both variables, fitted by weighted
/// Chebyshev with the value at the base point held fixed.
PkKernelReport pk_kernel_check(const DiscreteSpace& space, const PolynomialFamily& family, const Kernel& K,
                               const MomentSpec& spec, std::size_t sample_count, std::uint64_t seed);

struct WeakBoundednessReport {
    double max_ratio = 0.0;
    double slope = 0.0;      // log ratio against log r
    double log_trend = 0.0;  // ratio against log r
    double log_trend_r2 = 0.0;
    std::vector<std::pair<double, double>> per_scale;  // (r, max ratio), ascending
    bool divergent = false;
    bool pass = false;
};

WeakBoundednessReport weak_boundedness_probe(const DiscreteSpace& space, const Kernel& K, std::size_t bump_pairs,
                                             std::uint64_t seed);

/// Nonnegative C^2 bump supported on B(center, r) with a seeded smooth amplitude.
DiscreteFunction smooth_bump(const DiscreteSpace& space, std::size_t center, double r, std::uint64_t seed);

DiscreteFunction commutator_apply(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f,
                                  const DiscreteFunction& g);
DiscreteFunction commutator_apply(const DiscreteSpace& space, const Eigen::MatrixXcd& A, const DiscreteFunction& f,
                                  const DiscreteFunction& g);

/// One term sign * L(b * R(g)); an empty side is the identity and several
/// kernels compose (last applied first).
struct ToeplitzTerm {
    int sign = 1;
    std::vector<Kernel> left;
    std::vector<Kernel> right;
};

struct ToeplitzConfig {
    struct Side {
        std::vector<std::shared_ptr<const Eigen::MatrixXcd>> ops;
        std::vector<std::shared_ptr<const Eigen::MatrixXcd>> adj;  // weighted adjoints
        std::vector<std::string> names;
    };
    struct Term {
        int sign = 1;
        Side left, right;
    };
    std::string space_id;
    std::vector<Term> terms;
    double t1_residual = 0.0;  // max relative L2 size of T_1 g over the construction tests
    bool t1_zero = false;

    static ToeplitzConfig build(const DiscreteSpace& space, const std::vector<ToeplitzTerm>& terms);
    std::string describe() const;
};

ToeplitzConfig commutator_config(const DiscreteSpace& space, const Kernel& K);
/// T(b T g) - T^2(b g).
ToeplitzConfig sandwich_config(const DiscreteSpace& space, const Kernel& K);

DiscreteFunction toeplitz_apply(const DiscreteSpace& space, const ToeplitzConfig& cfg, const DiscreteFunction& b,
                                const DiscreteFunction& g);
DiscreteFunction bilinear_Bf(const DiscreteSpace& space, const ToeplitzConfig& cfg, const DiscreteFunction& f,
                             const DiscreteFunction& g);

/// <u, v> = sum u conj(v) w.
cplx inner(const DiscreteSpace& space, const DiscreteFunction& u, const DiscreteFunction& v);

struct AdjointCheck {
    double max_rel_error = 0.0;
    double mean_of_Bf = 0.0;  // |int B_f(g)| / scale, meaningful when T_1 = 0
    std::size_t samples = 0;
};
AdjointCheck adjoint_identity_check(const DiscreteSpace& space, const ToeplitzConfig& cfg, std::size_t samples,
                                    std::uint64_t seed);

DiscreteFunction vmo_approximate(const DiscreteSpace& space, const DiscreteFunction& f, double delta);

using LinearMap = std::function<DiscreteFunction(const DiscreteFunction&)>;

/// Seeded test family: modulated bumps, random signs on balls, and atoms.
std::vector<DiscreteFunction> test_family(const DiscreteSpace& space, std::size_t size, std::uint64_t seed);
/// Seeded nonnegative smooth bumps at radii between diameter/64 and diameter/8.
std::vector<DiscreteFunction> bump_family(const DiscreteSpace& space, std::size_t size, std::uint64_t seed);

struct OperatorNormEstimate {
    double p = 2.0;
    double lower_bound = 0.0;
    std::size_t family_size = 0;
    std::uint64_t seed = 0;
    std::size_t witness = 0;
};

OperatorNormEstimate operator_norm_estimate(const DiscreteSpace& space, const LinearMap& T, double p,
                                            std::size_t family_size, std::uint64_t seed);
OperatorNormEstimate operator_norm_estimate(const DiscreteSpace& space, const Kernel& K, double p,
                                            std::size_t family_size, std::uint64_t seed);
OperatorNormEstimate operator_norm_estimate(const DiscreteSpace& space, const ToeplitzConfig& cfg,
                                            const DiscreteFunction& b, double p, std::size_t family_size,
                                            std::uint64_t seed);

struct TruncationReport {
    std::vector<double> etas;       // as given (descending)
    std::vector<double> estimates;  // sup ||(C_f - C_f^eta) g||_p / ||g||_p
    bool strictly_decreasing = false;
    bool reduced_30 = false;        // last <= 0.7 * first
};

TruncationReport truncation_convergence(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f,
                                        const std::vector<DiscreteFunction>& g_family,
                                        const std::vector<double>& etas, double p = 2.0);

struct HpAtomRow {
    std::size_t scale_index = 0;
    double scale = 0.0;
    double norm_pp = 0.0;    // ||T a||_p^p
    double near_pp = 0.0;    // on cB
    double far_pp = 0.0;
    double near_l2_ratio = 0.0;  // ||T a||_{L2(cB)} / ||a||_2
};

struct HpScaleRow {
    double scale = 0.0;
    double max_norm_pp = 0.0;
    double max_far_pp = 0.0;
    std::size_t count = 0;
};

struct HpReport {
    double max_norm_pp = 0.0;
    double slope = 0.0;  // log max ||Ta||_p^p against log(1/scale); positive means growth at fine scales
    std::vector<HpScaleRow> per_scale;  // ascending scale
    std::vector<HpAtomRow> atoms;
    std::size_t rejected = 0;
    double dilation_max_rel_diff = 0.0;  // ||Ta||_p^p on B(x0,4r) against the 2r atom on B(x0,8r)
    std::size_t dilation_pairs = 0;
    double near_l2_max = 0.0;
};

struct HpOptions {
    std::size_t dilation_pairs = 8;
    double near_factor = 3.0;
    std::vector<double> scales;  // empty means the resolved dyadic grid
};

HpReport hp_boundedness_suite(const DiscreteSpace& space, const PolynomialFamily& family, const Kernel& K,
                              const MomentSpec& spec, std::size_t num_atoms, std::uint64_t seed,
                              const HpOptions& opt = {});

struct RatioTable {
    std::vector<std::string> symbols;
    std::vector<double> ps;
    std::vector<std::vector<double>> ratios;  // [symbol][p]
    double constant = 0.0;                    // max entry
};

/// sup_g ||T_b g||_p / (||g||_p ||b||_*) for each symbol and p.
RatioTable commutator_table(const DiscreteSpace& space, const ToeplitzConfig& cfg,
                            const std::vector<std::pair<std::string, DiscreteFunction>>& symbols,
                            const std::vector<double>& ps, std::size_t family_size, std::uint64_t seed);

/// Named BMO test symbols on the line: log|x|, smoothed sign, and seeded random mixtures.
std::vector<std::pair<std::string, DiscreteFunction>> bmo_symbols(const DiscreteSpace& space, std::size_t random_count,
                                                                  std::uint64_t seed);

struct CompactnessReport {
    std::vector<std::size_t> ms;
    std::vector<double> tails;  // sigma_{m+1} / sigma_1
    double sigma1 = 0.0;
    bool strictly_decreasing = false;
};

/// Singular-value tails of the L2(mu) commutator matrix.
CompactnessReport compactness_tail(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f,
                                   const std::vector<std::size_t>& ms);

struct SharpControlReport {
    double C = 0.0;
    std::size_t tests = 0;
};
/// max ||g||_p / ||g^#||_p over mean-zero compactly supported test functions.
SharpControlReport sharp_maximal_control(const DiscreteSpace& space, double p, std::size_t tests, std::uint64_t seed,
                                         const SampleGrid& grid);

struct OscillationConstantReport {
    double C = 0.0;
    std::size_t samples = 0;
};
/// Fitted C in |T[(b - b_B) chi_{X\2B} g](y) - T[...](x)| <= C ||b||_* M_q g(x), y in B(x,r).
OscillationConstantReport far_oscillation_constant(const DiscreteSpace& space, const Kernel& K,
                                                   const DiscreteFunction& b, double bmo, double q,
                                                   std::size_t samples, std::uint64_t seed, const SampleGrid& grid);

enum class SzegoMode { Banded, PrincipalValue };
DiscreteFunction szego_projection(const DiscreteSpace& space, const DiscreteFunction& f,
                                  SzegoMode mode = SzegoMode::Banded, int degree = 4);

}  // namespace hotype
