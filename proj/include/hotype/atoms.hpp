#pragma once

#include <string>
#include <vector>

#include "hotype/fnspaces.hpp"

namespace hotype {

struct MomentSpec {
    double p = 1.0;
    double gamma = 1.0;
    int k = 0;
    double alpha = 0.0;
    double beta = 1.0;           // smoothness exponent used for the hypothesis flag
    bool hypothesis_ok = true;   // gamma * alpha <= beta
};

MomentSpec moment_spec(double p, double gamma, double beta = 1.0);

enum class AtomKind { SupNormalized, L2Normalized };
/// Uniform: iid uniform values. Smooth: random Legendre combination in the
/// ball's normalized local coordinates.
enum class AtomProfile { Uniform, Smooth };

std::string to_string(AtomKind k);
std::string to_string(AtomProfile p);

struct Atom {
    DiscreteFunction function;
    Ball ball;
    MomentSpec spec;
    AtomKind kind = AtomKind::SupNormalized;
    AtomProfile profile = AtomProfile::Uniform;
    std::uint64_t seed = 0;
    std::vector<double> moment_residuals;
};

Atom make_atom(const DiscreteSpace& space, const PolynomialFamily& family, const Ball& ball, const MomentSpec& spec,
               AtomKind kind, std::uint64_t seed, AtomProfile profile = AtomProfile::Uniform);

struct AtomCheck {
    bool support = false;
    bool size = false;
    bool moments = false;
    double outside_max = 0.0;     // largest |a| outside the ball
    double size_slack = 0.0;      // measured size / allowed size
    double moment_slack = 0.0;    // worst residual / tolerance
    std::vector<double> residuals;
    bool pass() const { return support && size && moments; }
};

AtomCheck verify_atom(const DiscreteSpace& space, const PolynomialFamily& family, const Atom& a);
/// Re-check with a different size normalization (p-atom as a (p,2)-atom).
AtomCheck verify_atom_as(const DiscreteSpace& space, const PolynomialFamily& family, const Atom& a, AtomKind kind);

/// Moment residuals for an explicit basis matrix on the ball (rows = members).
std::vector<double> moment_residuals(const DiscreteSpace& space, const Atom& a, const Eigen::MatrixXd& basis);

cplx pairing(const DiscreteSpace& space, const DiscreteFunction& f, const Atom& a);

struct EnsembleSpec {
    std::size_t num_atoms = 200;
    std::uint64_t seed = 1;
    std::vector<double> scales;           // radii; empty means the resolved dyadic grid
    std::vector<std::size_t> centers;     // empty means uniformly sampled
    AtomKind kind = AtomKind::SupNormalized;
    AtomProfile profile = AtomProfile::Uniform;
    std::size_t min_points_factor = 2;    // ball needs >= factor*(dim span)+1 points
};

struct Ensemble {
    std::vector<Atom> atoms;
    std::vector<std::size_t> scale_index;  // per atom
    std::vector<double> scales;
    std::size_t rejected = 0;
};

/// Atom seeds derive from (master, center, scale index), so the ensemble is
/// independent of generation order.
Ensemble atom_ensemble(const DiscreteSpace& space, const PolynomialFamily& family, const MomentSpec& spec,
                       const EnsembleSpec& es);

struct ScaleRow {
    double scale = 0.0;
    double max_ratio = 0.0;
    double running_sup = 0.0;  // sup over this and all coarser scales
    std::size_t count = 0;
};

struct DualityReport {
    double sup_ratio = 0.0;
    double campanato = 0.0;
    bool raw = false;                 // campanato norm vanished: ratios are raw pairings
    double max_raw_pairing = 0.0;
    double max_scaled_pairing = 0.0;  // |pairing| / (||f||_inf mu(B)^{1-1/p})
    std::vector<ScaleRow> per_scale;  // ascending scale
    double slope = 0.0;               // log running sup against log scale
    double raw_slope = 0.0;           // log per-scale max against log scale
    std::size_t atoms = 0;
};

DualityReport duality_experiment(const DiscreteSpace& space, const PolynomialFamily& family, const DiscreteFunction& f,
                                 const MomentSpec& spec, std::size_t num_atoms, std::uint64_t seed,
                                 const SampleGrid* grid = nullptr, const EnsembleSpec* ens = nullptr);

struct DecompositionUpperBound {
    std::vector<double> lambdas;
    std::vector<Atom> atoms;
    double value = 0.0;
    double remainder = 0.0;  // relative L2
    bool converged = false;
};

DecompositionUpperBound decomposition_upper_bound(const DiscreteSpace& space, const PolynomialFamily& family,
                                                  const DiscreteFunction& f, const MomentSpec& spec,
                                                  const std::vector<Ball>& ball_family);

}  // namespace hotype
