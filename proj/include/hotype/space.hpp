#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hotype/common.hpp"

namespace hotype {

enum class SpaceKind { Euclidean, Heisenberg, Sphere };

std::string to_string(SpaceKind k);
SpaceKind space_kind_from_string(const std::string& s);

/// A point of a model space. Heisenberg coords are (x_1..x_n, y_1..y_n, t);
/// sphere coords are (Re z_1, Im z_1, ..., Re z_n, Im z_n).
struct Point {
    SpaceKind kind = SpaceKind::Euclidean;
    int param = 1;  // N for Euclidean, n for Heisenberg and Sphere
    std::vector<double> coords;

    static std::size_t coord_length(SpaceKind kind, int param);
    void validate() const;
};

Point heisenberg_mul(const Point& a, const Point& b);
Point heisenberg_inverse(const Point& g);
Point heisenberg_dilate(const Point& g, double c);
double heisenberg_norm(const Point& g);

struct MetricDescriptor {
    SpaceKind base = SpaceKind::Euclidean;
    bool normalized = false;
    double gamma = 0.0;  // normalization exponent when normalized
};

struct Constants {
    double c = 3.0;      // engulfing
    double K = 2.0;      // doubling
    double gamma = 1.0;  // homogeneity exponent
    double beta = 1.0;   // metric smoothness exponent
    double A = 1.0;      // quasi-triangle constant
};

/// Builder record kept for serialization and provenance.
struct BuildInfo {
    std::string builder;
    std::map<std::string, std::string> params;
};

struct BuildOptions {
    std::size_t point_budget = 20000;
};

struct NormalizedProfile;

class DiscreteSpace {
public:
    DiscreteSpace() = default;

    /// Generic constructor; validates lengths, weights and sphere normalization.
    static DiscreteSpace from_points(SpaceKind kind, int param, std::vector<double> coords,
                                     std::vector<double> weights, Constants constants,
                                     BuildInfo info);

    SpaceKind kind() const { return metric_.base; }
    int param() const { return param_; }
    std::size_t size() const { return weights_.size(); }
    std::size_t stride() const { return stride_; }
    const double* coords(std::size_t i) const { return coords_.data() + i * stride_; }
    const std::vector<double>& all_coords() const { return coords_; }
    Point point(std::size_t i) const;
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    double total_measure() const { return total_; }

    /// Quasi-distance of the space (normalized if applied).
    double distance(std::size_t i, std::size_t j) const;
    /// Distance of the underlying model metric.
    double base_distance(std::size_t i, std::size_t j) const;
    /// Base distance from a stored point to an arbitrary point of the same kind.
    double base_distance_to(std::size_t i, const Point& p) const;

    const MetricDescriptor& metric() const { return metric_; }
    const Constants& constants() const { return constants_; }
    double diameter() const { return diameter_; }
    double min_distance() const { return min_distance_; }
    const BuildInfo& build_info() const { return info_; }
    std::uint64_t hash() const { return hash_; }
    std::string id() const { return hex64(hash_); }

    /// Ball measure in the continuum model, when the space has one
    /// (Lebesgue on R^N, Haar on H_n, normalized surface measure on the sphere).
    bool has_model_measure() const;
    double model_ball_measure(double r) const;

    DiscreteSpace with_constants(const Constants& c) const;
    DiscreteSpace with_extent(double diameter, double min_distance) const;

    std::size_t check_index(std::size_t i) const;
    /// Exact diameter and separation for up to 8000 points, sampled beyond.
    void finalize_extent();

private:
    friend DiscreteSpace normalize_metric(const DiscreteSpace&, double, std::uint64_t);
    void rehash();

    int param_ = 1;
    std::size_t stride_ = 1;
    std::vector<double> coords_;
    std::vector<double> weights_;
    double total_ = 0.0;
    MetricDescriptor metric_;
    Constants constants_;
    double diameter_ = 0.0;
    double min_distance_ = 0.0;
    BuildInfo info_;
    std::uint64_t hash_ = 0;
    std::shared_ptr<const NormalizedProfile> profile_;
};

DiscreteSpace build_grid_space(int dim, double box_halfwidth, int points_per_axis,
                               const BuildOptions& opt = {});
DiscreteSpace build_heisenberg_space(int n, double extent, int points_per_axis,
                                     const BuildOptions& opt = {});
DiscreteSpace build_sphere_space(int n, std::size_t num_points, std::uint64_t seed,
                                 const BuildOptions& opt = {});
/// Hopf-torus lattice on S^3: rings for |z_2|^2 at midpoints, phases uniform.
DiscreteSpace build_sphere_lattice(int rings, int phases, const BuildOptions& opt = {});

double quasi_distance(const DiscreteSpace& space, std::size_t i, std::size_t j);

/// d_gamma(x,y) = max(mu(B(x,d)), mu(B(y,d)))^{1/gamma}; samples the
/// quasi-triangle constant with the given seed.
DiscreteSpace normalize_metric(const DiscreteSpace& space, double gamma, std::uint64_t seed = 1);

struct Ball {
    std::size_t center = 0;
    double radius = 0.0;
    std::vector<std::size_t> members;  // sorted
    double measure = 0.0;

    bool contains(std::size_t i) const;
};

Ball ball(const DiscreteSpace& space, std::size_t center, double radius);

/// Points ordered by distance from a center; prefix gives any ball.
struct RadialOrder {
    std::size_t center = 0;
    std::vector<std::size_t> order;
    std::vector<double> dist;
    std::vector<double> cum;  // cum[k] = weight of order[0..k)

    std::size_t count_below(double r) const;
    double measure_below(double r) const { return cum[count_below(r)]; }
    Ball ball(double r) const;
};

RadialOrder radial_order(const DiscreteSpace& space, std::size_t center);

struct GridSpec {
    std::size_t num_centers = 48;
    std::uint64_t seed = 17;
    double jitter = 0.05;
    double min_factor = 4.0;
    double max_radius = 0.0;  // 0 means diameter
    double min_radius = 0.0;  // 0 means min_factor * min interpoint distance
    std::vector<std::size_t> forced_centers;
};

/// The shared sampled (center, radius) grid of all sup-over-balls quantities.
struct SampleGrid {
    std::vector<std::size_t> centers;
    std::vector<double> radii;  // descending
    GridSpec spec;
};

SampleGrid sample_grid(const DiscreteSpace& space, const GridSpec& spec = {});
std::size_t nearest_index(const DiscreteSpace& space, const Point& p);

struct CoverResult {
    std::vector<Ball> selected;
    bool disjoint = true;
    bool covers = true;
    std::size_t valence = 0;
    double dilation = 0.0;
};

CoverResult vitali_cover(const DiscreteSpace& space, const std::vector<Ball>& balls);

struct DoublingReport {
    double K_est = 0.0;
    double gamma_fit = 0.0;
    double beta_est = 0.0;
    double dilation = 2.0;
    std::vector<double> radii;
    std::size_t samples = 0;
};

DoublingReport doubling_report(const DiscreteSpace& space, std::size_t sample_count,
                               std::uint64_t seed, double dilation = 2.0);

/// Least-squares log-log slope of mu(B(x,r)) against r over [r_lo, r_hi].
double fit_growth_exponent(const DiscreteSpace& space, const std::vector<std::size_t>& centers,
                           double r_lo, double r_hi, int num_radii = 12);

struct EngulfingReport {
    std::size_t pairs = 0;
    std::size_t violations = 0;
    double c = 0.0;
};
EngulfingReport check_engulfing(const DiscreteSpace& space, std::size_t samples, std::uint64_t seed);

struct QuasiTriangleReport {
    std::size_t triples = 0;
    double constant = 0.0;  // max d(x,z)/(d(x,y)+d(y,z))
};
QuasiTriangleReport quasi_triangle(const DiscreteSpace& space, std::size_t triples, std::uint64_t seed);

/// Sum over x outside B(x0,t) of mu(B(x,t))^{-s} w_x, divided by mu(B(x0,t))^{1-s}.
double integral_bound_ratio(const DiscreteSpace& space, double s, double t, std::size_t x0);

struct IntegralBoundReport {
    double s = 0.0;
    double constant = 0.0;
    std::vector<double> radii;
    std::size_t centers = 0;
};
IntegralBoundReport integral_bound_check(const DiscreteSpace& space, double s,
                                         const std::vector<double>& radii,
                                         std::size_t num_centers, std::uint64_t seed);

struct GrowthReport {
    double eps0 = 0.0;       // min over samples of log(ratio)/(j log c)
    double upper = 0.0;      // max over samples of ratio^{1/j}
    std::size_t samples = 0;
};
GrowthReport lower_growth_check(const DiscreteSpace& space, int jmax, std::size_t num_centers,
                                std::uint64_t seed);

}  // namespace hotype
