#include "hotype/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hotype {

struct NormalizedProfile {
    double gamma = 1.0;
    std::size_t n = 0;
    std::vector<double> dist;  // row i: sorted base distances from i
    std::vector<double> cum;   // row i: n+1 prefix weights

    double measure_below(std::size_t i, double d) const {
        const double* row = dist.data() + i * n;
        const std::size_t k = std::lower_bound(row, row + n, d) - row;
        return cum[i * (n + 1) + k];
    }
};

std::string to_string(SpaceKind k) {
    switch (k) {
        case SpaceKind::Euclidean: return "euclidean";
        case SpaceKind::Heisenberg: return "heisenberg";
        case SpaceKind::Sphere: return "sphere";
    }
    return "?";
}

SpaceKind space_kind_from_string(const std::string& s) {
    if (s == "euclidean") return SpaceKind::Euclidean;
    if (s == "heisenberg") return SpaceKind::Heisenberg;
    if (s == "sphere") return SpaceKind::Sphere;
    throw FormatError("unknown space kind '" + s + "'");
}

std::size_t Point::coord_length(SpaceKind kind, int param) {
    switch (kind) {
        case SpaceKind::Euclidean: return static_cast<std::size_t>(param);
        case SpaceKind::Heisenberg: return static_cast<std::size_t>(2 * param + 1);
        case SpaceKind::Sphere: return static_cast<std::size_t>(2 * param);
    }
    return 0;
}

void Point::validate() const {
    if (param < 1) throw KindMismatch("point parameter must be positive");
    if (coords.size() != coord_length(kind, param))
        throw KindMismatch("coordinate length does not match space kind");
    if (kind == SpaceKind::Sphere) {
        double s = 0;
        for (double v : coords) s += v * v;
        if (std::abs(s - 1.0) > 1e-12) throw KindMismatch("sphere point is not a unit vector");
    }
}

static void require_heisenberg(const Point& a) {
    if (a.kind != SpaceKind::Heisenberg) throw KindMismatch("expected a Heisenberg point");
    if (a.coords.size() != Point::coord_length(a.kind, a.param))
        throw KindMismatch("coordinate length does not match space kind");
}

// Im <z, z'> with <z,w> = sum z conj(w)
static double heis_im_inner(const double* a, const double* b, int n) {
    double s = 0;
    for (int j = 0; j < n; ++j) s += a[n + j] * b[j] - a[j] * b[n + j];
    return s;
}

Point heisenberg_mul(const Point& a, const Point& b) {
    require_heisenberg(a);
    require_heisenberg(b);
    if (a.param != b.param) throw KindMismatch("Heisenberg dimension mismatch");
    const int n = a.param;
    Point r{SpaceKind::Heisenberg, n, std::vector<double>(2 * n + 1)};
    for (int j = 0; j < 2 * n; ++j) r.coords[j] = a.coords[j] + b.coords[j];
    r.coords[2 * n] = a.coords[2 * n] + b.coords[2 * n] +
                      2.0 * heis_im_inner(a.coords.data(), b.coords.data(), n);
    return r;
}

Point heisenberg_inverse(const Point& g) {
    require_heisenberg(g);
    Point r = g;
    for (double& v : r.coords) v = -v;
    return r;
}

Point heisenberg_dilate(const Point& g, double c) {
    require_heisenberg(g);
    Point r = g;
    const int n = g.param;
    for (int j = 0; j < 2 * n; ++j) r.coords[j] *= c;
    r.coords[2 * n] *= c * c;
    return r;
}

static double heis_norm_raw(const double* g, int n) {
    double z2 = 0;
    for (int j = 0; j < 2 * n; ++j) z2 += g[j] * g[j];
    const double t = g[2 * n];
    return std::pow(t * t + z2 * z2, 0.25);
}

double heisenberg_norm(const Point& g) {
    require_heisenberg(g);
    return heis_norm_raw(g.coords.data(), g.param);
}

// ||g h^{-1}|| for raw coordinate arrays
static double heis_gauge(const double* g, const double* h, int n) {
    double z2 = 0;
    for (int j = 0; j < 2 * n; ++j) {
        const double d = g[j] - h[j];
        z2 += d * d;
    }
    const double t = g[2 * n] - h[2 * n] - 2.0 * heis_im_inner(g, h, n);
    return std::pow(t * t + z2 * z2, 0.25);
}

static double raw_base_distance(SpaceKind kind, int param, const double* a, const double* b) {
    switch (kind) {
        case SpaceKind::Euclidean: {
            double s = 0;
            for (int k = 0; k < param; ++k) {
                const double d = a[k] - b[k];
                s += d * d;
            }
            return std::sqrt(s);
        }
        case SpaceKind::Heisenberg:
            return 0.5 * (heis_gauge(a, b, param) + heis_gauge(b, a, param));
        case SpaceKind::Sphere: {
            double re = 0, im = 0;
            for (int k = 0; k < param; ++k) {
                const double ar = a[2 * k], ai = a[2 * k + 1];
                const double br = b[2 * k], bi = b[2 * k + 1];
                re += ar * br + ai * bi;
                im += ai * br - ar * bi;
            }
            const double x = 1.0 - re;
            return std::pow(x * x + im * im, 0.25);
        }
    }
    return 0.0;
}

DiscreteSpace DiscreteSpace::from_points(SpaceKind kind, int param, std::vector<double> coords,
                                         std::vector<double> weights, Constants constants,
                                         BuildInfo info) {
    DiscreteSpace s;
    s.param_ = param;
    s.stride_ = Point::coord_length(kind, param);
    if (s.stride_ == 0) throw KindMismatch("invalid space parameter");
    if (coords.size() != weights.size() * s.stride_)
        throw KindMismatch("coordinate array does not match the number of weights");
    if (weights.empty()) throw Error("space must contain at least one point");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw Error("weights must be positive and finite");
    s.coords_ = std::move(coords);
    s.weights_ = std::move(weights);
    s.total_ = std::accumulate(s.weights_.begin(), s.weights_.end(), 0.0);
    s.metric_.base = kind;
    if (kind == SpaceKind::Sphere) {
        for (std::size_t i = 0; i < s.weights_.size(); ++i) {
            double* z = s.coords_.data() + i * s.stride_;
            double nrm = 0;
            for (std::size_t k = 0; k < s.stride_; ++k) nrm += z[k] * z[k];
            nrm = std::sqrt(nrm);
            if (std::abs(nrm - 1.0) > 8 * std::numeric_limits<double>::epsilon())
                for (std::size_t k = 0; k < s.stride_; ++k) z[k] /= nrm;
            s.point(i).validate();
        }
    }
    {
        std::vector<std::size_t> idx(s.weights_.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        auto row = [&](std::size_t i) { return s.coords_.begin() + i * s.stride_; };
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return std::lexicographical_compare(row(a), row(a) + s.stride_, row(b), row(b) + s.stride_);
        });
        for (std::size_t k = 1; k < idx.size(); ++k)
            if (std::equal(row(idx[k]), row(idx[k]) + s.stride_, row(idx[k - 1])))
                throw DuplicatePoint("points " + std::to_string(idx[k - 1]) + " and " + std::to_string(idx[k]) +
                                     " coincide");
    }
    s.constants_ = constants;
    s.info_ = std::move(info);
    s.rehash();
    return s;
}

Point DiscreteSpace::point(std::size_t i) const {
    check_index(i);
    return Point{metric_.base, param_, std::vector<double>(coords(i), coords(i) + stride_)};
}

std::size_t DiscreteSpace::check_index(std::size_t i) const {
    if (i >= size()) throw IndexOutOfRange("point index " + std::to_string(i) + " out of range");
    return i;
}

double DiscreteSpace::base_distance(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return raw_base_distance(metric_.base, param_, coords(i), coords(j));
}

double DiscreteSpace::base_distance_to(std::size_t i, const Point& p) const {
    if (p.kind != metric_.base || p.coords.size() != stride_) throw KindMismatch("point kind mismatch");
    return raw_base_distance(metric_.base, param_, coords(i), p.coords.data());
}

double DiscreteSpace::distance(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    const double d = raw_base_distance(metric_.base, param_, coords(i), coords(j));
    if (!profile_) return d;
    const double delta = std::max(profile_->measure_below(i, d), profile_->measure_below(j, d));
    return std::pow(delta, 1.0 / profile_->gamma);
}

double quasi_distance(const DiscreteSpace& space, std::size_t i, std::size_t j) {
    space.check_index(i);
    space.check_index(j);
    return space.distance(i, j);
}

bool DiscreteSpace::has_model_measure() const { return !metric_.normalized; }

static double unit_ball_volume(int dim) {
    return std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

// Haar volume of the unit gauge ball of H_n.
static double heisenberg_unit_volume(int n) {
    // |S^{2n-1}| * int_0^1 2 sqrt(1 - rho^4) rho^{2n-1} drho, composite Simpson
    const double sphere_area = 2.0 * std::pow(M_PI, n) / std::tgamma(n);
    const int m = 20000;
    double acc = 0;
    for (int k = 0; k <= m; ++k) {
        const double rho = static_cast<double>(k) / m;
        const double f = 2.0 * std::sqrt(std::max(0.0, 1.0 - std::pow(rho, 4))) * std::pow(rho, 2 * n - 1);
        const double wgt = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += wgt * f;
    }
    return sphere_area * acc / (3.0 * m);
}

// Normalized surface measure of {w : |1 - <z,w>| < s} on S^{2n-1}.
static double sphere_cap_measure(int n, double s) {
    if (s >= 2.0) return 1.0;
    if (n == 2) {
        const double a = s * s * std::acos(s / 2.0) + std::acos(1.0 - s * s / 2.0) -
                         0.5 * s * std::sqrt(std::max(0.0, 4.0 - s * s));
        return a / M_PI;
    }
    // lambda = <w,z> has density (n-1)/pi (1-|lambda|^2)^{n-2} on the unit disk;
    // integrate over lambda = 1 - rho e^{i theta}.
    const int mr = 400, mt = 400;
    double acc = 0;
    for (int a = 0; a < mr; ++a) {
        const double rho = s * (a + 0.5) / mr;
        for (int b = 0; b < mt; ++b) {
            const double th = M_PI * ((b + 0.5) / mt - 0.5);
            const double l2 = 1.0 - 2.0 * rho * std::cos(th) + rho * rho;
            if (l2 < 1.0) acc += std::pow(1.0 - l2, n - 2) * rho;
        }
    }
    return (n - 1) / M_PI * acc * (s / mr) * (M_PI / mt);
}

double DiscreteSpace::model_ball_measure(double r) const {
    if (!has_model_measure()) throw Error("space has no continuum model measure");
    if (r <= 0) return 0.0;
    switch (metric_.base) {
        case SpaceKind::Euclidean: return unit_ball_volume(param_) * std::pow(r, param_);
        case SpaceKind::Heisenberg: {
            static thread_local std::map<int, double> cache;
            auto it = cache.find(param_);
            if (it == cache.end()) it = cache.emplace(param_, heisenberg_unit_volume(param_)).first;
            return it->second * std::pow(r, 2 * param_ + 2);
        }
        case SpaceKind::Sphere: return total_ * sphere_cap_measure(param_, r * r);
    }
    return 0.0;
}

void DiscreteSpace::rehash() {
    std::uint64_t h = fnv1a(to_string(metric_.base));
    h = fnv1a(&param_, sizeof param_, h);
    h = fnv1a(coords_.data(), coords_.size() * sizeof(double), h);
    h = fnv1a(weights_.data(), weights_.size() * sizeof(double), h);
    const int norm = metric_.normalized ? 1 : 0;
    h = fnv1a(&norm, sizeof norm, h);
    h = fnv1a(&metric_.gamma, sizeof(double), h);
    hash_ = h;
}

void DiscreteSpace::finalize_extent() {
    const std::size_t n = size();
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    if (n <= 8000) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = distance(i, j);
                dmax = std::max(dmax, d);
                dmin = std::min(dmin, d);
            }
    } else {
        Rng rng(0x5eed);
        std::vector<std::size_t> rows;
        for (int k = 0; k < 512; ++k) rows.push_back(rng.below(n));
        for (std::size_t i : rows)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) {
                    const double d = distance(i, j);
                    dmax = std::max(dmax, d);
                    dmin = std::min(dmin, d);
                }
    }
    if (n == 1) dmin = 0.0;
    if (n > 1 && !(dmin > 0.0)) throw DuplicatePoint("two stored points coincide");
    diameter_ = dmax;
    min_distance_ = dmin;
}

DiscreteSpace DiscreteSpace::with_constants(const Constants& c) const {
    DiscreteSpace s = *this;
    s.constants_ = c;
    return s;
}

DiscreteSpace DiscreteSpace::with_extent(double diameter, double min_distance) const {
    DiscreteSpace s = *this;
    s.diameter_ = diameter;
    s.min_distance_ = min_distance;
    return s;
}

static void check_budget(double count, const BuildOptions& opt) {
    if (!(count <= static_cast<double>(opt.point_budget)))
        throw BudgetExceeded("requested " + fmt_double(count) + " points exceeds the budget of " +
                             std::to_string(opt.point_budget));
}

DiscreteSpace build_grid_space(int dim, double h, int m, const BuildOptions& opt) {
    if (dim < 1) throw Error("grid dimension must be positive");
    if (m < 3) throw Error("points_per_axis must be at least 3");
    if (!(h > 0)) throw Error("box_halfwidth must be positive");
    check_budget(std::pow(static_cast<double>(m), dim), opt);
    std::size_t n = 1;
    for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(m);
    const double step = 2.0 * h / m;
    std::vector<double> coords(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = i;
        // first coordinate varies slowest
        for (int k = dim - 1; k >= 0; --k) {
            coords[i * dim + k] = -h + (static_cast<double>(r % m) + 0.5) * step;
            r /= m;
        }
    }
    std::vector<double> w(n, std::pow(step, dim));
    Constants c;
    c.c = 3.0;
    c.gamma = dim;
    c.K = std::pow(2.0, dim);
    c.beta = 1.0;
    c.A = 1.0;
    BuildInfo info{"grid", {{"dim", std::to_string(dim)}, {"box_halfwidth", fmt_double(h)},
                            {"points_per_axis", std::to_string(m)}}};
    DiscreteSpace s = DiscreteSpace::from_points(SpaceKind::Euclidean, dim, std::move(coords),
                                                 std::move(w), c, std::move(info));
    return s.with_extent((2.0 * h - step) * std::sqrt(static_cast<double>(dim)), step);
}

DiscreteSpace build_heisenberg_space(int n, double e, int m, const BuildOptions& opt) {
    if (n < 1) throw Error("Heisenberg dimension must be positive");
    if (m < 3) throw Error("points_per_axis must be at least 3");
    if (!(e > 0)) throw Error("extent must be positive");
    const int axes = 2 * n + 1;
    check_budget(std::pow(static_cast<double>(m), axes), opt);
    std::size_t count = 1;
    for (int k = 0; k < axes; ++k) count *= static_cast<std::size_t>(m);
    const double dz = 2.0 * e / m, dt = 2.0 * e * e / m;
    std::vector<double> coords(count * axes);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t r = i;
        for (int k = axes - 1; k >= 0; --k) {
            const double idx = static_cast<double>(r % m) + 0.5;
            coords[i * axes + k] = (k == 2 * n) ? -e * e + idx * dt : -e + idx * dz;
            r /= m;
        }
    }
    std::vector<double> w(count, std::pow(dz, 2 * n) * dt);
    Constants c;
    c.c = 3.0;
    c.gamma = 2.0 * (n + 1);
    c.K = std::pow(2.0, c.gamma);
    c.beta = 1.0;
    c.A = 1.0;
    BuildInfo info{"heisenberg", {{"n", std::to_string(n)}, {"extent", fmt_double(e)},
                                  {"points_per_axis", std::to_string(m)}}};
    DiscreteSpace s = DiscreteSpace::from_points(SpaceKind::Heisenberg, n, std::move(coords),
                                                 std::move(w), c, std::move(info));
    if (count <= 8000) {
        s.finalize_extent();
        return s;
    }
    // Large lattice: lower bound for the separation, sampled diameter over
    // the corner points and seeded rows.
    Rng rng(0x4e15);
    std::vector<std::size_t> rows;
    for (int k = 0; k < 512; ++k) rows.push_back(rng.below(count));
    for (int mask = 0; mask < (1 << axes); ++mask) {
        std::size_t idx = 0;
        for (int k = 0; k < axes; ++k) idx = idx * m + ((mask >> k) & 1 ? m - 1 : 0);
        rows.push_back(idx);
    }
    double dmax = 0;
    for (std::size_t i : rows)
        for (std::size_t j = 0; j < count; ++j) dmax = std::max(dmax, s.base_distance(i, j));
    return s.with_extent(dmax, std::min(dz, std::sqrt(dt)));
}

DiscreteSpace build_sphere_space(int n, std::size_t num_points, std::uint64_t seed,
                                 const BuildOptions& opt) {
    if (n < 2) throw Error("sphere dimension n must be at least 2");
    if (num_points < 100) throw Error("sphere space needs at least 100 points");
    check_budget(static_cast<double>(num_points), opt);
    Rng rng(seed);
    const std::size_t stride = 2 * n;
    std::vector<double> coords(num_points * stride);
    for (std::size_t i = 0; i < num_points; ++i) {
        double nrm = 0;
        for (std::size_t k = 0; k < stride; ++k) {
            const double v = rng.normal();
            coords[i * stride + k] = v;
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        for (std::size_t k = 0; k < stride; ++k) coords[i * stride + k] /= nrm;
    }
    std::vector<double> w(num_points, 1.0 / static_cast<double>(num_points));
    Constants c;
    c.c = 3.0;
    c.gamma = 2.0 * n;
    c.K = std::pow(2.0, c.gamma);
    c.beta = 1.0;
    c.A = 1.0;
    BuildInfo info{"sphere", {{"n", std::to_string(n)}, {"num_points", std::to_string(num_points)},
                              {"seed", std::to_string(seed)}, {"layout", "random"}}};
    DiscreteSpace s = DiscreteSpace::from_points(SpaceKind::Sphere, n, std::move(coords),
                                                 std::move(w), c, std::move(info));
    s.finalize_extent();
    return s;
}

DiscreteSpace build_sphere_lattice(int rings, int phases, const BuildOptions& opt) {
    if (rings < 1 || phases < 3) throw Error("sphere lattice needs rings >= 1 and phases >= 3");
    const std::size_t count = static_cast<std::size_t>(rings) * phases * phases;
    if (count < 100) throw Error("sphere space needs at least 100 points");
    check_budget(static_cast<double>(count), opt);
    std::vector<double> coords;
    coords.reserve(count * 4);
    for (int i = 0; i < rings; ++i) {
        const double u = (i + 0.5) / rings;
        const double r1 = std::sqrt(1.0 - u), r2 = std::sqrt(u);
        for (int a = 0; a < phases; ++a)
            for (int b = 0; b < phases; ++b) {
                const double t1 = 2.0 * M_PI * a / phases, t2 = 2.0 * M_PI * b / phases;
                coords.insert(coords.end(),
                              {r1 * std::cos(t1), r1 * std::sin(t1), r2 * std::cos(t2), r2 * std::sin(t2)});
            }
    }
    std::vector<double> w(count, 1.0 / static_cast<double>(count));
    Constants c;
    c.c = 3.0;
    c.gamma = 4.0;
    c.K = 16.0;
    c.beta = 1.0;
    c.A = 1.0;
    BuildInfo info{"sphere", {{"n", "2"}, {"num_points", std::to_string(count)}, {"layout", "hopf-lattice"},
                              {"rings", std::to_string(rings)}, {"phases", std::to_string(phases)}}};
    DiscreteSpace s = DiscreteSpace::from_points(SpaceKind::Sphere, 2, std::move(coords), std::move(w),
                                                 c, std::move(info));
    s.finalize_extent();
    return s;
}

DiscreteSpace normalize_metric(const DiscreteSpace& space, double gamma, std::uint64_t seed) {
    if (!(gamma > 0)) throw Error("normalization exponent must be positive");
    if (space.metric().normalized) throw Error("space is already normalized");
    const std::size_t n = space.size();
    if (n > 6000) throw BudgetExceeded("normalize_metric is limited to 6000 points");
    auto prof = std::make_shared<NormalizedProfile>();
    prof->gamma = gamma;
    prof->n = n;
    prof->dist.resize(n * n);
    prof->cum.resize(n * (n + 1));
    std::vector<std::size_t> idx(n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = space.base_distance(i, j);
            if (j != i && !(row[j] > 0.0)) throw DuplicatePoint("duplicate points make the measure distance degenerate");
        }
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return row[a] < row[b] || (row[a] == row[b] && a < b);
        });
        double acc = 0;
        prof->cum[i * (n + 1)] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            prof->dist[i * n + k] = row[idx[k]];
            acc += space.weight(idx[k]);
            prof->cum[i * (n + 1) + k + 1] = acc;
        }
    }
    DiscreteSpace s = space;
    s.profile_ = prof;
    s.metric_.normalized = true;
    s.metric_.gamma = gamma;
    s.info_.params["normalized_gamma"] = fmt_double(gamma);
    s.rehash();
    s.finalize_extent();
    Constants c = space.constants();
    c.gamma = gamma;
    c.A = std::max(1.0, quasi_triangle(s, 10000, seed).constant);
    c.c = std::max(3.0, c.A + 2.0 * c.A * c.A);
    s.constants_ = c;
    return s;
}

bool Ball::contains(std::size_t i) const { return std::binary_search(members.begin(), members.end(), i); }

Ball ball(const DiscreteSpace& space, std::size_t center, double radius) {
    space.check_index(center);
    if (!(radius > 0)) throw Error("ball radius must be positive");
    Ball b;
    b.center = center;
    b.radius = radius;
    for (std::size_t j = 0; j < space.size(); ++j)
        if (space.distance(center, j) < radius) {
            b.members.push_back(j);
            b.measure += space.weight(j);
        }
    return b;
}

std::size_t RadialOrder::count_below(double r) const {
    return std::lower_bound(dist.begin(), dist.end(), r) - dist.begin();
}

Ball RadialOrder::ball(double r) const {
    Ball b;
    b.center = center;
    b.radius = r;
    const std::size_t k = count_below(r);
    b.members.assign(order.begin(), order.begin() + k);
    std::sort(b.members.begin(), b.members.end());
    b.measure = cum[k];
    return b;
}

RadialOrder radial_order(const DiscreteSpace& space, std::size_t center) {
    space.check_index(center);
    const std::size_t n = space.size();
    RadialOrder ro;
    ro.center = center;
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = space.distance(center, j);
    ro.order.resize(n);
    std::iota(ro.order.begin(), ro.order.end(), 0);
    std::sort(ro.order.begin(), ro.order.end(),
              [&](std::size_t a, std::size_t b) { return d[a] < d[b] || (d[a] == d[b] && a < b); });
    ro.dist.resize(n);
    ro.cum.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        ro.dist[k] = d[ro.order[k]];
        ro.cum[k + 1] = ro.cum[k] + space.weight(ro.order[k]);
    }
    return ro;
}

static std::vector<std::size_t> sample_centers(std::size_t n, std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> out;
    if (count >= n) {
        out.resize(n);
        std::iota(out.begin(), out.end(), 0);
        return out;
    }
    // partial Fisher-Yates
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t j = k + rng.below(n - k);
        std::swap(perm[k], perm[j]);
    }
    out.assign(perm.begin(), perm.begin() + count);
    std::sort(out.begin(), out.end());
    return out;
}

SampleGrid sample_grid(const DiscreteSpace& space, const GridSpec& spec) {
    SampleGrid g;
    g.spec = spec;
    g.centers = sample_centers(space.size(), spec.num_centers, derive_seed(spec.seed, 1));
    for (std::size_t c : spec.forced_centers) {
        space.check_index(c);
        if (!std::binary_search(g.centers.begin(), g.centers.end(), c))
            g.centers.insert(std::upper_bound(g.centers.begin(), g.centers.end(), c), c);
    }
    const double rmax = spec.max_radius > 0 ? std::min(spec.max_radius, space.diameter()) : space.diameter();
    const double rmin = spec.min_radius > 0 ? spec.min_radius : spec.min_factor * space.min_distance();
    Rng rng(derive_seed(spec.seed, 2));
    for (int j = 0; j < 200; ++j) {
        const double u = rng.uniform();
        const double r = space.diameter() * std::ldexp(1.0, -j) * (1.0 - spec.jitter * u);
        if (r > rmax) continue;
        if (r < rmin) break;
        g.radii.push_back(r);
    }
    return g;
}

std::size_t nearest_index(const DiscreteSpace& space, const Point& p) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < space.size(); ++i) {
        const double d = space.base_distance_to(i, p);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

CoverResult vitali_cover(const DiscreteSpace& space, const std::vector<Ball>& balls) {
    CoverResult res;
    res.dilation = 5.0 * space.constants().c;
    if (balls.empty()) return res;
    std::vector<std::size_t> order(balls.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (balls[a].radius != balls[b].radius) return balls[a].radius > balls[b].radius;
        return balls[a].center < balls[b].center;
    });
    std::vector<char> taken(space.size(), 0);
    for (std::size_t k : order) {
        const Ball& b = balls[k];
        bool hit = false;
        for (std::size_t i : b.members)
            if (taken[i]) {
                hit = true;
                break;
            }
        if (hit) continue;
        for (std::size_t i : b.members) taken[i] = 1;
        res.selected.push_back(b);
    }
    // exact verification
    std::vector<int> owner(space.size(), 0);
    for (const Ball& b : res.selected)
        for (std::size_t i : b.members) {
            if (owner[i]) res.disjoint = false;
            owner[i] = 1;
        }
    std::vector<std::size_t> valence(space.size(), 0);
    for (const Ball& b : res.selected) {
        const double R = res.dilation * b.radius;
        for (std::size_t j = 0; j < space.size(); ++j)
            if (space.distance(b.center, j) < R) ++valence[j];
    }
    for (const Ball& b : balls)
        for (std::size_t i : b.members)
            if (valence[i] == 0) res.covers = false;
    res.valence = *std::max_element(valence.begin(), valence.end());
    return res;
}

// Smallest grid radius whose mean ball count over the centers reaches min_count.
static double count_floor(const std::vector<RadialOrder>& orders, const std::vector<double>& radii_desc,
                          double min_count) {
    double floor = radii_desc.empty() ? 0.0 : radii_desc.front();
    for (double r : radii_desc) {
        double mean = 0;
        for (const auto& ro : orders) mean += static_cast<double>(ro.count_below(r));
        mean /= static_cast<double>(orders.size());
        if (mean >= min_count)
            floor = r;
        else
            break;
    }
    return floor;
}

DoublingReport doubling_report(const DiscreteSpace& space, std::size_t sample_count, std::uint64_t seed,
                               double dilation) {
    if (sample_count < 30) throw Error("doubling_report needs at least 30 samples");
    if (!(dilation > 1.0)) throw Error("dilation must exceed 1");
    GridSpec gs;
    gs.num_centers = sample_count;
    gs.seed = seed;
    gs.min_factor = 1.0;
    SampleGrid g = sample_grid(space, gs);
    std::vector<RadialOrder> orders;
    for (std::size_t c : g.centers) orders.push_back(radial_order(space, c));
    const double floor = count_floor(orders, g.radii, 8.0);
    DoublingReport rep;
    rep.dilation = dilation;
    rep.samples = g.centers.size();
    for (double r : g.radii)
        if (r >= floor && dilation * r <= space.diameter()) rep.radii.push_back(r);
    if (rep.radii.size() < 3)
        throw ResolutionError("fewer than 3 dyadic radii are resolved in this space");
    // the growth fit uses unsaturated radii: mean ball measure at most a quarter of the total
    std::vector<double> fit_radii;
    for (double r : rep.radii) {
        double mean = 0;
        for (const auto& ro : orders) mean += ro.measure_below(r);
        if (mean / orders.size() <= 0.25 * space.total_measure()) fit_radii.push_back(r);
    }
    if (fit_radii.size() < 2) fit_radii = rep.radii;
    std::vector<double> lx, ly;
    for (const auto& ro : orders) {
        for (double r : rep.radii) rep.K_est = std::max(rep.K_est, ro.measure_below(dilation * r) / ro.measure_below(r));
        for (double r : fit_radii) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(ro.measure_below(r)));
        }
    }
    rep.gamma_fit = ls_slope(lx, ly);

    // metric smoothness: binned upper envelope of |d(x,z) - d(y,z)| against d(x,y)
    Rng rng(derive_seed(seed, 3));
    const int bins = static_cast<int>(g.radii.size());
    std::vector<double> env(bins, 0.0), envu(bins, 0.0);
    const std::size_t trials = 400 * g.centers.size();
    for (std::size_t t = 0; t < trials; ++t) {
        const auto& ro = orders[rng.below(orders.size())];
        const int b = static_cast<int>(rng.below(bins));
        const std::size_t cnt = ro.count_below(g.radii[b]);
        if (cnt < 2) continue;
        const std::size_t y = ro.order[1 + rng.below(cnt - 1)];
        const std::size_t z = rng.below(space.size());
        const std::size_t x = ro.center;
        const double u = space.distance(x, y);
        if (!(u > 0)) continue;
        const double v = std::abs(space.distance(x, z) - space.distance(y, z));
        // bin by the dyadic level of u
        int lvl = static_cast<int>(std::floor(std::log2(space.diameter() / u)));
        lvl = std::clamp(lvl, 0, bins - 1);
        if (v > env[lvl]) {
            env[lvl] = v;
            envu[lvl] = u;
        }
    }
    std::vector<double> bx, by;
    for (int b = 0; b < bins; ++b)
        if (env[b] > 0) {
            bx.push_back(std::log(envu[b]));
            by.push_back(std::log(env[b]));
        }
    double beta = bx.size() >= 2 ? ls_slope(bx, by) : 1.0;
    if (!std::isfinite(beta)) beta = 1.0;
    rep.beta_est = std::clamp(beta, 1e-6, 1.0);
    return rep;
}

double fit_growth_exponent(const DiscreteSpace& space, const std::vector<std::size_t>& centers, double r_lo,
                           double r_hi, int num_radii) {
    std::vector<double> lx, ly;
    for (std::size_t c : centers) {
        RadialOrder ro = radial_order(space, c);
        for (int k = 0; k < num_radii; ++k) {
            const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(k) / (num_radii - 1));
            lx.push_back(std::log(r));
            ly.push_back(std::log(ro.measure_below(r)));
        }
    }
    return ls_slope(lx, ly);
}

EngulfingReport check_engulfing(const DiscreteSpace& space, std::size_t samples, std::uint64_t seed) {
    EngulfingReport rep;
    rep.c = space.constants().c;
    GridSpec gs;
    gs.num_centers = std::min<std::size_t>(samples, space.size());
    gs.seed = seed;
    SampleGrid g = sample_grid(space, gs);
    if (g.radii.empty()) return rep;
    Rng rng(derive_seed(seed, 5));
    std::vector<RadialOrder> orders;
    for (std::size_t c : g.centers) orders.push_back(radial_order(space, c));
    for (std::size_t s = 0; s < samples; ++s) {
        const auto& o1 = orders[rng.below(orders.size())];
        const double r1 = g.radii[rng.below(g.radii.size())];
        const double r2 = r1 * (0.05 + 0.95 * rng.uniform());
        // x2 anywhere within reach of B(x1, r1)
        const std::size_t reach = o1.count_below(2.0 * rep.c * r1);
        const std::size_t x2 = o1.order[rng.below(std::max<std::size_t>(reach, 1))];
        Ball b1 = o1.ball(r1);
        Ball b2 = ::hotype::ball(space, x2, r2);
        bool meet = false;
        for (std::size_t i : b2.members)
            if (b1.contains(i)) {
                meet = true;
                break;
            }
        if (!meet) continue;
        ++rep.pairs;
        const std::size_t big = o1.count_below(rep.c * r1);
        std::vector<char> in(space.size(), 0);
        for (std::size_t k = 0; k < big; ++k) in[o1.order[k]] = 1;
        for (std::size_t i : b2.members)
            if (!in[i]) {
                ++rep.violations;
                break;
            }
    }
    return rep;
}

QuasiTriangleReport quasi_triangle(const DiscreteSpace& space, std::size_t triples, std::uint64_t seed) {
    QuasiTriangleReport rep;
    const std::size_t n = space.size();
    if (n < 3) return rep;
    Rng rng(derive_seed(seed, 7));
    for (std::size_t t = 0; t < triples; ++t) {
        const std::size_t x = rng.below(n);
        std::size_t y = rng.below(n), z = rng.below(n);
        if (t % 2 == 1) {
            // local triples: y and z close to x in index space probe small scales
            const std::size_t span = 1 + rng.below(std::max<std::size_t>(n / 50, 2));
            y = (x + span) % n;
            z = (x + 2 * span + rng.below(span + 1)) % n;
        }
        if (x == y || y == z || x == z) continue;
        const double den = space.distance(x, y) + space.distance(y, z);
        rep.constant = std::max(rep.constant, space.distance(x, z) / den);
        ++rep.triples;
    }
    return rep;
}

static std::vector<double> ball_measures(const DiscreteSpace& space, double t) {
    const std::size_t n = space.size();
    std::vector<double> m(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        m[i] += space.weight(i);
        for (std::size_t j = i + 1; j < n; ++j)
            if (space.distance(i, j) < t) {
                m[i] += space.weight(j);
                m[j] += space.weight(i);
            }
    }
    return m;
}

static double integral_ratio_from(const DiscreteSpace& space, const std::vector<double>& m, double s, double t,
                                  std::size_t x0) {
    double acc = 0;
    for (std::size_t x = 0; x < space.size(); ++x)
        if (!(space.distance(x0, x) < t)) acc += std::pow(m[x], -s) * space.weight(x);
    return acc / std::pow(m[x0], 1.0 - s);
}

double integral_bound_ratio(const DiscreteSpace& space, double s, double t, std::size_t x0) {
    space.check_index(x0);
    return integral_ratio_from(space, ball_measures(space, t), s, t, x0);
}

IntegralBoundReport integral_bound_check(const DiscreteSpace& space, double s, const std::vector<double>& radii,
                                         std::size_t num_centers, std::uint64_t seed) {
    IntegralBoundReport rep;
    rep.s = s;
    rep.radii = radii;
    const auto centers = sample_centers(space.size(), num_centers, derive_seed(seed, 11));
    rep.centers = centers.size();
    for (double t : radii) {
        const auto m = ball_measures(space, t);
        for (std::size_t x0 : centers) rep.constant = std::max(rep.constant, integral_ratio_from(space, m, s, t, x0));
    }
    return rep;
}

GrowthReport lower_growth_check(const DiscreteSpace& space, int jmax, std::size_t num_centers, std::uint64_t seed) {
    const double dil = 2.0;
    GridSpec gs;
    gs.num_centers = num_centers;
    gs.seed = seed;
    gs.min_factor = 1.0;
    SampleGrid g = sample_grid(space, gs);
    std::vector<RadialOrder> orders;
    for (std::size_t c : g.centers) orders.push_back(radial_order(space, c));
    const double floor = count_floor(orders, g.radii, 8.0);
    GrowthReport rep;
    rep.eps0 = std::numeric_limits<double>::infinity();
    for (const auto& ro : orders)
        for (double t : g.radii) {
            if (t < floor) continue;
            for (int j = 1; j <= jmax; ++j) {
                const double big = std::ldexp(t, j);
                if (big > space.diameter() / 2) break;
                const double ratio = ro.measure_below(big) / ro.measure_below(t);
                rep.eps0 = std::min(rep.eps0, std::log(ratio) / (j * std::log(dil)));
                rep.upper = std::max(rep.upper, std::pow(ratio, 1.0 / j));
                ++rep.samples;
            }
        }
    if (rep.samples == 0) throw ResolutionError("no resolved (t, j) pairs for the growth check");
    return rep;
}

}  // namespace hotype
