#include "hotype/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace hotype {

std::string to_string(Symmetry s) {
    switch (s) {
        case Symmetry::Antisymmetric: return "antisymmetric";
        case Symmetry::Hermitian: return "hermitian";
        default: return "none";
    }
}

void Kernel::require(const DiscreteSpace& space) const {
    if (kind && space.kind() != *kind)
        throw KindMismatch("kernel " + name + " needs a " + hotype::to_string(*kind) + " space, got " +
                           hotype::to_string(space.kind()));
    if (param != 0 && space.param() != param)
        throw KindMismatch("kernel " + name + " needs dimension parameter " + std::to_string(param));
}

Kernel kernel_zero() {
    Kernel k;
    k.name = "zero";
    k.evaluator = [](const DiscreteSpace&, std::size_t, std::size_t) { return cplx(0.0); };
    k.symmetry = Symmetry::Antisymmetric;
    k.claimed_order = 8;
    k.zero = true;
    return k;
}

Kernel kernel_constant(cplx c) {
    Kernel k;
    k.name = "constant";
    k.evaluator = [c](const DiscreteSpace&, std::size_t, std::size_t) { return c; };
    k.symmetry = c.imag() == 0 ? Symmetry::Hermitian : Symmetry::None;
    k.claimed_order = 8;
    k.zero = c == 0.0;
    return k;
}

Kernel kernel_hilbert() {
    Kernel k;
    k.name = "hilbert";
    k.evaluator = [](const DiscreteSpace& s, std::size_t i, std::size_t j) {
        return cplx(1.0 / (M_PI * (s.coords(i)[0] - s.coords(j)[0])));
    };
    k.symmetry = Symmetry::Antisymmetric;
    k.claimed_order = 8;
    k.kind = SpaceKind::Euclidean;
    k.param = 1;
    return k;
}

Kernel kernel_hilbert_unnormalized() {
    Kernel k = kernel_hilbert();
    k.name = "hilbert-unnormalized";
    k.evaluator = [](const DiscreteSpace& s, std::size_t i, std::size_t j) {
        return cplx(1.0 / (s.coords(i)[0] - s.coords(j)[0]));
    };
    return k;
}

Kernel kernel_riesz(int component, int dim) {
    if (dim < 1 || component < 0 || component >= dim) throw Error("riesz component out of range");
    Kernel k;
    k.name = "riesz" + std::to_string(component);
    const double cd = std::tgamma((dim + 1) / 2.0) / std::pow(M_PI, (dim + 1) / 2.0);
    k.evaluator = [cd, component, dim](const DiscreteSpace& s, std::size_t i, std::size_t j) {
        const double* x = s.coords(i);
        const double* y = s.coords(j);
        double r2 = 0;
        for (int a = 0; a < dim; ++a) r2 += (x[a] - y[a]) * (x[a] - y[a]);
        return cplx(cd * (x[component] - y[component]) / std::pow(r2, (dim + 1) / 2.0));
    };
    k.symmetry = Symmetry::Antisymmetric;
    k.claimed_order = 8;
    k.kind = SpaceKind::Euclidean;
    k.param = dim;
    return k;
}

static cplx sphere_inner(const DiscreteSpace& s, std::size_t i, std::size_t j) {
    const double* z = s.coords(i);
    const double* w = s.coords(j);
    cplx acc = 0;
    for (std::size_t a = 0; a < s.stride(); a += 2) acc += cplx(z[a], z[a + 1]) * cplx(w[a], -w[a + 1]);
    return acc;
}

Kernel kernel_szego_sphere(int n) {
    if (n < 2) throw Error("sphere dimension n must be at least 2");
    Kernel k;
    k.name = "szego";
    k.evaluator = [n](const DiscreteSpace& s, std::size_t i, std::size_t j) {
        return std::pow(1.0 - sphere_inner(s, i, j), -n) / s.total_measure();
    };
    k.symmetry = Symmetry::Hermitian;
    k.claimed_order = 8;
    k.kind = SpaceKind::Sphere;
    k.param = n;
    return k;
}

static double binom(int a, int b) {
    double r = 1;
    for (int t = 1; t <= b; ++t) r = r * (a - b + t) / t;
    return r;
}

Kernel kernel_szego_banded(int n, int degree) {
    if (n < 2) throw Error("sphere dimension n must be at least 2");
    if (degree < 0) throw Error("band degree must be nonnegative");
    Kernel k;
    k.name = "szego-banded" + std::to_string(degree);
    std::vector<double> coef(degree + 1);
    for (int d = 0; d <= degree; ++d) coef[d] = binom(d + n - 1, n - 1);
    k.evaluator = [coef](const DiscreteSpace& s, std::size_t i, std::size_t j) {
        const cplx z = sphere_inner(s, i, j);
        cplx acc = 0, pw = 1;
        for (double c : coef) {
            acc += c * pw;
            pw *= z;
        }
        return acc / s.total_measure();
    };
    k.symmetry = Symmetry::Hermitian;
    k.claimed_order = 8;
    k.kind = SpaceKind::Sphere;
    k.param = n;
    return k;
}

Kernel kernel_power(double sexp) {
    Kernel k;
    std::ostringstream nm;
    nm << "power" << fmt_double(sexp);
    k.name = nm.str();
    k.evaluator = [sexp](const DiscreteSpace& s, std::size_t i, std::size_t j) {
        return cplx(std::pow(std::abs(s.coords(i)[0] - s.coords(j)[0]), -sexp));
    };
    k.symmetry = Symmetry::Hermitian;
    k.claimed_epsilon = 1.0;
    k.kind = SpaceKind::Euclidean;
    k.param = 1;
    return k;
}

static double weierstrass(double x) {
    double acc = 0, f = 1, a = 1;
    for (int j = 0; j <= 12; ++j) {
        acc += a * std::cos(f * M_PI * x);
        f *= 2.0;
        a *= M_SQRT1_2;
    }
    return 0.25 * acc;
}

Kernel kernel_rough_hilbert() {
    Kernel k;
    k.name = "rough-hilbert";
    k.evaluator = [](const DiscreteSpace& s, std::size_t i, std::size_t j) {
        const double x = s.coords(i)[0], y = s.coords(j)[0];
        return cplx((1.0 + weierstrass(x) + weierstrass(y)) / (M_PI * (x - y)));
    };
    k.symmetry = Symmetry::Antisymmetric;
    k.claimed_epsilon = 0.5;
    k.claimed_order = 0;
    k.kind = SpaceKind::Euclidean;
    k.param = 1;
    return k;
}

Kernel kernel_by_name(const std::string& name, const DiscreteSpace& space) {
    auto num_after = [&](const std::string& prefix) { return name.substr(prefix.size()); };
    try {
        if (name == "zero") return kernel_zero();
        if (name == "hilbert") return kernel_hilbert();
        if (name == "hilbert-unnormalized") return kernel_hilbert_unnormalized();
        if (name == "rough-hilbert") return kernel_rough_hilbert();
        if (name == "szego") return kernel_szego_sphere(space.param());
        if (name.rfind("szego-banded", 0) == 0) {
            const std::string d = num_after("szego-banded");
            return kernel_szego_banded(space.param(), d.empty() ? 4 : std::stoi(d));
        }
        if (name.rfind("riesz", 0) == 0) return kernel_riesz(std::stoi(num_after("riesz")), space.param());
        if (name.rfind("power", 0) == 0) return kernel_power(std::stod(num_after("power")));
    } catch (const std::logic_error&) {
        throw SchemaError("kernel: cannot parse '" + name + "'");
    }
    throw SchemaError("kernel: unknown kernel '" + name + "'");
}

double kernel_lambda(const DiscreteSpace& space, std::size_t i, std::size_t j) {
    const double d = space.distance(i, j);
    if (space.has_model_measure()) return space.model_ball_measure(d);
    double acc = 0;
    for (std::size_t k = 0; k < space.size(); ++k)
        if (space.distance(i, k) < d) acc += space.weight(k);
    return acc;
}

Eigen::MatrixXcd kernel_matrix(const DiscreteSpace& space, const Kernel& K, double eta, double taper_c) {
    K.require(space);
    const std::size_t n = space.size();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    if (K.zero) return A;
    const double lo = taper_c > 1.0 ? eta / taper_c : eta;
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = space.distance(i, j);
            if (d < lo) continue;
            const double tau = (taper_c > 1.0 && d < eta) ? (d - lo) / (eta - lo) : 1.0;
            A(i, j) = K(space, i, j) * (tau * space.weight(j));
        }
    });
    return A;
}

Eigen::MatrixXcd pv_matrix(const DiscreteSpace& space, const Kernel& K) {
    K.require(space);
    const std::size_t n = space.size();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    if (K.zero) return A;
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) A(i, j) = K(space, i, j) * space.weight(j);
    });
    return A;
}

static Eigen::VectorXcd as_vector(const DiscreteFunction& f) {
    return Eigen::Map<const Eigen::VectorXcd>(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
}

static DiscreteFunction from_vector(const DiscreteSpace& space, const Eigen::VectorXcd& v) {
    return DiscreteFunction(space, std::vector<cplx>(v.data(), v.data() + v.size()));
}

DiscreteFunction apply_matrix(const DiscreteSpace& space, const Eigen::MatrixXcd& A, const DiscreteFunction& f) {
    f.check(space);
    if (static_cast<std::size_t>(A.rows()) != space.size()) throw SpaceMismatch("operator size differs from space");
    return from_vector(space, A * as_vector(f));
}

Eigen::MatrixXcd weighted_adjoint(const DiscreteSpace& space, const Eigen::MatrixXcd& A) {
    const Eigen::Map<const Eigen::VectorXd> w(space.weights().data(), static_cast<Eigen::Index>(space.size()));
    return w.cwiseInverse().asDiagonal() * A.adjoint() * w.asDiagonal();
}

DiscreteFunction apply_truncated(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f,
                                 double eta) {
    K.require(space);
    f.check(space);
    const std::size_t n = space.size();
    std::vector<cplx> out(n, 0.0);
    if (K.zero) return DiscreteFunction(space, std::move(out));
    parallel_for(n, [&](std::size_t i) {
        cplx acc = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || f.values[j] == 0.0) continue;
            if (space.distance(i, j) >= eta) acc += K(space, i, j) * f.values[j] * space.weight(j);
        }
        out[i] = acc;
    });
    return DiscreteFunction(space, std::move(out));
}

DiscreteFunction apply_pv(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f) {
    return apply_truncated(space, K, f, 0.5 * space.min_distance());
}

DiscreteFunction maximal_truncation(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f,
                                    const std::vector<double>& etas) {
    if (etas.empty()) throw Error("maximal_truncation needs at least one eta");
    K.require(space);
    f.check(space);
    const std::size_t n = space.size();
    std::vector<double> sorted = etas;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::vector<cplx> out(n, 0.0);
    if (K.zero) return DiscreteFunction(space, std::move(out));
    parallel_for(n, [&](std::size_t i) {
        std::vector<std::pair<double, cplx>> terms;
        terms.reserve(n);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) terms.emplace_back(space.distance(i, j), K(space, i, j) * f.values[j] * space.weight(j));
        std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        cplx acc = 0;
        double best = 0;
        std::size_t t = 0;
        for (double eta : sorted) {
            while (t < terms.size() && terms[t].first >= eta) acc += terms[t++].second;
            best = std::max(best, std::abs(acc));
        }
        out[i] = best;
    });
    return DiscreteFunction(space, std::move(out));
}

namespace {

// index in a radial order whose distance is closest to target, skipping the center
std::size_t nearest_in_order(const RadialOrder& ro, double target) {
    auto it = std::lower_bound(ro.dist.begin() + 1, ro.dist.end(), target);
    std::size_t k = it - ro.dist.begin();
    if (k >= ro.dist.size()) k = ro.dist.size() - 1;
    if (k > 1 && std::abs(ro.dist[k - 1] - target) < std::abs(ro.dist[k] - target)) --k;
    return k;
}

struct BandFit {
    std::vector<std::pair<double, double>> bands;  // (geometric center, max)
    double slope = 0.0;
};

// dyadic bands in log2(x); keeps bands with at least min_count samples
BandFit band_max(const std::vector<std::pair<double, double>>& samples, std::size_t min_count = 3) {
    BandFit bf;
    std::map<int, std::pair<double, std::size_t>> bins;
    for (const auto& [x, v] : samples) {
        if (!(x > 0)) continue;
        auto& b = bins[static_cast<int>(std::floor(std::log2(x)))];
        b.first = std::max(b.first, v);
        ++b.second;
    }
    std::vector<double> lx, ly;
    for (const auto& [k, b] : bins) {
        if (b.second < min_count) continue;
        const double c = std::pow(2.0, k + 0.5);
        bf.bands.emplace_back(c, b.first);
        if (b.first > 0) {
            lx.push_back(std::log(c));
            ly.push_back(std::log(b.first));
        }
    }
    bf.slope = lx.size() >= 2 ? ls_slope(lx, ly) : 0.0;
    return bf;
}

double log_uniform(Rng& rng, double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); }

}  // namespace

StandardKernelReport standard_kernel_check(const DiscreteSpace& space, const Kernel& K, std::size_t sample_pairs,
                                           std::uint64_t seed) {
    if (sample_pairs < 100) throw Error("standard_kernel_check needs at least 100 sample pairs");
    K.require(space);
    StandardKernelReport rep;
    for (int e = 1; e <= 10; ++e) rep.eps_grid.push_back(e / 10.0);
    if (K.zero) {
        rep.epsilon_fit = 1.0;
        rep.eps_slopes.assign(rep.eps_grid.size(), 0.0);
        rep.size_ok = rep.smooth_ok = rep.pass = true;
        return rep;
    }
    const double c = space.constants().c;
    const double dmin = 4.0 * space.min_distance();
    const double dmax = 0.5 * space.diameter();
    Rng rng(seed);
    const std::size_t per_base = 10;
    const std::size_t bases = (sample_pairs + per_base - 1) / per_base;
    std::vector<std::pair<double, double>> size_samples, smooth_samples;
    std::vector<PairWitness> triples;
    bool finite = true;
    for (std::size_t b = 0; b < bases; ++b) {
        const std::size_t x = rng.below(space.size());
        const RadialOrder ro = radial_order(space, x);
        for (std::size_t s = 0; s < per_base; ++s) {
            const std::size_t ky = nearest_in_order(ro, log_uniform(rng, dmin, dmax));
            const std::size_t y = ro.order[ky];
            const double d = ro.dist[ky];
            const double lam = kernel_lambda(space, x, y);
            const double v = std::abs(K(space, x, y)) * lam;
            finite = finite && std::isfinite(v);
            size_samples.emplace_back(d, v);
            if (v > rep.C_size) rep.size_witness = {x, y, x, v};
            rep.C_size = std::max(rep.C_size, v);
            // smoothness triple with x' in B(x, d/c)
            const double umin = 2.0 * space.min_distance() / d;
            const double umax = 1.0 / c;
            if (!(umin < umax)) continue;
            const std::size_t kp = nearest_in_order(ro, log_uniform(rng, umin, umax) * d);
            const std::size_t xp = ro.order[kp];
            const double u = ro.dist[kp] / d;
            if (xp == y || u > umax || u <= 0) continue;
            const double diff = std::max(std::abs(K(space, x, y) - K(space, xp, y)),
                                         std::abs(K(space, y, x) - K(space, y, xp)));
            const double sv = diff * lam;
            finite = finite && std::isfinite(sv);
            smooth_samples.emplace_back(u, sv);
            triples.push_back({x, y, xp, sv});
            ++rep.triples;
        }
    }
    rep.pairs = size_samples.size();
    rep.size_slope = band_max(size_samples).slope;
    rep.size_ok = finite && std::abs(rep.size_slope) <= 0.25;
    rep.epsilon_fit = 0.0;
    for (double eps : rep.eps_grid) {
        std::vector<std::pair<double, double>> scaled;
        scaled.reserve(smooth_samples.size());
        for (const auto& [u, v] : smooth_samples) scaled.emplace_back(u, v / std::pow(u, eps));
        const double sl = band_max(scaled).slope;
        rep.eps_slopes.push_back(sl);
        // the constant is stable when it does not grow as u -> 0
        if (sl >= -0.1) rep.epsilon_fit = eps;
    }
    if (rep.epsilon_fit > 0)
        for (std::size_t t = 0; t < smooth_samples.size(); ++t) {
            const auto [u, v] = smooth_samples[t];
            const double r = v / std::pow(u, rep.epsilon_fit);
            if (r > rep.C_smooth) {
                rep.C_smooth = r;
                rep.smooth_witness = triples[t];
                rep.smooth_witness.value = r;
            }
        }
    rep.smooth_ok = finite && rep.epsilon_fit >= K.claimed_epsilon - 1e-9;
    rep.pass = rep.size_ok && rep.smooth_ok;
    return rep;
}

namespace {

// min over a of max_i omega_i |r_i - (M a)_i| by Lawson reweighting; returns per-row weighted residuals
std::vector<double> lawson_fit(const Eigen::MatrixXd& M, const Eigen::VectorXcd& r, const Eigen::VectorXd& omega) {
    const Eigen::Index rows = M.rows();
    std::vector<double> best(rows, 0.0);
    if (M.cols() == 0) {
        for (Eigen::Index i = 0; i < rows; ++i) best[i] = omega[i] * std::abs(r[i]);
        return best;
    }
    Eigen::VectorXd nu = Eigen::VectorXd::Constant(rows, 1.0 / rows);
    double best_max = INFINITY;
    const Eigen::MatrixXcd Mc = M.cast<cplx>();
    for (int it = 0; it < 40; ++it) {
        const Eigen::VectorXd s = nu.cwiseSqrt().cwiseProduct(omega);
        const Eigen::MatrixXcd A = s.cast<cplx>().asDiagonal() * Mc;
        const Eigen::VectorXcd rhs = s.cast<cplx>().cwiseProduct(r);
        const Eigen::VectorXcd a = A.colPivHouseholderQr().solve(rhs);
        const Eigen::VectorXcd res = r - Mc * a;
        std::vector<double> e(rows);
        double mx = 0, tot = 0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            e[i] = omega[i] * std::abs(res[i]);
            mx = std::max(mx, e[i]);
        }
        if (mx < best_max) {
            best_max = mx;
            best = e;
        }
        if (mx == 0) break;
        for (Eigen::Index i = 0; i < rows; ++i) {
            nu[i] *= e[i];
            tot += nu[i];
        }
        if (!(tot > 0)) break;
        nu /= tot;
    }
    return best;
}

}  // namespace

PkKernelReport pk_kernel_check(const DiscreteSpace& space, const PolynomialFamily& family, const Kernel& K,
                               const MomentSpec& spec, std::size_t sample_count, std::uint64_t seed) {
    family.check(space, spec.k);
    K.require(space);
    PkKernelReport rep;
    rep.degree = spec.k;
    rep.exponent = K.claimed_epsilon + spec.k;
    if (K.zero) {
        rep.pass = true;
        return rep;
    }
    const double c = space.constants().c;
    const std::size_t span = family.exponents(space, spec.k).size();
    const double dmin = std::max(40.0 * c * space.min_distance(), 1e-300);
    const double dmax = 0.5 * space.diameter();
    if (!(dmin < dmax)) throw ResolutionError("space too coarse for the far-field polynomial check");
    Rng rng(seed);
    std::vector<std::pair<double, double>> samples;
    bool finite = true;
    for (std::size_t s = 0; s < sample_count; ++s) {
        const std::size_t x = rng.below(space.size());
        const RadialOrder ro = radial_order(space, x);
        const std::size_t ky = nearest_in_order(ro, log_uniform(rng, dmin, dmax));
        const std::size_t y = ro.order[ky];
        const double d = ro.dist[ky];
        const double rho = d / (2.0 * c);
        const Ball b = ro.ball(rho);
        if (b.members.size() < 2 * span + 2) continue;
        const double lam = kernel_lambda(space, x, y);
        const Eigen::MatrixXd V = family.evaluate(space, space.point(x), spec.k, b.members, rho);
        // the constant column is replaced by the pinned value at x
        const Eigen::MatrixXd M = V.rightCols(V.cols() - 1);
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < b.members.size(); ++r)
            if (b.members[r] != x) rows.push_back(r);
        Eigen::MatrixXd Mr(rows.size(), M.cols());
        Eigen::VectorXd omega(rows.size());
        Eigen::VectorXcd r1(rows.size()), r2(rows.size());
        const cplx k1 = K(space, x, y), k2 = K(space, y, x);
        std::vector<double> us(rows.size());
        for (std::size_t t = 0; t < rows.size(); ++t) {
            const std::size_t xp = b.members[rows[t]];
            Mr.row(t) = M.row(rows[t]);
            us[t] = space.distance(x, xp) / d;
            omega[t] = lam / std::pow(us[t], rep.exponent);
            r1[t] = K(space, xp, y) - k1;
            r2[t] = K(space, y, xp) - k2;
        }
        const std::vector<double> e1 = lawson_fit(Mr, r1, omega);
        const std::vector<double> e2 = lawson_fit(Mr, r2, omega);
        for (std::size_t t = 0; t < rows.size(); ++t) {
            const double v = std::max(e1[t], e2[t]);
            finite = finite && std::isfinite(v);
            samples.emplace_back(us[t], v);
            if (v > rep.fitted_constant) {
                rep.fitted_constant = v;
                rep.witness = {x, y, b.members[rows[t]], v};
            }
        }
        ++rep.samples;
    }
    const BandFit bf = band_max(samples);
    rep.bands = bf.bands;
    rep.band_slope = bf.slope;
    rep.pass = finite && rep.samples > 0 && rep.band_slope >= -0.25;
    return rep;
}

DiscreteFunction smooth_bump(const DiscreteSpace& space, std::size_t center, double r, std::uint64_t seed) {
    space.check_index(center);
    Rng rng(seed);
    const std::size_t dims = space.stride();
    std::vector<double> dir(dims);
    double nrm = 0;
    for (double& v : dir) {
        v = rng.normal();
        nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    const double freq = rng.uniform(0.5, 2.0), phase = rng.uniform(0.0, 2.0 * M_PI);
    const double* c = space.coords(center);
    std::vector<cplx> vals(space.size(), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const double d = space.distance(center, i);
        if (d >= r) continue;
        const double t = 1.0 - (d / r) * (d / r);
        double proj = 0;
        const double* x = space.coords(i);
        for (std::size_t a = 0; a < dims; ++a) proj += dir[a] / nrm * (x[a] - c[a]) / r;
        vals[i] = t * t * t * (1.0 + 0.4 * std::sin(freq * proj + phase));
    }
    return DiscreteFunction(space, std::move(vals));
}

static double l2_norm(const DiscreteSpace& space, const DiscreteFunction& f) { return lp_norm(space, f, 2.0); }

WeakBoundednessReport weak_boundedness_probe(const DiscreteSpace& space, const Kernel& K, std::size_t bump_pairs,
                                             std::uint64_t seed) {
    K.require(space);
    WeakBoundednessReport rep;
    if (K.zero || bump_pairs == 0) {
        rep.pass = true;
        return rep;
    }
    GridSpec gs;
    gs.seed = derive_seed(seed, 0x3b);
    gs.min_factor = 16.0;
    gs.max_radius = space.diameter() / 4;
    const SampleGrid grid = sample_grid(space, gs);
    if (grid.radii.empty()) throw ResolutionError("no resolved radii for the weak boundedness probe");
    std::vector<double> radii(grid.radii.rbegin(), grid.radii.rend());
    std::vector<double> per(radii.size(), 0.0);
    Rng rng(seed);
    for (std::size_t t = 0; t < bump_pairs; ++t) {
        const std::size_t s = t % radii.size();
        const double r = radii[s];
        const std::size_t x0 = grid.centers[rng.below(grid.centers.size())];
        const RadialOrder ro = radial_order(space, x0);
        const Ball B = ro.ball(r);
        const std::size_t inner = ro.count_below(r / 2);
        const std::size_t c2 = ro.order[rng.below(std::max<std::size_t>(inner, 1))];
        DiscreteFunction phi = smooth_bump(space, x0, r / 2, derive_seed(seed, t, 1));
        DiscreteFunction psi = smooth_bump(space, c2, r / 2, derive_seed(seed, t, 2));
        const double np = l2_norm(space, phi), nq = l2_norm(space, psi);
        if (!(np > 0 && nq > 0)) continue;
        phi = cplx(std::sqrt(B.measure) / np) * phi;
        psi = cplx(std::sqrt(B.measure) / nq) * psi;
        cplx acc = 0;
        for (std::size_t i : B.members) {
            if (psi.values[i] == 0.0) continue;
            cplx row = 0;
            for (std::size_t j : B.members)
                if (j != i && phi.values[j] != 0.0) row += K(space, i, j) * phi.values[j] * space.weight(j);
            acc += row * std::conj(psi.values[i]) * space.weight(i);
        }
        per[s] = std::max(per[s], std::abs(acc) / B.measure);
    }
    std::vector<double> lr, lv, v;
    for (std::size_t s = 0; s < radii.size(); ++s) {
        rep.per_scale.emplace_back(radii[s], per[s]);
        rep.max_ratio = std::max(rep.max_ratio, per[s]);
        if (per[s] > 0) {
            lr.push_back(std::log(radii[s]));
            lv.push_back(std::log(per[s]));
            v.push_back(per[s]);
        }
    }
    if (lr.size() >= 2) {
        rep.slope = ls_slope(lr, lv);
        rep.log_trend = ls_slope(lr, v);
        const double mx = std::accumulate(lr.begin(), lr.end(), 0.0) / lr.size();
        const double my = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double sxx = 0, syy = 0, sxy = 0;
        for (std::size_t k = 0; k < lr.size(); ++k) {
            sxx += (lr[k] - mx) * (lr[k] - mx);
            syy += (v[k] - my) * (v[k] - my);
            sxy += (lr[k] - mx) * (v[k] - my);
        }
        rep.log_trend_r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 0.0;
    }
    rep.pass = rep.max_ratio <= 2.0 && std::abs(rep.slope) <= 0.3;
    rep.divergent = !rep.pass && rep.log_trend_r2 >= 0.9;
    return rep;
}

DiscreteFunction commutator_apply(const DiscreteSpace& space, const Eigen::MatrixXcd& A, const DiscreteFunction& f,
                                  const DiscreteFunction& g) {
    f.check(space);
    g.check(space);
    return f * apply_matrix(space, A, g) - apply_matrix(space, A, f * g);
}

DiscreteFunction commutator_apply(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f,
                                  const DiscreteFunction& g) {
    f.check(space);
    g.check(space);
    return f * apply_pv(space, K, g) - apply_pv(space, K, f * g);
}

cplx inner(const DiscreteSpace& space, const DiscreteFunction& u, const DiscreteFunction& v) {
    u.check(space);
    v.check(space);
    cplx acc = 0;
    for (std::size_t i = 0; i < space.size(); ++i) acc += u.values[i] * std::conj(v.values[i]) * space.weight(i);
    return acc;
}

namespace {

Eigen::VectorXcd side_apply(const ToeplitzConfig::Side& side, Eigen::VectorXcd v) {
    for (std::size_t k = side.ops.size(); k-- > 0;) v = (*side.ops[k]) * v;
    return v;
}

Eigen::VectorXcd side_adjoint(const ToeplitzConfig::Side& side, Eigen::VectorXcd v) {
    for (std::size_t k = 0; k < side.adj.size(); ++k) v = (*side.adj[k]) * v;
    return v;
}

void check_config(const DiscreteSpace& space, const ToeplitzConfig& cfg) {
    if (cfg.space_id != space.id()) throw SpaceMismatch("Toeplitz configuration built on another space");
}

}  // namespace

ToeplitzConfig ToeplitzConfig::build(const DiscreteSpace& space, const std::vector<ToeplitzTerm>& terms) {
    if (terms.empty()) throw Error("Toeplitz configuration needs at least one term");
    ToeplitzConfig cfg;
    cfg.space_id = space.id();
    std::map<std::string, std::pair<std::shared_ptr<const Eigen::MatrixXcd>, std::shared_ptr<const Eigen::MatrixXcd>>>
        cache;
    auto side = [&](const std::vector<Kernel>& ks) {
        Side s;
        for (const Kernel& k : ks) {
            auto it = cache.find(k.name);
            if (it == cache.end()) {
                auto A = std::make_shared<const Eigen::MatrixXcd>(pv_matrix(space, k));
                auto Aa = std::make_shared<const Eigen::MatrixXcd>(weighted_adjoint(space, *A));
                it = cache.emplace(k.name, std::make_pair(A, Aa)).first;
            }
            s.ops.push_back(it->second.first);
            s.adj.push_back(it->second.second);
            s.names.push_back(k.name);
        }
        return s;
    };
    for (const auto& t : terms) {
        if (t.sign != 1 && t.sign != -1) throw Error("Toeplitz term sign must be +1 or -1");
        cfg.terms.push_back({t.sign, side(t.left), side(t.right)});
    }
    const DiscreteFunction one = DiscreteFunction::constant(space, 1.0);
    for (const DiscreteFunction& g : test_family(space, 6, 0x7e571)) {
        const Eigen::VectorXcd gv = as_vector(g);
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(gv.size());
        double scale = 0;
        for (const auto& t : cfg.terms) {
            const Eigen::VectorXcd v = side_apply(t.left, side_apply(t.right, gv));
            acc += static_cast<double>(t.sign) * v;
            scale += v.norm();
        }
        if (scale > 0) cfg.t1_residual = std::max(cfg.t1_residual, acc.norm() / scale);
    }
    cfg.t1_zero = cfg.t1_residual <= 1e-10;
    return cfg;
}

std::string ToeplitzConfig::describe() const {
    std::ostringstream os;
    auto names = [](const Side& s) {
        if (s.names.empty()) return std::string("I");
        std::string r;
        for (std::size_t k = 0; k < s.names.size(); ++k) r += (k ? "*" : "") + s.names[k];
        return r;
    };
    for (std::size_t k = 0; k < terms.size(); ++k)
        os << (k ? " " : "") << (terms[k].sign > 0 ? "+" : "-") << names(terms[k].left) << "(b." << names(terms[k].right)
           << ")";
    return os.str();
}

ToeplitzConfig commutator_config(const DiscreteSpace& space, const Kernel& K) {
    return ToeplitzConfig::build(space, {{+1, {}, {K}}, {-1, {K}, {}}});
}

ToeplitzConfig sandwich_config(const DiscreteSpace& space, const Kernel& K) {
    return ToeplitzConfig::build(space, {{+1, {K}, {K}}, {-1, {K, K}, {}}});
}

DiscreteFunction toeplitz_apply(const DiscreteSpace& space, const ToeplitzConfig& cfg, const DiscreteFunction& b,
                                const DiscreteFunction& g) {
    check_config(space, cfg);
    b.check(space);
    g.check(space);
    const Eigen::VectorXcd bv = as_vector(b), gv = as_vector(g);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(gv.size());
    for (const auto& t : cfg.terms)
        acc += static_cast<double>(t.sign) * side_apply(t.left, bv.cwiseProduct(side_apply(t.right, gv)));
    return from_vector(space, acc);
}

DiscreteFunction bilinear_Bf(const DiscreteSpace& space, const ToeplitzConfig& cfg, const DiscreteFunction& f,
                             const DiscreteFunction& g) {
    check_config(space, cfg);
    f.check(space);
    g.check(space);
    const Eigen::VectorXcd fv = as_vector(f), gv = as_vector(g);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(gv.size());
    for (const auto& t : cfg.terms)
        acc += static_cast<double>(t.sign) * side_apply(t.right, fv).conjugate().cwiseProduct(side_adjoint(t.left, gv));
    return from_vector(space, acc);
}

AdjointCheck adjoint_identity_check(const DiscreteSpace& space, const ToeplitzConfig& cfg, std::size_t samples,
                                    std::uint64_t seed) {
    check_config(space, cfg);
    AdjointCheck rep;
    rep.samples = samples;
    Rng rng(seed);
    auto random_fn = [&] {
        std::vector<cplx> v(space.size());
        for (auto& x : v) x = cplx(rng.normal(), rng.normal());
        return DiscreteFunction(space, std::move(v));
    };
    const DiscreteFunction one = DiscreteFunction::constant(space, 1.0);
    for (std::size_t s = 0; s < samples; ++s) {
        const DiscreteFunction b = random_fn(), f = random_fn(), g = random_fn();
        const DiscreteFunction Tf = toeplitz_apply(space, cfg, b, f);
        const DiscreteFunction Bg = bilinear_Bf(space, cfg, f, g);
        const cplx lhs = inner(space, Tf, g), rhs = inner(space, b, Bg);
        const double scale = l2_norm(space, Tf) * l2_norm(space, g);
        if (scale > 0) rep.max_rel_error = std::max(rep.max_rel_error, std::abs(lhs - rhs) / scale);
        // int B_f(g) against the sum of term magnitudes
        double tscale = 0;
        for (const auto& t : cfg.terms)
            tscale += side_apply(t.right, as_vector(f)).norm() * side_adjoint(t.left, as_vector(g)).norm();
        const Eigen::Map<const Eigen::VectorXd> w(space.weights().data(), space.size());
        tscale *= std::sqrt(w.cwiseProduct(w).sum());
        if (tscale > 0) rep.mean_of_Bf = std::max(rep.mean_of_Bf, std::abs(inner(space, Bg, one)) / tscale);
    }
    return rep;
}

DiscreteFunction vmo_approximate(const DiscreteSpace& space, const DiscreteFunction& f, double delta) {
    f.check(space);
    if (!(delta > space.min_distance()) || delta > space.diameter())
        throw ResolutionError("delta " + fmt_double(delta) + " outside the resolved range");
    const std::size_t n = space.size();
    std::vector<cplx> out(n);
    parallel_for(n, [&](std::size_t i) {
        cplx acc = 0;
        double mu = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (space.distance(i, j) < delta) {
                acc += f.values[j] * space.weight(j);
                mu += space.weight(j);
            }
        out[i] = acc / mu;
    });
    return DiscreteFunction(space, std::move(out));
}

// Euclidean centers come from a uniform point of the bounding box so the family
// is the same set of continuum functions on every refinement.
static std::size_t random_center(const DiscreteSpace& space, Rng& rng) {
    if (space.kind() != SpaceKind::Euclidean) return rng.below(space.size());
    Point p{SpaceKind::Euclidean, space.param(), std::vector<double>(space.stride())};
    for (std::size_t a = 0; a < space.stride(); ++a) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = 0; i < space.size(); ++i) {
            lo = std::min(lo, space.coords(i)[a]);
            hi = std::max(hi, space.coords(i)[a]);
        }
        p.coords[a] = rng.uniform(lo, hi);
    }
    return nearest_index(space, p);
}

std::vector<DiscreteFunction> test_family(const DiscreteSpace& space, std::size_t size, std::uint64_t seed) {
    std::vector<DiscreteFunction> out;
    out.reserve(size);
    const double rlo = std::max(8.0 * space.min_distance(), space.diameter() / 128), rhi = space.diameter() / 4;
    const PolynomialFamily fam = PolynomialFamily::for_space(space);
    const MomentSpec spec = moment_spec(1.0, space.constants().gamma);
    for (std::size_t t = 0; t < size; ++t) {
        Rng rng(derive_seed(seed, t));
        const std::size_t c = random_center(space, rng);
        const double r = rlo < rhi ? log_uniform(rng, rlo, rhi) : rhi;
        const int kind = static_cast<int>(t % 3);
        DiscreteFunction g;
        if (kind == 1) {
            std::vector<cplx> v(space.size(), 0.0);
            for (std::size_t i = 0; i < space.size(); ++i)
                if (space.distance(c, i) < r) v[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
            g = DiscreteFunction(space, std::move(v));
        } else if (kind == 2) {
            try {
                g = make_atom(space, fam, ball(space, c, r), spec, AtomKind::SupNormalized, rng.next_u64()).function;
            } catch (const DegenerateBall&) {
                g = smooth_bump(space, c, r, rng.next_u64());
            }
        } else {
            g = smooth_bump(space, c, r, rng.next_u64());
            const double cycles = rng.uniform(0.0, 4.0), phase = rng.uniform(0.0, 2.0 * M_PI);
            std::vector<double> dir(space.stride());
            double nrm = 0;
            for (double& v : dir) {
                v = rng.normal();
                nrm += v * v;
            }
            nrm = std::sqrt(nrm);
            for (std::size_t i = 0; i < space.size(); ++i) {
                if (g.values[i] == 0.0) continue;
                double proj = 0;
                for (std::size_t a = 0; a < space.stride(); ++a)
                    proj += dir[a] / nrm * (space.coords(i)[a] - space.coords(c)[a]) / r;
                g.values[i] *= std::cos(2.0 * M_PI * cycles * proj + phase);
            }
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<DiscreteFunction> bump_family(const DiscreteSpace& space, std::size_t size, std::uint64_t seed) {
    std::vector<DiscreteFunction> out;
    out.reserve(size);
    const double rlo = std::max(8.0 * space.min_distance(), space.diameter() / 64), rhi = space.diameter() / 8;
    for (std::size_t t = 0; t < size; ++t) {
        Rng rng(derive_seed(seed, t, 0xb));
        const std::size_t c = random_center(space, rng);
        const double r = rlo < rhi ? log_uniform(rng, rlo, rhi) : rhi;
        out.push_back(smooth_bump(space, c, r, rng.next_u64()));
    }
    return out;
}

OperatorNormEstimate operator_norm_estimate(const DiscreteSpace& space, const LinearMap& T, double p,
                                            std::size_t family_size, std::uint64_t seed) {
    if (!(p > 1.0)) throw Error("operator_norm_estimate needs p > 1");
    OperatorNormEstimate est;
    est.p = p;
    est.family_size = family_size;
    est.seed = seed;
    const auto fam = test_family(space, family_size, seed);
    for (std::size_t t = 0; t < fam.size(); ++t) {
        const double ng = lp_norm(space, fam[t], p);
        if (!(ng > 0)) continue;
        const double r = lp_norm(space, T(fam[t]), p) / ng;
        if (r > est.lower_bound) {
            est.lower_bound = r;
            est.witness = t;
        }
    }
    return est;
}

OperatorNormEstimate operator_norm_estimate(const DiscreteSpace& space, const Kernel& K, double p,
                                            std::size_t family_size, std::uint64_t seed) {
    const Eigen::MatrixXcd A = pv_matrix(space, K);
    return operator_norm_estimate(space, [&](const DiscreteFunction& g) { return apply_matrix(space, A, g); }, p,
                                  family_size, seed);
}

OperatorNormEstimate operator_norm_estimate(const DiscreteSpace& space, const ToeplitzConfig& cfg,
                                            const DiscreteFunction& b, double p, std::size_t family_size,
                                            std::uint64_t seed) {
    return operator_norm_estimate(space, [&](const DiscreteFunction& g) { return toeplitz_apply(space, cfg, b, g); },
                                  p, family_size, seed);
}

TruncationReport truncation_convergence(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f,
                                        const std::vector<DiscreteFunction>& g_family,
                                        const std::vector<double>& etas, double p) {
    if (etas.empty()) throw Error("truncation_convergence needs at least one eta");
    f.check(space);
    TruncationReport rep;
    rep.etas = etas;
    const Eigen::MatrixXcd A = pv_matrix(space, K);
    for (double eta : etas) {
        if (!(eta > space.min_distance()) || eta > space.diameter())
            throw ResolutionError("eta " + fmt_double(eta) + " outside the resolved range");
        const Eigen::MatrixXcd D = A - kernel_matrix(space, K, eta, space.constants().c);
        double best = 0;
        for (const auto& g : g_family) {
            const double ng = lp_norm(space, g, p);
            if (!(ng > 0)) continue;
            best = std::max(best, lp_norm(space, commutator_apply(space, D, f, g), p) / ng);
        }
        rep.estimates.push_back(best);
    }
    rep.strictly_decreasing = true;
    for (std::size_t k = 1; k < rep.estimates.size(); ++k)
        rep.strictly_decreasing = rep.strictly_decreasing && rep.estimates[k] < rep.estimates[k - 1];
    rep.reduced_30 = rep.estimates.back() <= 0.7 * rep.estimates.front();
    return rep;
}

static double pnorm_pp(const DiscreteSpace& space, const Eigen::VectorXcd& v, double p,
                       const std::vector<char>* mask = nullptr, bool inside = true) {
    double acc = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!mask || ((*mask)[i] != 0) == inside) acc += std::pow(std::abs(v[i]), p) * space.weight(i);
    return acc;
}

HpReport hp_boundedness_suite(const DiscreteSpace& space, const PolynomialFamily& family, const Kernel& K,
                              const MomentSpec& spec, std::size_t num_atoms, std::uint64_t seed,
                              const HpOptions& opt) {
    K.require(space);
    HpReport rep;
    EnsembleSpec es;
    es.num_atoms = num_atoms;
    es.seed = seed;
    es.scales = opt.scales;
    const Ensemble ens = atom_ensemble(space, family, spec, es);
    rep.rejected = ens.rejected;
    const Eigen::MatrixXcd A = pv_matrix(space, K);
    const double p = spec.p;
    auto evaluate = [&](const Atom& a, std::size_t sidx) {
        HpAtomRow row;
        row.scale_index = sidx;
        row.scale = a.ball.radius;
        const Eigen::VectorXcd Ta = A * as_vector(a.function);
        std::vector<char> near(space.size(), 0);
        for (std::size_t i = 0; i < space.size(); ++i)
            near[i] = space.distance(a.ball.center, i) < opt.near_factor * a.ball.radius;
        row.norm_pp = pnorm_pp(space, Ta, p);
        row.near_pp = pnorm_pp(space, Ta, p, &near, true);
        row.far_pp = pnorm_pp(space, Ta, p, &near, false);
        const double a2 = l2_norm(space, a.function);
        row.near_l2_ratio = a2 > 0 ? std::sqrt(pnorm_pp(space, Ta, 2.0, &near, true)) / a2 : 0.0;
        return row;
    };
    rep.per_scale.resize(ens.scales.size());
    for (std::size_t s = 0; s < ens.scales.size(); ++s) rep.per_scale[s].scale = ens.scales[s];
    for (std::size_t k = 0; k < ens.atoms.size(); ++k) {
        HpAtomRow row = evaluate(ens.atoms[k], ens.scale_index[k]);
        HpScaleRow& sr = rep.per_scale[row.scale_index];
        sr.max_norm_pp = std::max(sr.max_norm_pp, row.norm_pp);
        sr.max_far_pp = std::max(sr.max_far_pp, row.far_pp);
        ++sr.count;
        rep.max_norm_pp = std::max(rep.max_norm_pp, row.norm_pp);
        rep.near_l2_max = std::max(rep.near_l2_max, row.near_l2_ratio);
        rep.atoms.push_back(row);
    }
    std::vector<double> lx, ly;
    for (const auto& sr : rep.per_scale)
        if (sr.count > 0 && sr.max_norm_pp > 0) {
            lx.push_back(-std::log(sr.scale));
            ly.push_back(std::log(sr.max_norm_pp));
        }
    rep.slope = lx.size() >= 2 ? ls_slope(lx, ly) : 0.0;

    // dilation pairs: one smooth profile on B(x0, r) and B(x0, 2r) at interior centers
    if (opt.dilation_pairs > 0 && !ens.scales.empty()) {
        std::vector<double> rs;
        for (double r : ens.scales)
            if (r >= 32.0 * space.min_distance() && r <= space.diameter() / 32) rs.push_back(r);
        std::vector<std::size_t> interior;
        for (std::size_t i = 0; i < space.size(); ++i) {
            bool ok = true;
            const double* x = space.coords(i);
            if (space.kind() == SpaceKind::Euclidean) {
                // distance to the bounding box of the cloud, in the sup norm
                for (std::size_t a = 0; a < space.stride() && ok; ++a) {
                    double lo = INFINITY, hi = -INFINITY;
                    for (std::size_t j = 0; j < space.size(); j += std::max<std::size_t>(1, space.size() / 256)) {
                        lo = std::min(lo, space.coords(j)[a]);
                        hi = std::max(hi, space.coords(j)[a]);
                    }
                    ok = x[a] - lo >= 0.25 * (hi - lo) && hi - x[a] >= 0.25 * (hi - lo);
                }
            }
            if (ok) interior.push_back(i);
        }
        Rng rng(derive_seed(seed, 0xd1));
        for (std::size_t q = 0; q < opt.dilation_pairs && !rs.empty() && !interior.empty(); ++q) {
            const double r = rs[q % rs.size()];
            const std::size_t x0 = interior[rng.below(interior.size())];
            const std::uint64_t s = rng.next_u64();
            try {
                const Atom a1 = make_atom(space, family, ball(space, x0, r), spec, AtomKind::SupNormalized, s,
                                          AtomProfile::Smooth);
                const Atom a2 = make_atom(space, family, ball(space, x0, 2 * r), spec, AtomKind::SupNormalized, s,
                                          AtomProfile::Smooth);
                // compare on dilated windows B(x0, 4r) and B(x0, 8r)
                auto windowed = [&](const Atom& a) {
                    const Eigen::VectorXcd Ta = A * as_vector(a.function);
                    std::vector<char> win(space.size(), 0);
                    for (std::size_t i = 0; i < space.size(); ++i)
                        win[i] = space.distance(x0, i) < 4.0 * a.ball.radius;
                    return pnorm_pp(space, Ta, p, &win, true);
                };
                const double n1 = windowed(a1), n2 = windowed(a2);
                const double m = std::max(n1, n2);
                if (m > 0) rep.dilation_max_rel_diff = std::max(rep.dilation_max_rel_diff, std::abs(n1 - n2) / m);
                ++rep.dilation_pairs;
            } catch (const DegenerateBall&) {
                ++rep.rejected;
            }
        }
    }
    return rep;
}

std::vector<std::pair<std::string, DiscreteFunction>> bmo_symbols(const DiscreteSpace& space, std::size_t random_count,
                                                                  std::uint64_t seed) {
    if (space.kind() != SpaceKind::Euclidean) throw KindMismatch("BMO symbol family is defined on Euclidean spaces");
    std::vector<std::pair<std::string, DiscreteFunction>> out;
    // logarithms are clamped at half the spacing, the resolution of the sampled representative
    const double floor = 0.5 * space.min_distance();
    out.emplace_back("log-abs", DiscreteFunction::from(space, [floor](const double* x) {
                         return cplx(std::log(std::max(std::abs(x[0]), floor)));
                     }));
    out.emplace_back("smoothed-sign",
                     DiscreteFunction::from(space, [](const double* x) { return cplx(std::tanh(x[0] / 0.05)); }));
    for (std::size_t k = 0; k < random_count; ++k) {
        Rng rng(derive_seed(seed, k));
        double a[3], c[3];
        for (int j = 0; j < 3; ++j) {
            a[j] = rng.uniform(-1.0, 1.0);
            c[j] = rng.uniform(-1.0, 1.0);
        }
        out.emplace_back("random-" + std::to_string(k), DiscreteFunction::from(space, [a, c, floor](const double* x) {
                             double v = 0;
                             for (int j = 0; j < 3; ++j) v += c[j] * std::log(std::max(std::abs(x[0] - a[j]), floor));
                             return cplx(v);
                         }));
    }
    return out;
}

RatioTable commutator_table(const DiscreteSpace& space, const ToeplitzConfig& cfg,
                            const std::vector<std::pair<std::string, DiscreteFunction>>& symbols,
                            const std::vector<double>& ps, std::size_t family_size, std::uint64_t seed) {
    RatioTable tab;
    tab.ps = ps;
    const auto fam = test_family(space, family_size, seed);
    const SampleGrid grid = sample_grid(space);
    for (const auto& [name, b] : symbols) {
        tab.symbols.push_back(name);
        const double bmo = bmo_norm(space, b, grid).value;
        std::vector<DiscreteFunction> images;
        images.reserve(fam.size());
        for (const auto& g : fam) images.push_back(toeplitz_apply(space, cfg, b, g));
        std::vector<double> row;
        for (double p : ps) {
            double best = 0;
            for (std::size_t t = 0; t < fam.size(); ++t) {
                const double ng = lp_norm(space, fam[t], p);
                if (ng > 0 && bmo > 0) best = std::max(best, lp_norm(space, images[t], p) / (ng * bmo));
            }
            row.push_back(best);
            tab.constant = std::max(tab.constant, best);
        }
        tab.ratios.push_back(std::move(row));
    }
    return tab;
}

CompactnessReport compactness_tail(const DiscreteSpace& space, const Kernel& K, const DiscreteFunction& f,
                                   const std::vector<std::size_t>& ms) {
    f.check(space);
    CompactnessReport rep;
    rep.ms = ms;
    const Eigen::MatrixXcd A = pv_matrix(space, K);
    const Eigen::VectorXcd fv = as_vector(f);
    const Eigen::Map<const Eigen::VectorXd> w(space.weights().data(), space.size());
    const Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::MatrixXcd C = fv.asDiagonal() * A - A * fv.asDiagonal();
    C = sw.cast<cplx>().asDiagonal() * C * sw.cwiseInverse().cast<cplx>().asDiagonal();
    const Eigen::MatrixXcd G = C.adjoint() * C;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    std::vector<double> sigma(ev.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k) sigma[k] = std::sqrt(std::max(0.0, ev[k]));
    rep.sigma1 = sigma.empty() ? 0.0 : sigma[0];
    for (std::size_t m : ms) {
        const double s = m < sigma.size() ? sigma[m] : 0.0;
        rep.tails.push_back(rep.sigma1 > 0 ? s / rep.sigma1 : 0.0);
    }
    rep.strictly_decreasing = true;
    for (std::size_t k = 1; k < rep.tails.size(); ++k)
        rep.strictly_decreasing = rep.strictly_decreasing && rep.tails[k] < rep.tails[k - 1];
    return rep;
}

SharpControlReport sharp_maximal_control(const DiscreteSpace& space, double p, std::size_t tests, std::uint64_t seed,
                                         const SampleGrid& grid) {
    SharpControlReport rep;
    const double rlo = 8.0 * space.min_distance(), rhi = space.diameter() / 4;
    for (std::size_t t = 0; t < tests; ++t) {
        Rng rng(derive_seed(seed, t));
        const std::size_t c = rng.below(space.size());
        const double r = rlo < rhi ? log_uniform(rng, rlo, rhi) : rhi;
        const DiscreteFunction window = smooth_bump(space, c, r, rng.next_u64());
        DiscreteFunction g = window;
        const double freq = rng.uniform(0.5, 3.0);
        for (std::size_t i = 0; i < space.size(); ++i)
            if (g.values[i] != 0.0) g.values[i] *= std::sin(2.0 * M_PI * freq * space.distance(c, i) / r) + rng.uniform(-0.3, 0.3);
        // remove the mean with the window so g stays compactly supported
        cplx mg = 0, mw = 0;
        for (std::size_t i = 0; i < space.size(); ++i) {
            mg += g.values[i] * space.weight(i);
            mw += window.values[i] * space.weight(i);
        }
        if (std::abs(mw) == 0) continue;
        g = g - (mg / mw) * window;
        const double ng = lp_norm(space, g, p);
        const double ns = lp_norm(space, sharp_maximal(space, g, grid), p);
        if (ns > 0) rep.C = std::max(rep.C, ng / ns);
        ++rep.tests;
    }
    return rep;
}

OscillationConstantReport far_oscillation_constant(const DiscreteSpace& space, const Kernel& K,
                                                   const DiscreteFunction& b, double bmo, double q,
                                                   std::size_t samples, std::uint64_t seed, const SampleGrid& grid) {
    K.require(space);
    b.check(space);
    OscillationConstantReport rep;
    if (!(bmo > 0) || K.zero) return rep;
    const auto fam = test_family(space, 4, derive_seed(seed, 0x9));
    std::vector<DiscreteFunction> mq;
    for (const auto& g : fam) mq.push_back(q_maximal(space, g, q, grid));
    std::vector<double> radii;
    for (double r : grid.radii)
        if (r <= space.diameter() / 4) radii.push_back(r);
    if (radii.empty()) throw ResolutionError("no radii for the far oscillation check");
    Rng rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t x = grid.centers[rng.below(grid.centers.size())];
        const double r = radii[rng.below(radii.size())];
        const std::size_t gi = rng.below(fam.size());
        const RadialOrder ro = radial_order(space, x);
        const Ball B = ro.ball(r);
        const std::size_t y = ro.order[rng.below(std::max<std::size_t>(1, ro.count_below(r)))];
        const cplx bB = mean_on_ball(space, b, B);
        auto apply_at = [&](std::size_t z) {
            cplx acc = 0;
            for (std::size_t j = 0; j < space.size(); ++j) {
                if (j == z || space.distance(x, j) < 2 * r) continue;
                acc += K(space, z, j) * (b.values[j] - bB) * fam[gi].values[j] * space.weight(j);
            }
            return acc;
        };
        const double m = std::abs(mq[gi].values[x]);
        if (!(m > 0)) continue;
        rep.C = std::max(rep.C, std::abs(apply_at(y) - apply_at(x)) / (bmo * m));
        ++rep.samples;
    }
    return rep;
}

DiscreteFunction szego_projection(const DiscreteSpace& space, const DiscreteFunction& f, SzegoMode mode,
                                  int degree) {
    if (space.kind() != SpaceKind::Sphere) throw KindMismatch("Szego projection needs a sphere space");
    f.check(space);
    if (mode == SzegoMode::PrincipalValue) return apply_pv(space, kernel_szego_sphere(space.param()), f);
    // the banded kernel is smooth, so the diagonal term belongs to the quadrature
    const Kernel S = kernel_szego_banded(space.param(), degree);
    const std::size_t n = space.size();
    std::vector<cplx> out(n);
    parallel_for(n, [&](std::size_t i) {
        cplx acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc += S(space, i, j) * f.values[j] * space.weight(j);
        out[i] = acc;
    });
    return DiscreteFunction(space, std::move(out));
}

}  // namespace hotype
