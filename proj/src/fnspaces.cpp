#include "hotype/fnspaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hotype {

DiscreteFunction::DiscreteFunction(const DiscreteSpace& space, std::vector<cplx> v)
    : space_id(space.id()), values(std::move(v)) {
    check(space);
}

DiscreteFunction DiscreteFunction::constant(const DiscreteSpace& space, cplx c) {
    return DiscreteFunction(space, std::vector<cplx>(space.size(), c));
}

DiscreteFunction DiscreteFunction::from(const DiscreteSpace& space, const std::function<cplx(const double*)>& fn) {
    std::vector<cplx> v(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) v[i] = fn(space.coords(i));
    return DiscreteFunction(space, std::move(v));
}

double DiscreteFunction::sup_norm() const {
    double m = 0;
    for (const cplx& v : values) m = std::max(m, std::abs(v));
    return m;
}

void DiscreteFunction::check(const DiscreteSpace& space) const {
    if (values.size() != space.size()) throw SpaceMismatch("function length does not match the space");
    if (!space_id.empty() && space_id != space.id()) throw SpaceMismatch("function belongs to another space");
    for (const cplx& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error("function has non-finite values");
}

static void same_shape(const DiscreteFunction& a, const DiscreteFunction& b) {
    if (a.size() != b.size() || (a.space_id != b.space_id && !a.space_id.empty() && !b.space_id.empty()))
        throw SpaceMismatch("functions live on different spaces");
}

DiscreteFunction operator+(const DiscreteFunction& a, const DiscreteFunction& b) {
    same_shape(a, b);
    DiscreteFunction r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r.values[i] += b.values[i];
    return r;
}

DiscreteFunction operator-(const DiscreteFunction& a, const DiscreteFunction& b) {
    same_shape(a, b);
    DiscreteFunction r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r.values[i] -= b.values[i];
    return r;
}

DiscreteFunction operator*(const DiscreteFunction& a, const DiscreteFunction& b) {
    same_shape(a, b);
    DiscreteFunction r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r.values[i] *= b.values[i];
    return r;
}

DiscreteFunction operator*(cplx s, const DiscreteFunction& a) {
    DiscreteFunction r = a;
    for (auto& v : r.values) v *= s;
    return r;
}

double lp_norm(const DiscreteSpace& space, const DiscreteFunction& f, double p) {
    f.check(space);
    if (std::isinf(p)) return f.sup_norm();
    double acc = 0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += std::pow(std::abs(f.values[i]), p) * space.weight(i);
    return std::pow(acc, 1.0 / p);
}

PolynomialFamily PolynomialFamily::for_space(const DiscreteSpace& space) {
    switch (space.kind()) {
        case SpaceKind::Euclidean: return {FamilyKind::EuclideanMonomials};
        case SpaceKind::Heisenberg: return {FamilyKind::HeisenbergGraded};
        case SpaceKind::Sphere: return {FamilyKind::SphereNone};
    }
    return {};
}

void PolynomialFamily::check(const DiscreteSpace& space, int k) const {
    if (k < 0) throw UnsupportedFamily("polynomial degree must be nonnegative");
    const bool ok = (kind == FamilyKind::EuclideanMonomials && space.kind() == SpaceKind::Euclidean) ||
                    (kind == FamilyKind::HeisenbergGraded && space.kind() == SpaceKind::Heisenberg) ||
                    kind == FamilyKind::SphereNone;
    if (!ok) throw UnsupportedFamily("polynomial family does not match the space kind");
    if (kind == FamilyKind::SphereNone && k >= 1)
        throw UnsupportedFamily("the sphere family only provides constants (k = 0)");
}

// all nonnegative integer vectors of length len with weighted sum == deg
static void enumerate(std::vector<int>& cur, std::size_t pos, int left, const std::vector<int>& wts,
                      std::vector<std::vector<int>>& out) {
    if (pos == cur.size()) {
        if (left == 0) out.push_back(cur);
        return;
    }
    for (int a = left / wts[pos]; a >= 0; --a) {
        cur[pos] = a;
        enumerate(cur, pos + 1, left - a * wts[pos], wts, out);
    }
    cur[pos] = 0;
}

std::vector<std::vector<int>> PolynomialFamily::exponents(const DiscreteSpace& space, int k) const {
    check(space, k);
    std::vector<int> wts;
    if (kind == FamilyKind::EuclideanMonomials) wts.assign(space.param(), 1);
    else if (kind == FamilyKind::HeisenbergGraded) {
        wts.assign(2 * space.param(), 1);
        wts.push_back(2);
    } else
        wts.assign(1, 1);
    std::vector<std::vector<int>> out;
    for (int d = 0; d <= k; ++d) {
        std::vector<int> cur(wts.size(), 0);
        enumerate(cur, 0, d, wts, out);
    }
    return out;
}

std::size_t PolynomialFamily::degree_count(const DiscreteSpace& space, int i) const {
    if (i == 0) return 1;
    return exponents(space, i).size() - exponents(space, i - 1).size();
}

static void local_coords(const DiscreteSpace& space, const Point& center, std::size_t i, double scale,
                         std::vector<double>& out) {
    const double* g = space.coords(i);
    const std::size_t s = space.stride();
    out.resize(s);
    if (space.kind() == SpaceKind::Heisenberg) {
        const int n = space.param();
        const double* c = center.coords.data();
        // center^{-1} g = (z - c_z, t - c_t - 2 Im <c_z, z>)
        double im = 0;
        for (int j = 0; j < n; ++j) im += c[n + j] * g[j] - c[j] * g[n + j];
        for (int j = 0; j < 2 * n; ++j) out[j] = (g[j] - c[j]) / scale;
        out[2 * n] = (g[2 * n] - c[2 * n] - 2.0 * im) / (scale * scale);
        return;
    }
    for (std::size_t k = 0; k < s; ++k) out[k] = (g[k] - center.coords[k]) / scale;
}

Eigen::MatrixXd PolynomialFamily::evaluate(const DiscreteSpace& space, const Point& center, int k,
                                           const std::vector<std::size_t>& idx, double scale) const {
    const auto ex = exponents(space, k);
    Eigen::MatrixXd V(idx.size(), ex.size());
    if (kind == FamilyKind::SphereNone) {
        V.setOnes();
        return V;
    }
    if (center.kind != space.kind() || center.coords.size() != space.stride())
        throw KindMismatch("polynomial center does not match the space");
    std::vector<double> loc;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        local_coords(space, center, idx[r], scale, loc);
        for (std::size_t c = 0; c < ex.size(); ++c) {
            double v = 1.0;
            for (std::size_t a = 0; a < ex[c].size(); ++a)
                for (int p = 0; p < ex[c][a]; ++p) v *= loc[a];
            V(r, c) = v;
        }
    }
    return V;
}

std::vector<DiscreteFunction> polynomial_basis(const PolynomialFamily& family, const DiscreteSpace& space,
                                               const Point& center, int k) {
    std::vector<std::size_t> all(space.size());
    std::iota(all.begin(), all.end(), 0);
    const Eigen::MatrixXd V = family.evaluate(space, center, k, all);
    std::vector<DiscreteFunction> out;
    for (Eigen::Index c = 0; c < V.cols(); ++c) {
        std::vector<cplx> v(space.size());
        for (std::size_t i = 0; i < space.size(); ++i) v[i] = V(i, c);
        out.emplace_back(space, std::move(v));
    }
    return out;
}

double ball_scale(const DiscreteSpace& space, const Ball& b) {
    double s = 0;
    for (std::size_t i : b.members) s = std::max(s, space.base_distance(b.center, i));
    return s > 0 ? s : 1.0;
}

cplx mean_on_ball(const DiscreteSpace& space, const DiscreteFunction& f, const Ball& b) {
    if (!(b.measure > 0)) throw Error("ball has zero measure");
    cplx acc = 0;
    for (std::size_t i : b.members) acc += f.values[i] * space.weight(i);
    return acc / b.measure;
}

// mean and mean oscillation over the first cnt points of a radial order
static double prefix_oscillation(const DiscreteSpace& space, const DiscreteFunction& f, const RadialOrder& ro,
                                 std::size_t cnt, cplx* mean_out = nullptr) {
    const double mu = ro.cum[cnt];
    cplx m = 0;
    for (std::size_t k = 0; k < cnt; ++k) m += f.values[ro.order[k]] * space.weight(ro.order[k]);
    m /= mu;
    double osc = 0;
    for (std::size_t k = 0; k < cnt; ++k) osc += std::abs(f.values[ro.order[k]] - m) * space.weight(ro.order[k]);
    if (mean_out) *mean_out = m;
    return osc / mu;
}

static double resolved_floor(const DiscreteSpace& space, const SampleGrid& grid) {
    return grid.spec.min_radius > 0 ? grid.spec.min_radius : grid.spec.min_factor * space.min_distance();
}

NormReport mean_oscillation(const DiscreteSpace& space, const DiscreteFunction& f, double r, const SampleGrid& grid) {
    f.check(space);
    if (r < resolved_floor(space, grid)) throw ResolutionError("radius below the resolved range");
    NormReport rep;
    rep.name = "mean_oscillation";
    rep.grid = grid;
    for (std::size_t c : grid.centers) {
        RadialOrder ro = radial_order(space, c);
        const double osc = prefix_oscillation(space, f, ro, ro.count_below(r));
        if (osc > rep.value) rep.value = osc, rep.witness = {c, r};
    }
    return rep;
}

NormReport mean_oscillation(const DiscreteSpace& space, const DiscreteFunction& f, double r) {
    return mean_oscillation(space, f, r, sample_grid(space));
}

// per-radius max oscillation over the grid centers, radii in grid order
static std::vector<std::pair<double, Witness>> oscillation_table(const DiscreteSpace& space,
                                                                  const DiscreteFunction& f,
                                                                  const SampleGrid& grid) {
    f.check(space);
    std::vector<std::pair<double, Witness>> best(grid.radii.size(), {0.0, Witness{}});
    for (std::size_t r = 0; r < grid.radii.size(); ++r) best[r].second = {grid.centers.empty() ? 0 : grid.centers[0], grid.radii[r]};
    for (std::size_t c : grid.centers) {
        RadialOrder ro = radial_order(space, c);
        for (std::size_t r = 0; r < grid.radii.size(); ++r) {
            const double osc = prefix_oscillation(space, f, ro, ro.count_below(grid.radii[r]));
            if (osc > best[r].first) best[r] = {osc, Witness{c, grid.radii[r]}};
        }
    }
    return best;
}

NormReport bmo_norm(const DiscreteSpace& space, const DiscreteFunction& f, const SampleGrid& grid) {
    NormReport rep;
    rep.name = "bmo";
    rep.grid = grid;
    for (const auto& [v, w] : oscillation_table(space, f, grid))
        if (v > rep.value) rep.value = v, rep.witness = w;
    return rep;
}

NormReport bmo_norm(const DiscreteSpace& space, const DiscreteFunction& f) {
    return bmo_norm(space, f, sample_grid(space));
}

std::vector<std::pair<double, double>> vmo_profile(const DiscreteSpace& space, const DiscreteFunction& f,
                                                   const SampleGrid& grid) {
    const auto t = oscillation_table(space, f, grid);
    std::vector<std::pair<double, double>> out;
    for (std::size_t r = 0; r < t.size(); ++r) out.emplace_back(grid.radii[r], t[r].first);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<double, double>> vmo_profile(const DiscreteSpace& space, const DiscreteFunction& f) {
    return vmo_profile(space, f, sample_grid(space));
}

NormReport lipschitz_norm(const DiscreteSpace& space, const DiscreteFunction& f, double beta, const PairSpec& ps) {
    f.check(space);
    if (!(beta > 0 && beta <= 1.0)) throw Error("Lipschitz exponent must lie in (0,1]");
    if (beta > space.constants().beta + 1e-9) throw Error("Lipschitz exponent exceeds the space's beta");
    NormReport rep;
    rep.name = "lipschitz";
    const std::size_t n = space.size();
    const double floor = ps.min_factor * space.min_distance();
    auto visit = [&](std::size_t i, std::size_t j) {
        const double d = space.distance(i, j);
        if (d < floor || !(d > 0)) return;
        const double v = std::abs(f.values[i] - f.values[j]) / std::pow(d, beta);
        if (v > rep.value) rep.value = v, rep.witness = {i, d};
    };
    const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    if (total_pairs <= static_cast<double>(ps.max_pairs)) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
    } else {
        Rng rng(ps.seed);
        for (std::size_t t = 0; t < ps.max_pairs; ++t) {
            const std::size_t i = rng.below(n), j = rng.below(n);
            if (i != j) visit(i, j);
        }
    }
    return rep;
}

namespace {

struct LocalFit {
    Eigen::MatrixXd V;   // basis on the ball
    Eigen::VectorXd w;   // normalized weights (sum 1)
    Eigen::VectorXcd f;
};

// weighted least squares with weights v; returns residual f - V c
Eigen::VectorXcd weighted_residual(const LocalFit& lf, const Eigen::VectorXd& v) {
    const Eigen::VectorXd sv = v.cwiseSqrt();
    const Eigen::MatrixXd A = sv.asDiagonal() * lf.V;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    cod.setThreshold(1e-10);
    const Eigen::VectorXd br = sv.cwiseProduct(lf.f.real());
    const Eigen::VectorXd bi = sv.cwiseProduct(lf.f.imag());
    Eigen::VectorXcd c(lf.V.cols());
    c.real() = cod.solve(br);
    c.imag() = cod.solve(bi);
    return lf.f - lf.V.cast<cplx>() * c;
}

double error_of(const LocalFit& lf, const Eigen::VectorXcd& r, double q) {
    if (std::isinf(q)) return r.cwiseAbs().maxCoeff();
    double acc = 0;
    for (Eigen::Index i = 0; i < r.size(); ++i) acc += lf.w[i] * std::pow(std::abs(r[i]), q);
    return std::pow(acc, 1.0 / q);
}

double weighted_median(std::vector<std::pair<double, double>> vw) {
    std::sort(vw.begin(), vw.end());
    double total = 0;
    for (auto& p : vw) total += p.second;
    double acc = 0;
    for (auto& p : vw) {
        acc += p.second;
        if (acc >= 0.5 * total) return p.first;
    }
    return vw.back().first;
}

double fit_error(const LocalFit& lf, int k, double q) {
    const Eigen::Index n = lf.f.size();
    const bool real = lf.f.imag().cwiseAbs().maxCoeff() == 0.0;
    if (k == 0 && real && (q == 1.0 || std::isinf(q))) {
        // exact infimum over constants for real data
        double c;
        if (q == 1.0) {
            std::vector<std::pair<double, double>> vw(n);
            for (Eigen::Index i = 0; i < n; ++i) vw[i] = {lf.f[i].real(), lf.w[i]};
            c = weighted_median(std::move(vw));
        } else {
            c = 0.5 * (lf.f.real().maxCoeff() + lf.f.real().minCoeff());
        }
        Eigen::VectorXcd r = lf.f.array() - cplx(c, 0.0);
        return error_of(lf, r, q);
    }
    Eigen::VectorXcd r = weighted_residual(lf, lf.w);
    double best = error_of(lf, r, q);
    if (q == 2.0) return best;
    // iteratively reweighted refinement; every iterate is a valid upper bound
    Eigen::VectorXd v = lf.w;
    const double floor = 1e-14 * std::max(1.0, lf.f.cwiseAbs().maxCoeff());
    for (int it = 0; it < 20; ++it) {
        if (std::isinf(q)) {
            Eigen::VectorXd a = r.cwiseAbs();
            const double s = v.dot(a);
            if (!(s > 0)) break;
            v = v.cwiseProduct(a) / s;
        } else {
            for (Eigen::Index i = 0; i < n; ++i) v[i] = lf.w[i] * std::pow(std::max(std::abs(r[i]), floor), q - 2.0);
        }
        r = weighted_residual(lf, v);
        best = std::min(best, error_of(lf, r, q));
    }
    return best;
}

LocalFit make_fit(const DiscreteSpace& space, const PolynomialFamily& family, const DiscreteFunction& f,
                  const std::vector<std::size_t>& members, std::size_t center, double scale, int k) {
    LocalFit lf;
    lf.V = family.evaluate(space, space.point(center), k, members, scale);
    lf.w.resize(members.size());
    lf.f.resize(members.size());
    double mu = 0;
    for (std::size_t r = 0; r < members.size(); ++r) {
        lf.w[r] = space.weight(members[r]);
        lf.f[r] = f.values[members[r]];
        mu += lf.w[r];
    }
    lf.w /= mu;
    return lf;
}

}  // namespace

double local_poly_error(const DiscreteSpace& space, const PolynomialFamily& family, const DiscreteFunction& f,
                        const Ball& b, int k, double q) {
    family.check(space, k);
    if (!(q >= 1.0)) throw Error("q must be at least 1");
    return fit_error(make_fit(space, family, f, b.members, b.center, ball_scale(space, b), k), k, q);
}

NormReport campanato_norm(const DiscreteSpace& space, const PolynomialFamily& family, const DiscreteFunction& f,
                          double alpha, int k, double q, const SampleGrid& grid) {
    f.check(space);
    family.check(space, k);
    if (!(alpha >= 0)) throw Error("Campanato exponent alpha must be nonnegative");
    if (!(q >= 1.0)) throw Error("q must be at least 1");
    NormReport rep;
    rep.name = "campanato";
    rep.grid = grid;
    rep.upper_bound = (q != 2.0);
    const double expo = alpha + k / space.constants().gamma;
    for (std::size_t c : grid.centers) {
        RadialOrder ro = radial_order(space, c);
        for (double r : grid.radii) {
            const std::size_t cnt = ro.count_below(r);
            std::vector<std::size_t> members(ro.order.begin(), ro.order.begin() + cnt);
            double scale = cnt > 0 ? ro.dist[cnt - 1] : 1.0;
            if (space.metric().normalized) {
                scale = 0;
                for (std::size_t i : members) scale = std::max(scale, space.base_distance(c, i));
            }
            if (!(scale > 0)) scale = 1.0;
            const double err = fit_error(make_fit(space, family, f, members, c, scale, k), k, q);
            const double val = std::pow(ro.cum[cnt], -expo) * err;
            if (val > rep.value) rep.value = val, rep.witness = {c, r};
        }
    }
    return rep;
}

NormReport campanato_norm(const DiscreteSpace& space, const PolynomialFamily& family, const DiscreteFunction& f,
                          double alpha, int k, double q) {
    return campanato_norm(space, family, f, alpha, k, q, sample_grid(space));
}

NormReport campanato_mean_norm(const DiscreteSpace& space, const DiscreteFunction& f, double alpha, double q,
                               const SampleGrid& grid) {
    f.check(space);
    NormReport rep;
    rep.name = "campanato_mean";
    rep.grid = grid;
    for (std::size_t c : grid.centers) {
        RadialOrder ro = radial_order(space, c);
        for (double r : grid.radii) {
            const std::size_t cnt = ro.count_below(r);
            const double mu = ro.cum[cnt];
            cplx m = 0;
            for (std::size_t k = 0; k < cnt; ++k) m += f.values[ro.order[k]] * space.weight(ro.order[k]);
            m /= mu;
            double err = 0;
            if (std::isinf(q)) {
                for (std::size_t k = 0; k < cnt; ++k) err = std::max(err, std::abs(f.values[ro.order[k]] - m));
            } else {
                for (std::size_t k = 0; k < cnt; ++k)
                    err += std::pow(std::abs(f.values[ro.order[k]] - m), q) * space.weight(ro.order[k]);
                err = std::pow(err / mu, 1.0 / q);
            }
            const double val = std::pow(mu, -alpha) * err;
            if (val > rep.value) rep.value = val, rep.witness = {c, r};
        }
    }
    return rep;
}

DiscreteFunction sharp_maximal(const DiscreteSpace& space, const DiscreteFunction& f, const SampleGrid& grid) {
    f.check(space);
    DiscreteFunction out = DiscreteFunction::constant(space, 0.0);
    for (std::size_t x = 0; x < space.size(); ++x) {
        RadialOrder ro = radial_order(space, x);
        double best = 0;
        for (double r : grid.radii) best = std::max(best, prefix_oscillation(space, f, ro, ro.count_below(r)));
        out.values[x] = best;
    }
    return out;
}

DiscreteFunction sharp_maximal(const DiscreteSpace& space, const DiscreteFunction& f) {
    return sharp_maximal(space, f, sample_grid(space));
}

DiscreteFunction q_maximal(const DiscreteSpace& space, const DiscreteFunction& f, double q, const SampleGrid& grid) {
    f.check(space);
    if (!(q >= 1.0)) throw Error("q must be at least 1");
    DiscreteFunction out = DiscreteFunction::constant(space, 0.0);
    for (std::size_t x = 0; x < space.size(); ++x) {
        RadialOrder ro = radial_order(space, x);
        // the singleton ball comes first
        double best = std::abs(f.values[x]);
        for (double r : grid.radii) {
            const std::size_t cnt = ro.count_below(r);
            double acc = 0;
            for (std::size_t k = 0; k < cnt; ++k)
                acc += std::pow(std::abs(f.values[ro.order[k]]), q) * space.weight(ro.order[k]);
            best = std::max(best, std::pow(acc / ro.cum[cnt], 1.0 / q));
        }
        out.values[x] = best;
    }
    return out;
}

DiscreteFunction q_maximal(const DiscreteSpace& space, const DiscreteFunction& f, double q) {
    return q_maximal(space, f, q, sample_grid(space));
}

double log_mean_constant(const DiscreteSpace& space, const DiscreteFunction& f, const SampleGrid& grid, double bmo,
                         double rmax) {
    f.check(space);
    if (!(bmo > 0)) return 0.0;
    double C = 0;
    for (std::size_t c : grid.centers) {
        RadialOrder ro = radial_order(space, c);
        for (double r : grid.radii) {
            if (r > rmax) continue;
            cplx m;
            prefix_oscillation(space, f, ro, ro.count_below(r), &m);
            const double mu = ro.cum[ro.count_below(r)];
            const double a = std::abs(m) / bmo;
            // smallest C > mu with C log(C/mu) >= a
            double lo = mu, hi = std::max(2.0 * mu, 1.0);
            while (hi * std::log(hi / mu) < a) hi *= 2;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                (mid * std::log(mid / mu) >= a ? hi : lo) = mid;
            }
            C = std::max(C, hi);
        }
    }
    return C;
}

double dyadic_mean_drift(const DiscreteSpace& space, const DiscreteFunction& f, const SampleGrid& grid, double bmo,
                         int kmax) {
    f.check(space);
    if (!(bmo > 0)) return 0.0;
    double worst = 0;
    for (std::size_t c : grid.centers) {
        RadialOrder ro = radial_order(space, c);
        for (double r : grid.radii) {
            cplx m0;
            prefix_oscillation(space, f, ro, ro.count_below(r), &m0);
            for (int k = 1; k <= kmax; ++k) {
                const double R = std::ldexp(r, k);
                if (R > space.diameter()) break;
                cplx mk;
                prefix_oscillation(space, f, ro, ro.count_below(R), &mk);
                worst = std::max(worst, std::abs(mk - m0) / (bmo * k));
            }
        }
    }
    return worst;
}

}  // namespace hotype
