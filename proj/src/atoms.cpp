#include "hotype/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace hotype {

MomentSpec moment_spec(double p, double gamma, double beta) {
    if (!(p > 0 && p <= 1.0)) throw Error("p must lie in (0,1]");
    if (!(gamma > 0)) throw Error("gamma must be positive");
    MomentSpec s;
    s.p = p;
    s.gamma = gamma;
    s.beta = beta;
    const double x = gamma * (1.0 / p - 1.0);
    const double m = std::round(x);
    s.k = std::abs(x - m) <= 1e-9 ? static_cast<int>(m) : static_cast<int>(std::floor(x));
    s.alpha = std::max(0.0, 1.0 / p - 1.0 - s.k / gamma);
    s.hypothesis_ok = gamma * s.alpha <= beta + 1e-12;
    return s;
}

std::string to_string(AtomKind k) { return k == AtomKind::SupNormalized ? "sup" : "l2"; }
std::string to_string(AtomProfile p) { return p == AtomProfile::Uniform ? "uniform" : "smooth"; }

static double legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return p0;
    for (int k = 1; k < n; ++k) {
        const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

namespace {

struct BallSystem {
    Eigen::MatrixXd U;      // orthonormal basis of W^{1/2} V
    Eigen::VectorXd sqrtw;
    double mu = 0.0;
    double scale = 1.0;
};

BallSystem ball_system(const DiscreteSpace& space, const PolynomialFamily& family, const Ball& b, int k) {
    BallSystem bs;
    bs.scale = ball_scale(space, b);
    const Eigen::MatrixXd V = family.evaluate(space, space.point(b.center), k, b.members, bs.scale);
    const std::size_t m = V.cols();
    if (b.members.size() < m + 1)
        throw DegenerateBall("ball has " + std::to_string(b.members.size()) + " points; needs at least " +
                             std::to_string(m + 1));
    bs.sqrtw.resize(b.members.size());
    for (std::size_t r = 0; r < b.members.size(); ++r) {
        bs.sqrtw[r] = std::sqrt(space.weight(b.members[r]));
        bs.mu += space.weight(b.members[r]);
    }
    const Eigen::MatrixXd A = bs.sqrtw.asDiagonal() * V;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(sv.size() - 1) >= 1e-8 * sv(0)))
        throw DegenerateBall("polynomial span is rank deficient on this ball");
    bs.U = svd.matrixU();
    return bs;
}

// remove the polynomial part in the weighted inner product; returns values on members
Eigen::VectorXd project_out(const BallSystem& bs, const Eigen::VectorXd& v) {
    Eigen::VectorXd y = bs.sqrtw.cwiseProduct(v);
    for (int pass = 0; pass < 2; ++pass) y -= bs.U * (bs.U.transpose() * y);
    return y.cwiseQuotient(bs.sqrtw);
}

Eigen::VectorXd draw_profile(const DiscreteSpace& space, const Ball& b, double scale, AtomProfile profile,
                             std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd v(b.members.size());
    if (profile == AtomProfile::Uniform) {
        for (Eigen::Index r = 0; r < v.size(); ++r) v[r] = rng.uniform(-1.0, 1.0);
        return v;
    }
    // smooth: random Legendre products of total degree <= deg in local coordinates
    const Point c = space.point(b.center);
    const std::size_t dims = space.stride();
    const int deg = dims == 1 ? 6 : 4;
    std::vector<std::vector<int>> ex;
    std::vector<int> cur(dims, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
        if (pos == dims) {
            ex.push_back(cur);
            return;
        }
        for (int a = 0; a <= left; ++a) {
            cur[pos] = a;
            rec(pos + 1, left - a);
        }
        cur[pos] = 0;
    };
    rec(0, deg);
    std::vector<double> coef(ex.size());
    for (double& x : coef) x = rng.uniform(-1.0, 1.0);
    for (std::size_t r = 0; r < b.members.size(); ++r) {
        const double* g = space.coords(b.members[r]);
        double acc = 0;
        for (std::size_t t = 0; t < ex.size(); ++t) {
            double term = coef[t];
            for (std::size_t a = 0; a < dims; ++a)
                term *= legendre(ex[t][a], std::clamp((g[a] - c.coords[a]) / scale, -1.0, 1.0));
            acc += term;
        }
        v[r] = acc;
    }
    return v;
}

double size_measure(const DiscreteSpace& space, const Atom& a, AtomKind kind, double mu) {
    double s = 0;
    if (kind == AtomKind::SupNormalized) {
        for (std::size_t i : a.ball.members) s = std::max(s, std::abs(a.function.values[i]));
        return s;
    }
    for (std::size_t i : a.ball.members) s += std::norm(a.function.values[i]) * space.weight(i);
    return std::sqrt(s / mu);
}

}  // namespace

std::vector<double> moment_residuals(const DiscreteSpace& space, const Atom& a, const Eigen::MatrixXd& basis) {
    std::vector<double> res(basis.cols(), 0.0);
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        cplx acc = 0;
        for (std::size_t r = 0; r < a.ball.members.size(); ++r) {
            const std::size_t i = a.ball.members[r];
            acc += a.function.values[i] * basis(r, c) * space.weight(i);
        }
        res[c] = std::abs(acc);
    }
    return res;
}

Atom make_atom(const DiscreteSpace& space, const PolynomialFamily& family, const Ball& b, const MomentSpec& spec,
               AtomKind kind, std::uint64_t seed, AtomProfile profile) {
    family.check(space, spec.k);
    if (b.members.empty()) throw DegenerateBall("empty ball");
    const BallSystem bs = ball_system(space, family, b, spec.k);
    Eigen::VectorXd v = project_out(bs, draw_profile(space, b, bs.scale, profile, seed));
    double size;
    if (kind == AtomKind::SupNormalized) {
        size = v.cwiseAbs().maxCoeff();
    } else {
        double acc = 0;
        for (Eigen::Index r = 0; r < v.size(); ++r) acc += v[r] * v[r] * space.weight(b.members[r]);
        size = std::sqrt(acc / bs.mu);
    }
    if (!(size > 0)) throw DegenerateBall("projected profile vanished on the ball");
    v *= std::pow(bs.mu, -1.0 / spec.p) / size;
    Atom a;
    a.ball = b;
    a.spec = spec;
    a.kind = kind;
    a.profile = profile;
    a.seed = seed;
    std::vector<cplx> vals(space.size(), 0.0);
    for (std::size_t r = 0; r < b.members.size(); ++r) vals[b.members[r]] = v[r];
    a.function = DiscreteFunction(space, std::move(vals));
    a.moment_residuals =
        moment_residuals(space, a, family.evaluate(space, space.point(b.center), spec.k, b.members, bs.scale));
    return a;
}

AtomCheck verify_atom_as(const DiscreteSpace& space, const PolynomialFamily& family, const Atom& a, AtomKind kind) {
    AtomCheck chk;
    a.function.check(space);
    std::vector<char> in(space.size(), 0);
    double mu = 0, amax = 0;
    for (std::size_t i : a.ball.members) {
        space.check_index(i);
        in[i] = 1;
        mu += space.weight(i);
        amax = std::max(amax, std::abs(a.function.values[i]));
    }
    for (std::size_t i = 0; i < space.size(); ++i)
        if (!in[i]) chk.outside_max = std::max(chk.outside_max, std::abs(a.function.values[i]));
    chk.support = chk.outside_max == 0.0;
    const double allowed = std::pow(mu, -1.0 / a.spec.p);
    chk.size_slack = size_measure(space, a, kind, mu) / allowed;
    chk.size = chk.size_slack <= 1.0 + 1e-12;
    const Eigen::MatrixXd P =
        family.evaluate(space, space.point(a.ball.center), a.spec.k, a.ball.members, ball_scale(space, a.ball));
    chk.residuals = moment_residuals(space, a, P);
    chk.moment_slack = 0;
    for (Eigen::Index c = 0; c < P.cols(); ++c) {
        const double pmax = P.col(c).cwiseAbs().maxCoeff();
        const double tol = 1e-10 * amax * mu * pmax;
        const double slack = tol > 0 ? chk.residuals[c] / tol : (chk.residuals[c] > 0 ? INFINITY : 0.0);
        chk.moment_slack = std::max(chk.moment_slack, slack);
    }
    chk.moments = chk.moment_slack <= 1.0;
    return chk;
}

AtomCheck verify_atom(const DiscreteSpace& space, const PolynomialFamily& family, const Atom& a) {
    return verify_atom_as(space, family, a, a.kind);
}

cplx pairing(const DiscreteSpace& space, const DiscreteFunction& f, const Atom& a) {
    f.check(space);
    a.function.check(space);
    cplx acc = 0;
    for (std::size_t i : a.ball.members) acc += f.values[i] * a.function.values[i] * space.weight(i);
    return acc;
}

Ensemble atom_ensemble(const DiscreteSpace& space, const PolynomialFamily& family, const MomentSpec& spec,
                       const EnsembleSpec& es) {
    family.check(space, spec.k);
    Ensemble ens;
    const std::size_t span = family.exponents(space, spec.k).size();
    const std::size_t need = es.min_points_factor * span + 1;
    std::vector<std::size_t> centers = es.centers;
    if (centers.empty()) {
        GridSpec gs;
        gs.num_centers = std::min<std::size_t>(space.size(), 64);
        gs.seed = derive_seed(es.seed, 0xce);
        centers = sample_grid(space, gs).centers;
    }
    ens.scales = es.scales;
    if (ens.scales.empty()) {
        GridSpec gs;
        gs.num_centers = 1;
        gs.seed = derive_seed(es.seed, 0x5c);
        for (double r : sample_grid(space, gs).radii) {
            if (r > space.diameter() / 2) continue;
            // keep radii whose balls hold enough points at every sampled center
            bool ok = true;
            for (std::size_t k = 0; k < std::min<std::size_t>(centers.size(), 8) && ok; ++k)
                ok = radial_order(space, centers[k]).count_below(r) >= need;
            if (ok) ens.scales.push_back(r);
        }
    }
    if (ens.scales.empty()) throw ResolutionError("no admissible atom scales in this space");
    std::sort(ens.scales.begin(), ens.scales.end());
    std::map<std::size_t, RadialOrder> cache;
    Rng pick(derive_seed(es.seed, 0xa7));
    std::size_t attempts = 0;
    for (std::size_t j = 0; ens.atoms.size() < es.num_atoms && attempts < 4 * es.num_atoms + 16; ++j, ++attempts) {
        const std::size_t c = centers[pick.below(centers.size())];
        const std::size_t s = j % ens.scales.size();
        auto it = cache.find(c);
        if (it == cache.end()) it = cache.emplace(c, radial_order(space, c)).first;
        const Ball b = it->second.ball(ens.scales[s]);
        const std::uint64_t seed = derive_seed(derive_seed(es.seed, c, s), j);
        try {
            if (b.members.size() < need) throw DegenerateBall("too few points");
            ens.atoms.push_back(make_atom(space, family, b, spec, es.kind, seed, es.profile));
            ens.scale_index.push_back(s);
        } catch (const DegenerateBall&) {
            ++ens.rejected;
        }
    }
    return ens;
}

DualityReport duality_experiment(const DiscreteSpace& space, const PolynomialFamily& family, const DiscreteFunction& f,
                                 const MomentSpec& spec, std::size_t num_atoms, std::uint64_t seed,
                                 const SampleGrid* grid, const EnsembleSpec* ens_spec) {
    if (num_atoms < 20) throw Error("duality_experiment needs at least 20 atoms");
    f.check(space);
    EnsembleSpec es = ens_spec ? *ens_spec : EnsembleSpec{};
    es.num_atoms = num_atoms;
    es.seed = seed;
    const Ensemble ens = atom_ensemble(space, family, spec, es);
    DualityReport rep;
    rep.atoms = ens.atoms.size();
    const SampleGrid g = grid ? *grid : sample_grid(space);
    rep.campanato = campanato_norm(space, family, f, spec.alpha, spec.k, 1.0, g).value;
    const double fmax = f.sup_norm();
    rep.raw = !(rep.campanato > 1e-12 * std::max(1.0, fmax));
    std::vector<ScaleRow> rows(ens.scales.size());
    for (std::size_t s = 0; s < rows.size(); ++s) rows[s].scale = ens.scales[s];
    for (std::size_t a = 0; a < ens.atoms.size(); ++a) {
        const Atom& at = ens.atoms[a];
        const double pr = std::abs(pairing(space, f, at));
        const double scale = fmax * std::pow(at.ball.measure, 1.0 - 1.0 / spec.p);
        rep.max_raw_pairing = std::max(rep.max_raw_pairing, pr);
        if (scale > 0) rep.max_scaled_pairing = std::max(rep.max_scaled_pairing, pr / scale);
        const double ratio = rep.raw ? pr : pr / rep.campanato;
        ScaleRow& row = rows[ens.scale_index[a]];
        row.max_ratio = std::max(row.max_ratio, ratio);
        ++row.count;
        rep.sup_ratio = std::max(rep.sup_ratio, ratio);
    }
    double run = 0;
    for (std::size_t s = rows.size(); s-- > 0;) {
        run = std::max(run, rows[s].max_ratio);
        rows[s].running_sup = run;
    }
    std::vector<double> lx, ly, ry;
    for (const auto& r : rows)
        if (r.count > 0 && r.running_sup > 0 && r.max_ratio > 0) {
            lx.push_back(std::log(r.scale));
            ly.push_back(std::log(r.running_sup));
            ry.push_back(std::log(r.max_ratio));
        }
    rep.slope = lx.size() >= 2 ? ls_slope(lx, ly) : 0.0;
    rep.raw_slope = lx.size() >= 2 ? ls_slope(lx, ry) : 0.0;
    rep.per_scale = std::move(rows);
    return rep;
}

DecompositionUpperBound decomposition_upper_bound(const DiscreteSpace& space, const PolynomialFamily& family,
                                                  const DiscreteFunction& f, const MomentSpec& spec,
                                                  const std::vector<Ball>& ball_family) {
    f.check(space);
    family.check(space, spec.k);
    DecompositionUpperBound res;
    std::vector<std::size_t> order(ball_family.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ball_family[a].radius != ball_family[b].radius) return ball_family[a].radius > ball_family[b].radius;
        return ball_family[a].center < ball_family[b].center;
    });
    DiscreteFunction g = f;
    const double fnorm = lp_norm(space, f, 2.0);
    for (std::size_t idx : order) {
        const Ball& b = ball_family[idx];
        const BallSystem bs = ball_system(space, family, b, spec.k);
        Eigen::VectorXd re(b.members.size()), im(b.members.size());
        for (std::size_t r = 0; r < b.members.size(); ++r) {
            re[r] = g.values[b.members[r]].real();
            im[r] = g.values[b.members[r]].imag();
        }
        const Eigen::VectorXd hr = project_out(bs, re), hi = project_out(bs, im);
        double hmax = 0;
        for (Eigen::Index r = 0; r < hr.size(); ++r) hmax = std::max(hmax, std::abs(cplx(hr[r], hi[r])));
        if (!(hmax > 1e-14 * std::max(1.0, f.sup_norm()))) continue;
        const double lambda = hmax * std::pow(bs.mu, 1.0 / spec.p);
        Atom a;
        a.ball = b;
        a.spec = spec;
        a.kind = AtomKind::SupNormalized;
        std::vector<cplx> vals(space.size(), 0.0);
        for (std::size_t r = 0; r < b.members.size(); ++r) {
            const cplx h(hr[r], hi[r]);
            vals[b.members[r]] = h / lambda;
            g.values[b.members[r]] -= h;
        }
        a.function = DiscreteFunction(space, std::move(vals));
        a.moment_residuals =
            moment_residuals(space, a, family.evaluate(space, space.point(b.center), spec.k, b.members, bs.scale));
        res.lambdas.push_back(lambda);
        res.atoms.push_back(std::move(a));
        res.value += std::pow(lambda, spec.p);
    }
    res.remainder = fnorm > 0 ? lp_norm(space, g, 2.0) / fnorm : 0.0;
    res.converged = res.remainder <= 1e-3;
    return res;
}

}  // namespace hotype
