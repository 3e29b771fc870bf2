#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace hotype::harness::detail {

namespace {

std::string num(double v) { return fmt_double(v); }

Criterion crit(std::string name, bool pass, std::string detail) {
    return {std::move(name), pass, std::move(detail)};
}

std::size_t count_param(const Config& cfg, const std::string& key, long min = 1) {
    const long v = cfg.integer(key);
    if (v < min) throw SchemaError(key + ": must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

double positive_param(const Config& cfg, const std::string& key) {
    const double v = cfg.real(key);
    if (!(v > 0)) throw SchemaError(key + ": must be positive");
    return v;
}

void require_points(const DiscreteSpace& s, std::size_t max, const std::string& suite) {
    if (s.size() > max)
        throw BudgetExceeded(suite + " builds dense matrices and is limited to " + std::to_string(max) + " points, got " +
                             std::to_string(s.size()));
}

void require_line(const DiscreteSpace& s, const std::string& what) {
    if (s.kind() != SpaceKind::Euclidean || s.param() != 1) throw KindMismatch(what + " needs a 1D grid space");
}

double stored_or(double v, double fallback) { return v > 0 ? v : fallback; }

std::string level_tag(int l) { return "L" + std::to_string(l); }

double max_rel_spread(const std::vector<double>& v) {
    double out = 0;
    for (double x : v) out = std::max(out, std::abs(x / v.front() - 1.0));
    return out;
}

std::vector<double> mean_measures(const std::vector<RadialOrder>& ro, const std::vector<double>& radii,
                                  std::vector<double>* counts = nullptr) {
    std::vector<double> mu;
    if (counts) counts->clear();
    for (double r : radii) {
        double m = 0, c = 0;
        for (const auto& o : ro) {
            m += o.measure_below(r);
            c += static_cast<double>(o.count_below(r));
        }
        mu.push_back(m / ro.size());
        if (counts) counts->push_back(c / ro.size());
    }
    return mu;
}

}  // namespace

std::uint64_t unit_seed(const Config& cfg, const std::string& unit) {
    return derive_seed(static_cast<std::uint64_t>(cfg.integer("run.seed")), fnv1a(cfg.get("run.suite") + "/" + unit));
}

// ---------------------------------------------------------------- space-cert

Plan space_cert_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    const double gamma_exp = stored_or(cfg.real("params.gamma_expected"), space.constants().gamma);
    const double gamma_tol = positive_param(cfg, "params.gamma_tol");
    const std::size_t samples = count_param(cfg, "params.samples", 30);

    plan.units.push_back([&space, &cfg, gamma_exp, gamma_tol, samples] {
        UnitOutput o;
        const auto dr = doubling_report(space, samples, unit_seed(cfg, "doubling"));
        o.criteria.push_back(crit("doubling.K_finite", std::isfinite(dr.K_est) && dr.K_est >= 1.0, "K_est " + num(dr.K_est)));
        const bool g_ok = std::abs(dr.gamma_fit - gamma_exp) <= gamma_tol * gamma_exp;
        o.criteria.push_back(crit("doubling.gamma_fit", g_ok,
                                  "gamma_fit " + num(dr.gamma_fit) + " against " + num(gamma_exp) + " within " +
                                      num(gamma_tol)));
        o.constants = {{"doubling.K_est", dr.K_est},
                       {"doubling.gamma_fit", dr.gamma_fit},
                       {"doubling.beta_est", dr.beta_est},
                       {"doubling.resolved_radii", static_cast<double>(dr.radii.size())}};
        GridSpec gs;
        gs.num_centers = samples;
        gs.seed = unit_seed(cfg, "doubling");
        const SampleGrid g = sample_grid(space, gs);
        std::vector<RadialOrder> ro;
        for (std::size_t c : g.centers) ro.push_back(radial_order(space, c));
        std::vector<double> counts;
        const auto mu = mean_measures(ro, dr.radii, &counts);
        Table t{"growth_curve", {"r [distance]", "mean mu(B) [measure]", "mean count [points]"}, {}};
        for (std::size_t i = dr.radii.size(); i-- > 0;) t.rows.push_back({dr.radii[i], mu[i], counts[i]});
        o.tables.push_back(std::move(t));
        return o;
    });

    plan.units.push_back([&space, &cfg] {
        UnitOutput o;
        const auto en = check_engulfing(space, count_param(cfg, "params.engulf_samples"), unit_seed(cfg, "engulfing"));
        o.criteria.push_back(crit("engulfing.no_violations", en.violations == 0,
                                  std::to_string(en.violations) + " of " + std::to_string(en.pairs) + " pairs at c " +
                                      num(en.c)));
        const auto qt = quasi_triangle(space, count_param(cfg, "params.quasi_triples"), unit_seed(cfg, "quasi-triangle"));
        const double A = space.constants().A;
        o.criteria.push_back(crit("quasi_triangle.within_stored", qt.constant <= A * (1 + 1e-12),
                                  "sampled " + num(qt.constant) + " against stored " + num(A)));
        o.constants = {{"engulfing.c", en.c},
                       {"engulfing.pairs", static_cast<double>(en.pairs)},
                       {"quasi_triangle.constant", qt.constant}};
        return o;
    });

    plan.units.push_back([&space, &cfg] {
        UnitOutput o;
        const std::size_t nballs = count_param(cfg, "params.cover_balls");
        GridSpec gs;
        gs.num_centers = nballs;
        gs.seed = unit_seed(cfg, "cover");
        const SampleGrid g = sample_grid(space, gs);
        Rng rng(derive_seed(gs.seed, 1));
        std::vector<Ball> balls;
        // radii from the middle third of the grid
        const std::size_t nr = g.radii.size();
        const std::size_t lo = nr / 3, span = std::max<std::size_t>(1, nr / 3);
        for (std::size_t c : g.centers) {
            const std::size_t ri = std::min(nr - 1, lo + rng.below(span));
            balls.push_back(ball(space, c, g.radii[ri]));
        }
        const auto cv = vitali_cover(space, balls);
        o.criteria.push_back(crit("cover.disjoint", cv.disjoint, std::to_string(cv.selected.size()) + " balls selected"));
        o.criteria.push_back(crit("cover.covers", cv.covers, "dilation " + num(cv.dilation)));
        o.constants = {{"cover.selected", static_cast<double>(cv.selected.size())},
                       {"cover.valence", static_cast<double>(cv.valence)},
                       {"cover.dilation", cv.dilation}};
        return o;
    });

    plan.units.push_back([&space, &cfg] {
        UnitOutput o;
        std::vector<double> radii;
        for (double f : cfg.reals("params.integral_radii")) {
            if (!(f > 0 && f <= 1)) throw SchemaError("params.integral_radii: fractions must lie in (0, 1]");
            radii.push_back(f * space.diameter());
        }
        Table t{"integral_bound", {"s [exponent]", "C_s [ratio]"}, {}};
        bool ok = true;
        std::string detail;
        for (double s : cfg.reals("params.integral_s")) {
            if (!(s > 1)) throw SchemaError("params.integral_s: exponents must exceed 1");
            const auto ib = integral_bound_check(space, s, radii, count_param(cfg, "params.integral_centers"),
                                                 unit_seed(cfg, "integral"));
            ok = ok && std::isfinite(ib.constant) && ib.constant > 0;
            o.constants.emplace_back("integral.C_s" + num(s), ib.constant);
            t.rows.push_back({s, ib.constant});
            detail += (detail.empty() ? "" : ", ") + ("C_" + num(s) + " = " + num(ib.constant));
        }
        o.criteria.push_back(crit("integral.bounded", ok, detail));
        o.tables.push_back(std::move(t));
        return o;
    });

    plan.units.push_back([&space, &cfg] {
        UnitOutput o;
        const auto gr = lower_growth_check(space, static_cast<int>(count_param(cfg, "params.growth_jmax")),
                                           count_param(cfg, "params.growth_centers"), unit_seed(cfg, "growth"));
        o.criteria.push_back(crit("growth.lower_bound", std::isfinite(gr.eps0) && gr.eps0 > 0 && std::isfinite(gr.upper),
                                  "eps0 " + num(gr.eps0) + ", upper " + num(gr.upper)));
        o.constants = {{"growth.eps0", gr.eps0}, {"growth.upper", gr.upper}, {"growth.samples", double(gr.samples)}};
        return o;
    });
    return plan;
}

// ---------------------------------------------------------------- norms

namespace {

DiscreteSpace normalized_level(const Config& cfg, const DiscreteSpace& base0, int level, double gamma) {
    if (level == 0 && base0.metric().normalized) return base0;
    DiscreteSpace b = level == 0 ? base0 : build_space(cfg, level);
    if (b.metric().normalized) return b;
    return normalize_metric(b, gamma);
}

std::vector<DiscreteFunction> smooth_family(const DiscreteSpace& s, std::size_t n, std::uint64_t seed) {
    std::vector<DiscreteFunction> out;
    Rng rng(seed);
    const double freqs[3] = {1.0, 2.0, 4.0};
    const double scale = s.kind() == SpaceKind::Euclidean ? 1.0 : 2.0 / s.diameter();
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> v(s.stride(), 0.0);
        if (s.stride() == 1) {
            v[0] = 1.0;
        } else {
            double nrm = 0;
            for (double& x : v) {
                x = rng.normal();
                nrm += x * x;
            }
            for (double& x : v) x /= std::sqrt(nrm);
        }
        const double w = freqs[j % 3] * scale;
        const double ph = (j / 3) % 2 ? 0.7 : 0.0;
        out.push_back(DiscreteFunction::from(s, [v, w, ph](const double* x) {
            double t = 0;
            for (std::size_t a = 0; a < v.size(); ++a) t += v[a] * x[a];
            return cplx(std::sin(w * t + ph));
        }));
    }
    return out;
}

}  // namespace

Plan norms_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    const double gamma = stored_or(cfg.real("params.gamma"), space.constants().gamma);
    const int refine = static_cast<int>(count_param(cfg, "params.refine", 0));
    const auto alphas = cfg.reals("params.alphas");
    std::vector<int> ks;
    for (double k : cfg.reals("params.ks")) {
        if (k < 0 || k != std::floor(k)) throw SchemaError("params.ks: degrees must be nonnegative integers");
        ks.push_back(static_cast<int>(k));
    }
    for (double a : alphas)
        if (!(a > 0 && a <= 1)) throw SchemaError("params.alphas: exponents must lie in (0, 1]");

    plan.units.push_back([&cfg, &space, gamma] {
        UnitOutput o;
        const DiscreteSpace n = normalized_level(cfg, space, 0, gamma);
        GridSpec gs;
        gs.num_centers = count_param(cfg, "params.fit_centers", 2);
        gs.seed = unit_seed(cfg, "normalization");
        const SampleGrid g = sample_grid(n, gs);
        std::vector<RadialOrder> ro;
        for (std::size_t c : g.centers) ro.push_back(radial_order(n, c));
        // 32 log-spaced radii between the separation and the diameter
        std::vector<double> cand;
        const double lo = std::log(n.min_distance()), hi = std::log(n.diameter());
        for (int i = 0; i < 32; ++i) cand.push_back(std::exp(lo + (hi - lo) * i / 31.0));
        std::vector<double> counts;
        const auto mu = mean_measures(ro, cand, &counts);
        std::vector<double> used;
        for (std::size_t i = 0; i < cand.size(); ++i)
            if (counts[i] >= 8.0 && mu[i] <= 0.25 * n.total_measure()) used.push_back(cand[i]);
        Table t{"normalized_growth", {"r [normalized distance]", "mean mu(B) [measure]"}, {}};
        for (std::size_t i = 0; i < cand.size(); ++i) t.rows.push_back({cand[i], mu[i]});
        o.tables.push_back(std::move(t));
        if (used.size() < 2) {
            o.criteria.push_back(crit("normalization.exponent", false, "fewer than two resolved radii"));
            return o;
        }
        std::vector<double> lx, ly;
        for (const auto& r : ro)
            for (double rad : used) {
                lx.push_back(std::log(rad));
                ly.push_back(std::log(r.measure_below(rad)));
            }
        const double slope = ls_slope(lx, ly);
        const double decades = std::log10(used.back() / used.front());
        const double tol = positive_param(cfg, "params.fit_tol");
        const double need = cfg.real("params.min_decades");
        o.criteria.push_back(crit("normalization.exponent", std::abs(slope - gamma) <= tol * gamma && decades >= need,
                                  "exponent " + num(slope) + " against " + num(gamma) + " over " + num(decades) +
                                      " decades"));
        o.constants = {{"normalization.exponent", slope},
                       {"normalization.decades", decades},
                       {"normalization.r_min", used.front()},
                       {"normalization.r_max", used.back()},
                       {"normalization.A", n.constants().A}};
        return o;
    });

    for (int l = 0; l <= refine; ++l)
        plan.units.push_back([&cfg, &space, gamma, alphas, ks, l] {
            UnitOutput o;
            const DiscreteSpace n = normalized_level(cfg, space, l, gamma);
            const auto fam = PolynomialFamily::for_space(n);
            const SampleGrid grid = sample_grid(n);
            const auto fs = smooth_family(n, count_param(cfg, "params.family"), unit_seed(cfg, "family"));
            const std::string tag = "equivalence." + level_tag(l);
            o.constants.emplace_back(tag + ".points", static_cast<double>(n.size()));
            for (double a : alphas) {
                for (int k : ks) {
                    double lip_lo = INFINITY, lip_hi = 0, q_hi = 0;
                    for (const auto& f : fs) {
                        const double c1 = campanato_norm(n, fam, f, a, k, 1.0, grid).value;
                        const double ci = campanato_norm(n, fam, f, a, k, INFINITY, grid).value;
                        q_hi = std::max(q_hi, ci / c1);
                        if (k == 0) {
                            const double r = c1 / lipschitz_norm(n, f, a).value;
                            lip_lo = std::min(lip_lo, r);
                            lip_hi = std::max(lip_hi, r);
                        }
                    }
                    const std::string ak = "_a" + num(a) + "_k" + std::to_string(k);
                    if (k == 0) {
                        o.constants.emplace_back(tag + ".lip_ratio_min_a" + num(a), lip_lo);
                        o.constants.emplace_back(tag + ".lip_ratio_max_a" + num(a), lip_hi);
                    }
                    o.constants.emplace_back(tag + ".q_constant" + ak, q_hi);
                }
            }
            return o;
        });

    plan.finish = [&cfg, alphas, ks, refine](UnitOutput& o) {
        auto get = [&](const std::string& k) {
            for (const auto& [n, v] : o.constants)
                if (n == k) return v;
            throw Error("missing constant " + k);
        };
        const double lo = cfg.real("params.ratio_lo"), hi = cfg.real("params.ratio_hi");
        const double tol = positive_param(cfg, "params.stability_tol");
        bool have_lip = false, lip_ok = true, q_ok = true;
        double worst_lo = INFINITY, worst_hi = 0, worst_spread = 0;
        Table t{"q_constants", {"alpha [exponent]", "k [degree]", "level [refinements]", "C_q [ratio]"}, {}};
        for (double a : alphas)
            for (int k : ks) {
                std::vector<double> qs;
                for (int l = 0; l <= refine; ++l) {
                    const std::string tag = "equivalence." + level_tag(l);
                    qs.push_back(get(tag + ".q_constant_a" + num(a) + "_k" + std::to_string(k)));
                    t.rows.push_back({a, double(k), double(l), qs.back()});
                    if (k == 0) {
                        have_lip = true;
                        const double rl = get(tag + ".lip_ratio_min_a" + num(a));
                        const double rh = get(tag + ".lip_ratio_max_a" + num(a));
                        worst_lo = std::min(worst_lo, rl);
                        worst_hi = std::max(worst_hi, rh);
                        lip_ok = lip_ok && rl >= lo && rh <= hi;
                    }
                }
                const double spread = max_rel_spread(qs);
                worst_spread = std::max(worst_spread, spread);
                q_ok = q_ok && std::all_of(qs.begin(), qs.end(), [](double v) { return std::isfinite(v); }) &&
                       spread <= tol;
            }
        if (have_lip)
            o.criteria.push_back(crit("equivalence.lipschitz_ratio", lip_ok,
                                      "ratios in [" + num(worst_lo) + ", " + num(worst_hi) + "] against [" + num(lo) +
                                          ", " + num(hi) + "]"));
        if (refine > 0)
            o.criteria.push_back(crit("equivalence.q_constant_stable", q_ok,
                                      "largest refinement spread " + num(worst_spread) + " against " + num(tol)));
        else
            o.notes.push_back("q-constant refinement stability not assessed (params.refine = 0)");
        o.tables.push_back(std::move(t));
    };
    return plan;
}

// ---------------------------------------------------------------- atoms

namespace {

MomentSpec suite_spec(const Config& cfg, const DiscreteSpace& space, const std::string& pkey, const std::string& kkey) {
    const double p = cfg.real(pkey);
    if (!(p > 0 && p <= 1)) throw SchemaError(pkey + ": must lie in (0, 1]");
    MomentSpec spec = moment_spec(p, space.constants().gamma, space.constants().beta);
    if (!kkey.empty()) {
        const long k = cfg.integer(kkey);
        if (k < -1) throw SchemaError(kkey + ": must be -1 or a degree");
        if (k >= 0) spec.k = static_cast<int>(k);
    }
    return spec;
}

AtomKind atom_kind(const Config& cfg) {
    const std::string k = cfg.get("params.kind");
    if (k == "sup") return AtomKind::SupNormalized;
    if (k == "l2") return AtomKind::L2Normalized;
    throw SchemaError("params.kind: expected sup or l2, got '" + k + "'");
}

AtomProfile atom_profile(const Config& cfg) {
    const std::string k = cfg.get("params.profile");
    if (k == "uniform") return AtomProfile::Uniform;
    if (k == "smooth") return AtomProfile::Smooth;
    throw SchemaError("params.profile: expected uniform or smooth, got '" + k + "'");
}

}  // namespace

Plan atoms_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    const MomentSpec spec = suite_spec(cfg, space, "params.p", "params.k");
    const AtomKind kind = atom_kind(cfg);
    const AtomProfile profile = atom_profile(cfg);
    plan.units.push_back([&cfg, &space, spec, kind, profile] {
        UnitOutput o;
        const auto fam = PolynomialFamily::for_space(space);
        EnsembleSpec es;
        es.num_atoms = count_param(cfg, "params.num_atoms");
        es.seed = unit_seed(cfg, "ensemble");
        es.kind = kind;
        es.profile = profile;
        const Ensemble ens = atom_ensemble(space, fam, spec, es);
        std::size_t ok = 0, ok2 = 0;
        double size_slack = 0, mom_slack = 0, outside = 0;
        std::vector<double> scale_max(ens.scales.size(), 0.0);
        std::vector<double> scale_count(ens.scales.size(), 0.0);
        for (std::size_t j = 0; j < ens.atoms.size(); ++j) {
            const auto c = verify_atom(space, fam, ens.atoms[j]);
            const auto c2 = verify_atom_as(space, fam, ens.atoms[j], AtomKind::L2Normalized);
            ok += c.pass();
            ok2 += c2.pass();
            size_slack = std::max(size_slack, c.size_slack);
            mom_slack = std::max(mom_slack, c.moment_slack);
            outside = std::max(outside, c.outside_max);
            const std::size_t s = ens.scale_index[j];
            scale_max[s] = std::max(scale_max[s], c.moment_slack);
            scale_count[s] += 1;
        }
        const std::size_t n = ens.atoms.size();
        o.criteria.push_back(crit("atoms.ensemble_size", n == es.num_atoms,
                                  std::to_string(n) + " atoms, " + std::to_string(ens.rejected) + " rejected draws"));
        o.criteria.push_back(crit("atoms.certificates", ok == n && n > 0,
                                  std::to_string(ok) + " of " + std::to_string(n) + " pass; worst size slack " +
                                      num(size_slack) + ", moment slack " + num(mom_slack)));
        o.criteria.push_back(crit("atoms.p2_check", ok2 == n && n > 0,
                                  std::to_string(ok2) + " of " + std::to_string(n) + " pass as (p,2)-atoms"));
        o.constants = {{"atoms.k", double(spec.k)},
                       {"atoms.alpha", spec.alpha},
                       {"atoms.hypothesis_ok", spec.hypothesis_ok ? 1.0 : 0.0},
                       {"atoms.count", double(n)},
                       {"atoms.rejected", double(ens.rejected)},
                       {"atoms.max_size_slack", size_slack},
                       {"atoms.max_moment_slack", mom_slack},
                       {"atoms.max_outside", outside}};
        Table t{"per_scale", {"scale [distance]", "count [atoms]", "max moment slack [ratio]"}, {}};
        for (std::size_t s = 0; s < ens.scales.size(); ++s) t.rows.push_back({ens.scales[s], scale_count[s], scale_max[s]});
        std::sort(t.rows.begin(), t.rows.end());
        o.tables.push_back(std::move(t));
        return o;
    });
    return plan;
}

// ---------------------------------------------------------------- duality

Plan duality_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    const MomentSpec spec = suite_spec(cfg, space, "params.p", "params.k");
    const auto fns = cfg.strings("params.functions");
    if (fns.empty()) throw SchemaError("params.functions: at least one function is required");
    EnsembleSpec es;
    const auto focus = cfg.reals("params.focus");
    const std::size_t len = space.stride();
    if (focus.size() % len != 0)
        throw SchemaError("params.focus: length must be a multiple of " + std::to_string(len));
    for (std::size_t i = 0; i < focus.size(); i += len) {
        Point p{space.kind(), space.param(), std::vector<double>(focus.begin() + i, focus.begin() + i + len)};
        es.centers.push_back(nearest_index(space, p));
    }
    for (const auto& name : fns) {
        if (name != "smooth" && name != "polynomial" && name != "sign")
            throw SchemaError("params.functions: unknown function '" + name + "'");
        plan.units.push_back([&cfg, &space, spec, name, es] {
            UnitOutput o;
            const double tol = positive_param(cfg, "params.slope_tol");
            DiscreteFunction f;
            if (name == "smooth") {
                const double w = cfg.real("params.frequency");
                f = DiscreteFunction::from(space, [w](const double* x) { return cplx(std::sin(w * x[0])); });
            } else {
                if (space.kind() != SpaceKind::Euclidean)
                    throw UnsupportedFamily("the " + name + " test function is defined on Euclidean spaces");
                if (name == "polynomial") {
                    const int k = spec.k;
                    f = DiscreteFunction::from(space, [k](const double* x) {
                        double v = 0;
                        for (int j = 0; j <= k; ++j) v += (j + 1) * std::pow(x[0], j);
                        return cplx(v);
                    });
                } else {
                    f = DiscreteFunction::from(space, [](const double* x) { return cplx(x[0] > 0 ? 1.0 : -1.0); });
                }
            }
            const auto fam = PolynomialFamily::for_space(space);
            const auto r = duality_experiment(space, fam, f, spec, count_param(cfg, "params.num_atoms", 20),
                                              unit_seed(cfg, "atoms"), nullptr, &es);
            const std::string tag = "duality." + name;
            if (name == "smooth")
                o.criteria.push_back(crit(tag + ".bounded", std::isfinite(r.sup_ratio) && std::abs(r.slope) <= tol,
                                          "sup ratio " + num(r.sup_ratio) + ", slope " + num(r.slope)));
            else if (name == "polynomial")
                o.criteria.push_back(crit(tag + ".annihilation", r.max_scaled_pairing <= cfg.real("params.poly_tol"),
                                          "largest scaled pairing " + num(r.max_scaled_pairing)));
            else
                o.criteria.push_back(crit(tag + ".divergent", r.slope < -tol,
                                          "slope " + num(r.slope) + " against bound -" + num(tol)));
            o.constants = {{tag + ".sup_ratio", r.sup_ratio},     {tag + ".campanato", r.campanato},
                           {tag + ".raw", r.raw ? 1.0 : 0.0},     {tag + ".max_scaled_pairing", r.max_scaled_pairing},
                           {tag + ".slope", r.slope},             {tag + ".raw_slope", r.raw_slope},
                           {tag + ".atoms", double(r.atoms)}};
            Table t{tag + ".per_scale",
                    {"scale [distance]", "max ratio [ratio]", "running sup [ratio]", "count [atoms]"},
                    {}};
            for (const auto& row : r.per_scale) t.rows.push_back({row.scale, row.max_ratio, row.running_sup, double(row.count)});
            o.tables.push_back(std::move(t));
            return o;
        });
    }
    return plan;
}

// ---------------------------------------------------------------- kernel-cert

Plan kernel_cert_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    const auto kernels = cfg.strings("params.kernels");
    if (kernels.empty()) throw SchemaError("params.kernels: at least one kernel is required");
    auto listed = [&](const std::string& key) {
        auto v = cfg.strings(key);
        for (const auto& k : v)
            if (std::find(kernels.begin(), kernels.end(), k) == kernels.end())
                throw SchemaError(key + ": '" + k + "' is not in params.kernels");
        return v;
    };
    const auto exp_pass = listed("params.expect_pass");
    const auto exp_size = listed("params.expect_size_fail");
    const auto exp_wb = listed("params.expect_wb_divergent");
    for (const auto& name : kernels) {
        const Kernel K = kernel_by_name(name, space);
        K.require(space);
        const bool want_pass = std::count(exp_pass.begin(), exp_pass.end(), name) > 0;
        const bool want_size = std::count(exp_size.begin(), exp_size.end(), name) > 0;
        const bool want_wb = std::count(exp_wb.begin(), exp_wb.end(), name) > 0;
        plan.units.push_back([&cfg, &space, K, name, want_pass, want_size, want_wb] {
            UnitOutput o;
            const auto st = standard_kernel_check(space, K, count_param(cfg, "params.samples"),
                                                  unit_seed(cfg, name + "/standard"));
            const auto fam = PolynomialFamily::for_space(space);
            const auto pk = pk_kernel_check(space, fam, K, suite_spec(cfg, space, "params.pk_p", ""),
                                            count_param(cfg, "params.pk_samples"), unit_seed(cfg, name + "/pk"));
            const auto wb = weak_boundedness_probe(space, K, count_param(cfg, "params.wb_pairs"),
                                                   unit_seed(cfg, name + "/wb"));
            if (want_pass) {
                o.criteria.push_back(crit(name + ".standard", st.pass,
                                          "C_size " + num(st.C_size) + ", size slope " + num(st.size_slope) +
                                              ", epsilon_fit " + num(st.epsilon_fit)));
                o.criteria.push_back(crit(name + ".pk", pk.pass,
                                          "degree " + std::to_string(pk.degree) + ", band slope " + num(pk.band_slope)));
                o.criteria.push_back(crit(name + ".weak_boundedness", wb.pass,
                                          "max ratio " + num(wb.max_ratio) + ", slope " + num(wb.slope)));
            }
            if (want_size) {
                const double d = space.distance(st.size_witness.x, st.size_witness.y);
                o.criteria.push_back(crit(name + ".size_fails", !st.size_ok && st.size_witness.value > 0,
                                          "size slope " + num(st.size_slope) + ", witness (" +
                                              std::to_string(st.size_witness.x) + ", " +
                                              std::to_string(st.size_witness.y) + ") at distance " + num(d) +
                                              " with |K| lambda " + num(st.size_witness.value)));
            }
            if (want_wb)
                o.criteria.push_back(crit(name + ".wb_divergent", wb.divergent,
                                          "log trend " + num(wb.log_trend) + " per unit log r, r^2 " +
                                              num(wb.log_trend_r2)));
            o.constants = {{name + ".C_size", st.C_size},
                           {name + ".size_slope", st.size_slope},
                           {name + ".epsilon_fit", st.epsilon_fit},
                           {name + ".C_smooth", st.C_smooth},
                           {name + ".size_ok", st.size_ok ? 1.0 : 0.0},
                           {name + ".smooth_ok", st.smooth_ok ? 1.0 : 0.0},
                           {name + ".size_witness_x", double(st.size_witness.x)},
                           {name + ".size_witness_y", double(st.size_witness.y)},
                           {name + ".size_witness_value", st.size_witness.value},
                           {name + ".pk_constant", pk.fitted_constant},
                           {name + ".pk_band_slope", pk.band_slope},
                           {name + ".pk_pass", pk.pass ? 1.0 : 0.0},
                           {name + ".wb_max_ratio", wb.max_ratio},
                           {name + ".wb_slope", wb.slope},
                           {name + ".wb_log_trend", wb.log_trend},
                           {name + ".wb_log_trend_r2", wb.log_trend_r2},
                           {name + ".wb_pass", wb.pass ? 1.0 : 0.0}};
            Table eps{name + ".epsilon_slopes", {"epsilon [exponent]", "band slope [log ratio per log u]"}, {}};
            for (std::size_t i = 0; i < st.eps_grid.size(); ++i) eps.rows.push_back({st.eps_grid[i], st.eps_slopes[i]});
            Table pkb{name + ".pk_bands", {"u [relative distance]", "max ratio [ratio]"}, {}};
            for (const auto& [u, v] : pk.bands) pkb.rows.push_back({u, v});
            Table w{name + ".wb_per_scale", {"r [distance]", "max ratio [ratio]"}, {}};
            for (const auto& [r, v] : wb.per_scale) w.rows.push_back({r, v});
            o.tables.push_back(std::move(eps));
            o.tables.push_back(std::move(pkb));
            o.tables.push_back(std::move(w));
            return o;
        });
    }
    return plan;
}

// ---------------------------------------------------------------- hp-bound

Plan hp_bound_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    const Kernel K = kernel_by_name(cfg.get("params.kernel"), space);
    K.require(space);
    const auto runs = cfg.strings("params.runs");
    if (runs.empty()) throw SchemaError("params.runs: at least one run is required");
    for (const auto& run_s : runs) {
        const auto colon = run_s.find(':');
        double p;
        long k;
        try {
            if (colon == std::string::npos) throw std::invalid_argument("no colon");
            std::size_t used = 0;
            p = std::stod(run_s.substr(0, colon), &used);
            if (used != colon) throw std::invalid_argument("p");
            const std::string ks = run_s.substr(colon + 1);
            k = std::stol(ks, &used);
            if (used != ks.size()) throw std::invalid_argument("k");
        } catch (const std::logic_error&) {
            throw SchemaError("params.runs: expected p:k, got '" + run_s + "'");
        }
        if (!(p > 0 && p <= 1) || k < -1) throw SchemaError("params.runs: bad p or k in '" + run_s + "'");
        MomentSpec spec = moment_spec(p, space.constants().gamma, space.constants().beta);
        const int required = spec.k;
        if (k >= 0) spec.k = static_cast<int>(k);
        const bool weakened = spec.k < required;
        const std::string tag = "p" + num(p) + "_k" + std::to_string(spec.k);
        plan.units.push_back([&cfg, &space, K, spec, weakened, required, tag] {
            UnitOutput o;
            HpOptions opt;
            opt.dilation_pairs = count_param(cfg, "params.dilation_pairs", 0);
            opt.near_factor = positive_param(cfg, "params.near_factor");
            const auto fam = PolynomialFamily::for_space(space);
            const auto r = hp_boundedness_suite(space, fam, K, spec, count_param(cfg, "params.num_atoms"),
                                                unit_seed(cfg, tag), opt);
            const double tol = positive_param(cfg, "params.slope_tol");
            if (weakened) {
                const double need = cfg.real("params.weak_slope");
                o.criteria.push_back(crit(tag + ".weak_growth", r.slope >= need,
                                          "slope " + num(r.slope) + " against required growth " + num(need) +
                                              " (moment degree " + std::to_string(spec.k) + " below " +
                                              std::to_string(required) + ")"));
            } else {
                o.criteria.push_back(crit(tag + ".slope", std::abs(r.slope) <= tol && std::isfinite(r.max_norm_pp),
                                          "slope " + num(r.slope) + ", max ||Ta||_p^p " + num(r.max_norm_pp)));
                const double dt = positive_param(cfg, "params.dilation_tol");
                o.criteria.push_back(crit(tag + ".dilation", r.dilation_pairs > 0 && r.dilation_max_rel_diff <= dt,
                                          "largest relative difference " + num(r.dilation_max_rel_diff) + " over " +
                                              std::to_string(r.dilation_pairs) + " pairs"));
            }
            o.constants = {{tag + ".max_norm_pp", r.max_norm_pp},
                           {tag + ".slope", r.slope},
                           {tag + ".dilation_max_rel_diff", r.dilation_max_rel_diff},
                           {tag + ".dilation_pairs", double(r.dilation_pairs)},
                           {tag + ".near_l2_max", r.near_l2_max},
                           {tag + ".rejected", double(r.rejected)}};
            Table t{tag + ".per_scale",
                    {"scale [distance]", "max ||Ta||_p^p [norm^p]", "ensemble size [atoms]", "max far ||Ta||_p^p [norm^p]"},
                    {}};
            for (const auto& s : r.per_scale) t.rows.push_back({s.scale, s.max_norm_pp, double(s.count), s.max_far_pp});
            o.tables.push_back(std::move(t));
            return o;
        });
    }
    return plan;
}

// ---------------------------------------------------------------- commutator / toeplitz

namespace {

constexpr std::size_t kDenseLimit = 3000;

void ratio_levels(Plan& plan, const Config& cfg, const DiscreteSpace& space, const std::string& suite,
                  const std::string& form) {
    const int refine = static_cast<int>(count_param(cfg, "params.refine", 0));
    const auto ps = cfg.reals("params.ps");
    for (double p : ps)
        if (!(p > 1)) throw SchemaError("params.ps: exponents must exceed 1");
    for (int l = 0; l <= refine; ++l)
        plan.units.push_back([&cfg, &space, ps, l, suite, form] {
            UnitOutput o;
            const DiscreteSpace s = l == 0 ? space : build_space(cfg, l);
            require_points(s, kDenseLimit, suite);
            require_line(s, suite);
            const Kernel K = kernel_by_name(cfg.get("params.kernel"), s);
            K.require(s);
            const ToeplitzConfig T = form == "sandwich" ? sandwich_config(s, K) : commutator_config(s, K);
            const auto syms = bmo_symbols(s, count_param(cfg, "params.random_symbols", 0), unit_seed(cfg, "symbols"));
            const auto tab = commutator_table(s, T, syms, ps, count_param(cfg, "params.family"), unit_seed(cfg, "family"));
            const std::string tag = level_tag(l);
            o.constants.emplace_back(tag + ".points", double(s.size()));
            o.constants.emplace_back(tag + ".constant", tab.constant);
            Table t{"ratios." + tag, {"symbol [index]", "p [exponent]", "ratio [norm ratio]"}, {}};
            for (std::size_t i = 0; i < tab.symbols.size(); ++i)
                for (std::size_t j = 0; j < ps.size(); ++j) t.rows.push_back({double(i), ps[j], tab.ratios[i][j]});
            o.tables.push_back(std::move(t));
            if (l == 0)
                for (std::size_t i = 0; i < tab.symbols.size(); ++i)
                    o.notes.push_back("symbol " + std::to_string(i) + " = " + tab.symbols[i]);
            return o;
        });
    const std::string prefix = suite + ".";
    plan.finish = [&cfg, refine, prefix](UnitOutput& o) {
        std::vector<double> cs;
        for (int l = 0; l <= refine; ++l)
            for (const auto& [n, v] : o.constants)
                if (n == level_tag(l) + ".constant") cs.push_back(v);
        const bool finite = std::all_of(cs.begin(), cs.end(), [](double v) { return std::isfinite(v) && v > 0; });
        std::string list;
        for (double c : cs) list += (list.empty() ? "" : ", ") + num(c);
        o.criteria.insert(o.criteria.begin(), crit(prefix + "bounded", finite, "constants per level: " + list));
        const double spread = max_rel_spread(cs);
        const double tol = positive_param(cfg, "params.stability_tol");
        o.criteria.insert(o.criteria.begin() + 1,
                          crit(prefix + "refinement_stable", finite && refine > 0 && spread <= tol,
                               refine > 0 ? "spread " + num(spread) + " against " + num(tol)
                                          : "needs at least one refinement level"));
        o.constants.emplace_back("constant", *std::max_element(cs.begin(), cs.end()));
        o.constants.emplace_back("refinement_spread", spread);
    };
}

}  // namespace

Plan commutator_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    ratio_levels(plan, cfg, space, "commutator", "commutator");
    plan.units.push_back([&cfg, &space] {
        UnitOutput o;
        require_points(space, kDenseLimit, "commutator");
        require_line(space, "the commutator identity");
        const double R = positive_param(cfg, "params.identity_radius");
        const Kernel Hu = kernel_hilbert_unnormalized();
        const auto fx = DiscreteFunction::from(space, [](const double* x) { return cplx(x[0]); });
        const auto g = DiscreteFunction::from(space, [R](const double* x) {
            const double t = 1 - x[0] * x[0] / (R * R);
            return cplx(t > 0 ? t * t * t : 0.0);
        });
        const auto C = commutator_apply(space, Hu, fx, g);
        cplx I = 0;
        for (std::size_t i = 0; i < space.size(); ++i) I += g[i] * space.weight(i);
        double err = 0;
        for (std::size_t i = 0; i < space.size(); ++i) err = std::max(err, std::abs(C[i] - I));
        err /= std::abs(I);
        o.criteria.push_back(crit("commutator.identity", err <= cfg.real("params.identity_tol"),
                                  "largest relative deviation " + num(err)));
        o.constants.emplace_back("identity.rel_error", err);
        return o;
    });
    return plan;
}

Plan toeplitz_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    const std::string form = cfg.get("params.form");
    if (form != "sandwich" && form != "commutator")
        throw SchemaError("params.form: expected sandwich or commutator, got '" + form + "'");
    ratio_levels(plan, cfg, space, "toeplitz", form);
    plan.units.push_back([&cfg, &space, form] {
        UnitOutput o;
        require_points(space, kDenseLimit, "toeplitz");
        const Kernel K = kernel_by_name(cfg.get("params.kernel"), space);
        K.require(space);
        const ToeplitzConfig T = form == "sandwich" ? sandwich_config(space, K) : commutator_config(space, K);
        const auto ac = adjoint_identity_check(space, T, count_param(cfg, "params.adjoint_samples"),
                                               unit_seed(cfg, "adjoint"));
        o.criteria.push_back(crit("toeplitz.adjoint", ac.max_rel_error <= cfg.real("params.adjoint_tol"),
                                  "largest relative error " + num(ac.max_rel_error) + " over " +
                                      std::to_string(ac.samples) + " samples"));
        o.criteria.push_back(crit("toeplitz.t1_zero", T.t1_zero, "T_1 residual " + num(T.t1_residual)));
        o.constants = {{"adjoint.max_rel_error", ac.max_rel_error},
                       {"adjoint.mean_of_Bf", ac.mean_of_Bf},
                       {"t1_residual", T.t1_residual}};
        o.notes.push_back("operator " + T.describe());
        return o;
    });
    return plan;
}

// ---------------------------------------------------------------- compactness

Plan compactness_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    const int refine = static_cast<int>(count_param(cfg, "params.refine", 0));
    std::vector<std::size_t> ms;
    for (double m : cfg.reals("params.ms")) {
        if (m < 1 || m != std::floor(m)) throw SchemaError("params.ms: indices must be positive integers");
        ms.push_back(static_cast<std::size_t>(m));
    }
    if (!std::is_sorted(ms.begin(), ms.end())) throw SchemaError("params.ms: indices must ascend");
    const std::size_t pm = count_param(cfg, "params.plateau_m");
    const auto pit = std::find(ms.begin(), ms.end(), pm);
    if (pit == ms.end()) throw SchemaError("params.plateau_m: must be one of params.ms");
    const std::size_t pidx = static_cast<std::size_t>(pit - ms.begin());

    for (int l = 0; l <= refine; ++l)
        plan.units.push_back([&cfg, &space, ms, l] {
            UnitOutput o;
            const DiscreteSpace s = l == 0 ? space : build_space(cfg, l);
            require_points(s, kDenseLimit, "compactness");
            require_line(s, "compactness");
            const Kernel K = kernel_by_name(cfg.get("params.kernel"), s);
            const double w = positive_param(cfg, "params.vmo_width");
            const auto vmo = DiscreteFunction::from(s, [w](const double* x) { return cplx(std::tanh(x[0] / w)); });
            const auto sg = DiscreteFunction::from(s, [](const double* x) {
                return cplx(x[0] > 0 ? 1.0 : (x[0] < 0 ? -1.0 : 0.0));
            });
            const auto a = compactness_tail(s, K, vmo, ms);
            const auto b = compactness_tail(s, K, sg, ms);
            const std::string tag = level_tag(l);
            o.constants = {{tag + ".points", double(s.size())},
                           {tag + ".vmo_sigma1", a.sigma1},
                           {tag + ".sign_sigma1", b.sigma1},
                           {tag + ".vmo_decreasing", a.strictly_decreasing ? 1.0 : 0.0}};
            Table t{"tails." + tag, {"m [index]", "vmo tail [sigma ratio]", "sign tail [sigma ratio]"}, {}};
            for (std::size_t i = 0; i < ms.size(); ++i) t.rows.push_back({double(ms[i]), a.tails[i], b.tails[i]});
            o.tables.push_back(std::move(t));
            return o;
        });

    // both sequences live on the finest grid
    plan.units.push_back([&cfg, &space, refine] {
        UnitOutput o;
        const DiscreteSpace s = refine == 0 ? space : build_space(cfg, refine);
        require_line(s, "compactness");
        const double w = positive_param(cfg, "params.approx_width");
        const auto f = DiscreteFunction::from(s, [w](const double* x) { return cplx(std::tanh(x[0] / w)); });
        const auto grid = sample_grid(s);
        const auto deltas = cfg.reals("params.deltas");
        if (deltas.size() < 2) throw SchemaError("params.deltas: need at least two radii");
        Table t{"vmo_approximation", {"delta [distance]", "bmo(f - f_delta) [oscillation]"}, {}};
        std::vector<double> errs;
        for (double d : deltas) {
            errs.push_back(bmo_norm(s, f - vmo_approximate(s, f, d), grid).value);
            t.rows.push_back({d, errs.back()});
        }
        // monotone in delta: errors shrink as delta shrinks
        bool mono = true;
        for (std::size_t i = 1; i < deltas.size(); ++i)
            mono = mono && ((deltas[i] < deltas[i - 1]) == (errs[i] < errs[i - 1])) && deltas[i] != deltas[i - 1];
        std::string list;
        for (double e : errs) list += (list.empty() ? "" : ", ") + num(e);
        o.criteria.push_back(crit("compactness.vmo_approx_monotone", mono, "errors " + list));
        o.tables.push_back(std::move(t));
        return o;
    });

    plan.units.push_back([&cfg, &space, refine] {
        UnitOutput o;
        const DiscreteSpace s = refine == 0 ? space : build_space(cfg, refine);
        require_points(s, kDenseLimit, "compactness");
        require_line(s, "compactness");
        const Kernel K = kernel_by_name(cfg.get("params.kernel"), s);
        const double w = cfg.real("params.lip_frequency");
        const auto f = DiscreteFunction::from(s, [w](const double* x) { return cplx(std::sin(w * x[0])); });
        const auto fam = bump_family(s, count_param(cfg, "params.bump_family"), unit_seed(cfg, "bumps"));
        const auto tr = truncation_convergence(s, K, f, fam, cfg.reals("params.etas"), cfg.real("params.truncation_p"));
        std::string list;
        for (double e : tr.estimates) list += (list.empty() ? "" : ", ") + num(e);
        o.criteria.push_back(crit("compactness.truncation_decreasing", tr.strictly_decreasing, "estimates " + list));
        Table t{"truncation", {"eta [distance]", "sup ||(C - C^eta) g||_p / ||g||_p [norm ratio]"}, {}};
        for (std::size_t i = 0; i < tr.etas.size(); ++i) t.rows.push_back({tr.etas[i], tr.estimates[i]});
        o.tables.push_back(std::move(t));
        o.constants.emplace_back("truncation.reduced_30", tr.reduced_30 ? 1.0 : 0.0);
        return o;
    });

    plan.finish = [&cfg, refine, pidx](UnitOutput& o) {
        bool dec = true, plateau = true;
        double floor_seen = INFINITY;
        for (int l = 0; l <= refine; ++l) {
            for (const auto& [n, v] : o.constants)
                if (n == level_tag(l) + ".vmo_decreasing") dec = dec && v == 1.0;
            for (const auto& t : o.tables)
                if (t.name == "tails." + level_tag(l)) floor_seen = std::min(floor_seen, t.rows[pidx][2]);
        }
        const double fl = cfg.real("params.plateau_floor");
        plateau = floor_seen >= fl;
        o.criteria.insert(o.criteria.begin(),
                          crit("compactness.vmo_tails_decreasing", dec, "strictly decreasing on every grid"));
        o.criteria.insert(o.criteria.begin() + 1,
                          crit("compactness.sign_plateau", plateau,
                               "smallest sign tail at m = " + std::to_string(cfg.integer("params.plateau_m")) + " is " + num(floor_seen) +
                                   " against floor " + num(fl)));
    };
    return plan;
}

// ---------------------------------------------------------------- szego

Plan szego_units(const Config& cfg, const DiscreteSpace& space) {
    Plan plan;
    if (space.kind() != SpaceKind::Sphere) throw KindMismatch("the szego suite needs a sphere space");
    const long degree = cfg.integer("params.degree");
    if (degree < 2) throw SchemaError("params.degree: the band must include degree 2");
    plan.units.push_back([&cfg, &space, degree] {
        UnitOutput o;
        const int n = space.param();
        auto z = [&](int j) {
            return DiscreteFunction::from(space, [j](const double* x) { return cplx(x[2 * j], x[2 * j + 1]); });
        };
        std::vector<std::pair<std::string, DiscreteFunction>> hol;
        std::vector<int> deg;
        hol.emplace_back("1", DiscreteFunction::constant(space, 1.0));
        deg.push_back(0);
        for (int j = 0; j < n; ++j) {
            hol.emplace_back("z" + std::to_string(j + 1), z(j));
            deg.push_back(1);
        }
        for (int j = 0; j < n; ++j)
            for (int l = j; l < n; ++l) {
                hol.emplace_back("z" + std::to_string(j + 1) + "z" + std::to_string(l + 1), z(j) * z(l));
                deg.push_back(2);
            }
        Table t{"reproduction", {"monomial [index]", "degree [order]", "relative L2 error [ratio]"}, {}};
        double worst = 0;
        for (std::size_t i = 0; i < hol.size(); ++i) {
            const auto& f = hol[i].second;
            const auto P = szego_projection(space, f, SzegoMode::Banded, static_cast<int>(degree));
            const double e = lp_norm(space, P - f, 2) / lp_norm(space, f, 2);
            worst = std::max(worst, e);
            t.rows.push_back({double(i), double(deg[i]), e});
            o.notes.push_back("monomial " + std::to_string(i) + " = " + hol[i].first);
        }
        Table a{"annihilation", {"function [index]", "L2 norm of projection [absolute]"}, {}};
        double worst_a = 0;
        for (int j = 0; j < n; ++j) {
            const auto zj = z(j);
            DiscreteFunction cz = zj;
            for (auto& v : cz.values) v = std::conj(v);
            const double e = lp_norm(space, szego_projection(space, cz, SzegoMode::Banded, static_cast<int>(degree)), 2);
            worst_a = std::max(worst_a, e);
            a.rows.push_back({double(j), e});
            o.notes.push_back("antiholomorphic " + std::to_string(j) + " = conj(z" + std::to_string(j + 1) + ")");
        }
        o.criteria.push_back(crit("szego.reproducing", worst <= cfg.real("params.rel_tol"),
                                  "largest relative error " + num(worst) + " over degree <= 2"));
        o.criteria.push_back(crit("szego.annihilation", worst_a <= cfg.real("params.abs_tol"),
                                  "largest projection norm " + num(worst_a)));
        o.constants = {{"reproducing.max_rel_error", worst}, {"annihilation.max_abs", worst_a}};
        if (cfg.integer("params.pv_diagnostic") != 0) {
            const auto z1 = z(0);
            const auto P = szego_projection(space, z1, SzegoMode::PrincipalValue);
            o.constants.emplace_back("pv_diagnostic.z1_rel_error", lp_norm(space, P - z1, 2) / lp_norm(space, z1, 2));
        }
        o.tables.push_back(std::move(t));
        o.tables.push_back(std::move(a));
        return o;
    });
    return plan;
}

}  // namespace hotype::harness::detail
