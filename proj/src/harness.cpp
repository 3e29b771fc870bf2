#include "hotype/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "suites.hpp"

namespace hotype::harness {

namespace {

using P = ParamType;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

bool parse_real(const std::string& s, double& v) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0' && errno != ERANGE && std::isfinite(v);
}

bool parse_int(const std::string& s, long& v) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    v = std::strtol(s.c_str(), &end, 10);
    return end != s.c_str() && *end == '\0' && errno != ERANGE;
}

// canonical form of a value, or SchemaError naming the key
std::string canonical(const ParamDef& d, const std::string& raw) {
    const std::string v = trim(raw);
    auto bad = [&](const std::string& what) {
        return SchemaError(d.key + ": expected " + what + ", got '" + v + "'");
    };
    switch (d.type) {
        case P::Integer: {
            long x;
            if (!parse_int(v, x)) throw bad("an integer");
            return std::to_string(x);
        }
        case P::Real: {
            double x;
            if (!parse_real(v, x)) throw bad("a real number");
            return fmt_double(x);
        }
        case P::RealList: {
            if (v.empty() && d.default_value.empty()) return v;
            std::string out;
            for (const auto& t : split_on(v, ',')) {
                double x;
                if (!parse_real(t, x)) throw bad("a comma-separated list of reals");
                out += (out.empty() ? "" : ",") + fmt_double(x);
            }
            if (out.empty()) throw bad("a nonempty list");
            return out;
        }
        case P::StringList: {
            std::string out;
            for (const auto& t : split_on(v, ',')) {
                if (t.empty() || t.find_first_of(" \t") != std::string::npos) throw bad("a comma-separated list of names");
                out += (out.empty() ? "" : ",") + t;
            }
            return out;
        }
        case P::String:
            if (v.find('\n') != std::string::npos) throw bad("a single-line string");
            return v;
    }
    return v;
}

const std::vector<std::string> kBuilders = {"grid", "heisenberg", "sphere", "sphere-lattice", "file"};

std::vector<ParamDef> builder_keys(const std::string& b) {
    std::vector<ParamDef> d = {
        {"space.builder", P::String, "grid", "grid | heisenberg | sphere | sphere-lattice | file"},
        {"space.budget", P::Integer, "20000", "point budget"},
        {"space.normalize", P::Real, "0", "normalization exponent; 0 keeps the base metric"},
    };
    if (b == "grid") {
        d.push_back({"space.dim", P::Integer, "1", "dimension"});
        d.push_back({"space.halfwidth", P::Real, "1", "box half-width"});
        d.push_back({"space.points", P::Integer, "2001", "points per axis"});
    } else if (b == "heisenberg") {
        d.push_back({"space.n", P::Integer, "1", "group dimension n"});
        d.push_back({"space.extent", P::Real, "1", "extent of the horizontal box"});
        d.push_back({"space.points", P::Integer, "27", "points per axis"});
    } else if (b == "sphere") {
        d.push_back({"space.n", P::Integer, "2", "complex dimension"});
        d.push_back({"space.points", P::Integer, "4000", "number of points"});
        d.push_back({"space.seed", P::Integer, "7", "sampling seed"});
    } else if (b == "sphere-lattice") {
        d.push_back({"space.rings", P::Integer, "10", "rings in |z2|^2"});
        d.push_back({"space.phases", P::Integer, "20", "phases per circle"});
    } else if (b == "file") {
        d.push_back({"space.path", P::String, "", "HOTYPE-SPACE file"});
    } else {
        throw SchemaError("space.builder: unknown builder '" + b + "'");
    }
    return d;
}

std::vector<ParamDef> suite_keys(const std::string& s) {
    if (s == "space-cert")
        return {
            {"params.samples", P::Integer, "40", "doubling sample centers"},
            {"params.engulf_samples", P::Integer, "2000", "engulfing ball pairs"},
            {"params.quasi_triples", P::Integer, "10000", "quasi-triangle triples"},
            {"params.cover_balls", P::Integer, "200", "balls offered to the covering lemma"},
            {"params.integral_s", P::RealList, "1.5,2,3", "exponents of the integral bound"},
            {"params.integral_radii", P::RealList, "0.0625,0.125", "integral bound radii as fractions of the diameter"},
            {"params.integral_centers", P::Integer, "10", "integral bound centers"},
            {"params.growth_jmax", P::Integer, "3", "largest dilation power in the growth check"},
            {"params.growth_centers", P::Integer, "16", "growth check centers"},
            {"params.gamma_expected", P::Real, "0", "expected growth exponent; 0 uses the stored gamma"},
            {"params.gamma_tol", P::Real, "0.15", "relative tolerance on the growth exponent"},
        };
    if (s == "norms")
        return {
            {"params.gamma", P::Real, "0", "normalization exponent; 0 uses the stored gamma"},
            {"params.fit_centers", P::Integer, "40", "centers of the normalized growth fit"},
            {"params.fit_tol", P::Real, "0.1", "relative tolerance on the normalized exponent"},
            {"params.min_decades", P::Real, "1", "required span of resolved radii in decades"},
            {"params.alphas", P::RealList, "0.5,1", "Campanato exponents"},
            {"params.ks", P::RealList, "0,1", "Campanato degrees"},
            {"params.family", P::Integer, "6", "smooth test functions"},
            {"params.ratio_lo", P::Real, "0.25", "lower comparability bound"},
            {"params.ratio_hi", P::Real, "4", "upper comparability bound"},
            {"params.refine", P::Integer, "1", "refinement levels beyond the base grid"},
            {"params.stability_tol", P::Real, "0.3", "relative refinement tolerance"},
        };
    if (s == "atoms")
        return {
            {"params.p", P::Real, "1", "atom exponent"},
            {"params.k", P::Integer, "-1", "moment degree; -1 derives it from p"},
            {"params.num_atoms", P::Integer, "200", "ensemble size"},
            {"params.kind", P::String, "sup", "sup | l2"},
            {"params.profile", P::String, "uniform", "uniform | smooth"},
        };
    if (s == "duality")
        return {
            {"params.p", P::Real, "0.5", "atom exponent"},
            {"params.k", P::Integer, "-1", "moment degree; -1 derives it from p"},
            {"params.functions", P::StringList, "smooth,polynomial,sign", "test functions"},
            {"params.num_atoms", P::Integer, "200", "ensemble size"},
            {"params.frequency", P::Real, "3", "frequency of the smooth function"},
            {"params.slope_tol", P::Real, "0.3", "bound on the per-scale slope"},
            {"params.poly_tol", P::Real, "1e-10", "bound on scaled pairings with polynomials"},
            {"params.focus", P::RealList, "", "atom centers as flattened coordinates; empty samples uniformly"},
        };
    if (s == "kernel-cert")
        return {
            {"params.kernels", P::StringList, "hilbert,power0.5,power1", "kernels to certify"},
            {"params.samples", P::Integer, "1000", "pairs for the standard check"},
            {"params.pk_samples", P::Integer, "200", "samples for the (p,k) check"},
            {"params.pk_p", P::Real, "0.5", "exponent fixing the (p,k) degree"},
            {"params.wb_pairs", P::Integer, "200", "bump pairs for the weak boundedness probe"},
            {"params.expect_pass", P::StringList, "hilbert", "kernels expected to pass every check"},
            {"params.expect_size_fail", P::StringList, "power0.5", "kernels expected to fail the size check"},
            {"params.expect_wb_divergent", P::StringList, "power1", "kernels expected to diverge in the probe"},
        };
    if (s == "hp-bound")
        return {
            {"params.kernel", P::String, "hilbert", "kernel"},
            {"params.runs", P::StringList, "1:-1,0.5:-1,0.5:0", "p:k pairs; k = -1 derives it from p"},
            {"params.num_atoms", P::Integer, "200", "atoms per run"},
            {"params.dilation_pairs", P::Integer, "8", "dilation-paired atoms"},
            {"params.near_factor", P::Real, "3", "near-field ball factor"},
            {"params.slope_tol", P::Real, "0.3", "bound on the per-scale slope"},
            {"params.dilation_tol", P::Real, "0.05", "bound on dilation-pair differences"},
            {"params.weak_slope", P::Real, "0.5", "growth slope required of weakened runs"},
        };
    if (s == "commutator" || s == "toeplitz") {
        std::vector<ParamDef> d = {
            {"params.kernel", P::String, "hilbert", "kernel"},
            {"params.ps", P::RealList, "1.5,2,3", "Lebesgue exponents"},
            {"params.random_symbols", P::Integer, "2", "random BMO mixtures"},
            {"params.family", P::Integer, "60", "test functions per ratio"},
            {"params.refine", P::Integer, "1", "refinement levels beyond the base grid"},
            {"params.stability_tol", P::Real, "0.3", "relative refinement tolerance"},
        };
        if (s == "commutator") {
            d.push_back({"params.identity_tol", P::Real, "0.01", "tolerance of the commutator identity"});
            d.push_back({"params.identity_radius", P::Real, "0.5", "support radius of the identity test bump"});
        } else {
            d.push_back({"params.form", P::String, "sandwich", "sandwich | commutator"});
            d.push_back({"params.adjoint_samples", P::Integer, "5", "adjoint identity samples"});
            d.push_back({"params.adjoint_tol", P::Real, "1e-10", "relative tolerance of the adjoint identity"});
        }
        return d;
    }
    if (s == "compactness")
        return {
            {"params.kernel", P::String, "hilbert", "kernel"},
            {"params.refine", P::Integer, "2", "refinement levels beyond the base grid"},
            {"params.ms", P::RealList, "1,2,4,8,16,32,64", "singular value indices"},
            {"params.vmo_width", P::Real, "0.1", "width of the VMO symbol tanh(x/w)"},
            {"params.plateau_m", P::Integer, "4", "index at which the sign tail is read"},
            {"params.plateau_floor", P::Real, "0.1", "floor of the sign tail"},
            {"params.deltas", P::RealList, "0.2,0.1,0.05,0.025", "VMO approximation radii"},
            {"params.approx_width", P::Real, "0.05", "width of the approximated symbol"},
            {"params.etas", P::RealList, "0.2,0.1,0.05,0.025", "truncation radii"},
            {"params.bump_family", P::Integer, "30", "bumps in the truncation family"},
            {"params.lip_frequency", P::Real, "2", "frequency of the Lipschitz symbol"},
            {"params.truncation_p", P::Real, "2", "exponent of the truncation estimate"},
        };
    if (s == "szego")
        return {
            {"params.degree", P::Integer, "4", "band limit of the projection kernel"},
            {"params.rel_tol", P::Real, "0.02", "relative L2 tolerance on holomorphic monomials"},
            {"params.abs_tol", P::Real, "0.02", "absolute L2 tolerance on antiholomorphic functions"},
            {"params.pv_diagnostic", P::Integer, "1", "also report the principal value quadrature"},
        };
    throw SchemaError("run.suite: unknown suite '" + s + "'");
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"space-cert", "norms",    "atoms",       "duality",
                                                   "kernel-cert", "hp-bound", "commutator", "toeplitz",
                                                   "compactness", "szego"};
    return names;
}

std::vector<ParamDef> schema(const std::string& suite, const std::string& builder) {
    std::vector<ParamDef> d = {
        {"run.suite", P::String, "", "suite name"},
        {"run.seed", P::Integer, "1", "master seed"},
    };
    for (auto& x : builder_keys(builder)) d.push_back(x);
    for (auto& x : suite_keys(suite)) d.push_back(x);
    return d;
}

std::vector<ParamDef> all_keys() {
    std::vector<ParamDef> out;
    std::set<std::string> seen;
    for (const auto& s : suite_names())
        for (const auto& b : kBuilders)
            for (auto& d : schema(s, b))
                if (seen.insert(d.key).second) out.push_back(d);
    out.push_back({"run.output_dir", P::String, ".", "directory for report files"});
    return out;
}

Config Config::parse(std::istream& is) {
    Config c;
    std::string line, section;
    bool header = false;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header) {
            if (t != "HOTYPE-CONFIG v1") throw SchemaError("config: first line must be 'HOTYPE-CONFIG v1'");
            header = true;
            continue;
        }
        if (t.front() == '[') {
            if (t.back() != ']') throw SchemaError("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section != "run" && section != "space" && section != "params")
                throw SchemaError("config line " + std::to_string(lineno) + ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw SchemaError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty()) throw SchemaError("config line " + std::to_string(lineno) + ": key outside a section");
        const std::string key = section + "." + trim(t.substr(0, eq));
        if (c.values_.count(key)) throw SchemaError(key + ": duplicate key");
        c.values_[key] = trim(t.substr(eq + 1));
    }
    if (!header) throw SchemaError("config: empty input");
    return c;
}

Config Config::parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

Config Config::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read config " + path);
    return parse(is);
}

void Config::set(const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
        throw SchemaError(key + ": keys have the form section.name");
    values_[key] = value;
}

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw SchemaError(key + ": missing");
    return it->second;
}

Config Config::resolve() const {
    if (!has("run.suite") || get("run.suite").empty()) throw SchemaError("run.suite: required");
    const std::string suite = get("run.suite");
    const std::string builder = has("space.builder") ? trim(get("space.builder")) : "grid";
    const auto defs = schema(suite, builder);
    std::set<std::string> known;
    for (const auto& d : defs) known.insert(d.key);
    for (const auto& [k, v] : values_)
        if (!known.count(k) && k != "run.output_dir")
            throw SchemaError(k + ": not a parameter of suite '" + suite + "' with builder '" + builder + "'");
    Config out;
    for (const auto& d : defs) {
        auto it = values_.find(d.key);
        out.values_[d.key] = canonical(d, it == values_.end() ? d.default_value : it->second);
        out.order_.push_back(d.key);
    }
    if (builder == "file" && out.get("space.path").empty()) throw SchemaError("space.path: required for builder 'file'");
    if (has("run.output_dir")) out.values_["run.output_dir"] = get("run.output_dir");
    return out;
}

std::string Config::text() const {
    std::ostringstream os;
    os << "HOTYPE-CONFIG v1\n";
    std::string section;
    for (const auto& k : order_) {
        const auto dot = k.find('.');
        const std::string sec = k.substr(0, dot);
        if (sec != section) {
            os << "[" << sec << "]\n";
            section = sec;
        }
        os << k.substr(dot + 1) << " = " << values_.at(k) << "\n";
    }
    return os.str();
}

std::string Config::hash() const { return hex64(fnv1a(text())); }

long Config::integer(const std::string& key) const {
    long v;
    if (!parse_int(get(key), v)) throw SchemaError(key + ": expected an integer");
    return v;
}

double Config::real(const std::string& key) const {
    double v;
    if (!parse_real(get(key), v)) throw SchemaError(key + ": expected a real number");
    return v;
}

std::vector<double> Config::reals(const std::string& key) const {
    std::vector<double> out;
    if (get(key).empty()) return out;
    for (const auto& t : split_on(get(key), ',')) {
        double v;
        if (!parse_real(t, v)) throw SchemaError(key + ": expected a list of reals");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> Config::strings(const std::string& key) const {
    if (get(key).empty()) return {};
    return split_on(get(key), ',');
}

DiscreteSpace build_space(const Config& cfg, int level) {
    const std::string b = cfg.get("space.builder");
    BuildOptions opt;
    const long budget = cfg.integer("space.budget");
    if (budget <= 0) throw SchemaError("space.budget: must be positive");
    opt.point_budget = static_cast<std::size_t>(budget);
    auto positive = [&](const std::string& key) {
        const long v = cfg.integer(key);
        if (v <= 0) throw SchemaError(key + ": must be positive");
        return v;
    };
    if (level < 0) throw Error("refinement level must be nonnegative");
    if (level > 0 && b != "grid") throw SchemaError("params.refine: refinement needs the grid builder");
    DiscreteSpace s;
    if (b == "grid") {
        const long pts = (positive("space.points") - 1) * (1L << level) + 1;
        s = build_grid_space(static_cast<int>(positive("space.dim")), cfg.real("space.halfwidth"), static_cast<int>(pts),
                             opt);
    } else if (b == "heisenberg") {
        s = build_heisenberg_space(static_cast<int>(positive("space.n")), cfg.real("space.extent"),
                                   static_cast<int>(positive("space.points")), opt);
    } else if (b == "sphere") {
        s = build_sphere_space(static_cast<int>(positive("space.n")), static_cast<std::size_t>(positive("space.points")),
                               static_cast<std::uint64_t>(cfg.integer("space.seed")), opt);
    } else if (b == "sphere-lattice") {
        s = build_sphere_lattice(static_cast<int>(positive("space.rings")), static_cast<int>(positive("space.phases")),
                                 opt);
    } else {
        s = load_space(cfg.get("space.path"));
        if (s.size() > opt.point_budget) throw BudgetExceeded("space file exceeds the point budget");
    }
    const double g = cfg.real("space.normalize");
    if (g < 0) throw SchemaError("space.normalize: must be nonnegative");
    if (g > 0) s = normalize_metric(s, g);
    return s;
}

bool SuiteResult::pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

double SuiteResult::constant(const std::string& name) const {
    for (const auto& [k, v] : constants)
        if (k == name) return v;
    throw Error("no constant named " + name);
}

const Criterion& SuiteResult::criterion(const std::string& name) const {
    for (const auto& c : criteria)
        if (c.name == name) return c;
    throw Error("no criterion named " + name);
}

const Table* SuiteResult::table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return &t;
    return nullptr;
}

UnitOutput run_units(const std::vector<WorkUnit>& units) {
    std::vector<UnitOutput> outs(units.size());
    parallel_for(units.size(), [&](std::size_t i) { outs[i] = units[i](); });
    UnitOutput all;
    for (auto& o : outs) {
        for (auto& c : o.criteria) all.criteria.push_back(std::move(c));
        for (auto& c : o.constants) all.constants.push_back(std::move(c));
        for (auto& t : o.tables) all.tables.push_back(std::move(t));
        for (auto& n : o.notes) all.notes.push_back(std::move(n));
    }
    return all;
}

SuiteResult run(const Config& config) {
    const Config cfg = config.resolve();
    const DiscreteSpace space = build_space(cfg);
    const std::string suite = cfg.get("run.suite");
    using namespace detail;
    Plan plan;
    if (suite == "space-cert") plan = space_cert_units(cfg, space);
    else if (suite == "norms") plan = norms_units(cfg, space);
    else if (suite == "atoms") plan = atoms_units(cfg, space);
    else if (suite == "duality") plan = duality_units(cfg, space);
    else if (suite == "kernel-cert") plan = kernel_cert_units(cfg, space);
    else if (suite == "hp-bound") plan = hp_bound_units(cfg, space);
    else if (suite == "commutator") plan = commutator_units(cfg, space);
    else if (suite == "toeplitz") plan = toeplitz_units(cfg, space);
    else if (suite == "compactness") plan = compactness_units(cfg, space);
    else plan = szego_units(cfg, space);
    UnitOutput out = run_units(plan.units);
    if (plan.finish) plan.finish(out);
    SuiteResult r;
    r.suite = suite;
    r.space_id = space.id();
    r.config_text = cfg.text();
    r.config_hash = cfg.hash();
    r.criteria = std::move(out.criteria);
    r.constants = std::move(out.constants);
    r.tables = std::move(out.tables);
    r.notes = std::move(out.notes);
    return r;
}

namespace {

std::string one_line(const std::string& s) {
    std::string o = s;
    std::replace(o.begin(), o.end(), '\n', ' ');
    std::replace(o.begin(), o.end(), '\t', ' ');
    return o;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

std::string report_text(const SuiteResult& r) {
    std::ostringstream os;
    os << "HOTYPE-EXP v1\n";
    os << "tool " << r.tool_version << "\n";
    os << "suite " << r.suite << "\n";
    os << "space " << r.space_id << "\n";
    os << "config_hash " << r.config_hash << "\n";
    os << "config " << count_lines(r.config_text) << "\n" << r.config_text;
    os << "criteria " << r.criteria.size() << "\n";
    for (const auto& c : r.criteria)
        os << "criterion " << (c.pass ? "pass" : "fail") << ' ' << c.name << '\t' << one_line(c.detail) << "\n";
    os << "constants " << r.constants.size() << "\n";
    for (const auto& [k, v] : r.constants) os << "constant " << k << ' ' << fmt_double(v) << "\n";
    os << "tables " << r.tables.size() << "\n";
    for (const auto& t : r.tables) {
        os << "table " << t.name << ' ' << t.rows.size() << ' ' << t.columns.size() << "\n";
        os << "columns";
        for (const auto& c : t.columns) os << '\t' << one_line(c);
        os << "\n";
        for (const auto& row : t.rows) {
            if (row.size() != t.columns.size()) throw Error("table " + t.name + " has a ragged row");
            for (std::size_t j = 0; j < row.size(); ++j) os << (j ? " " : "") << fmt_double(row[j]);
            os << "\n";
        }
    }
    os << "notes " << r.notes.size() << "\n";
    for (const auto& n : r.notes) os << "note " << one_line(n) << "\n";
    std::string body = os.str();
    body += "report_hash " + hex64(fnv1a(body)) + "\nend\n";
    return body;
}

namespace {

struct LineReader {
    std::istringstream in;
    explicit LineReader(const std::string& t) : in(t) {}
    std::string next() {
        std::string l;
        if (!std::getline(in, l)) throw FormatError("report ends early");
        return l;
    }
    std::string field(const std::string& key) {
        const std::string l = next();
        if (l.rfind(key + " ", 0) != 0) throw FormatError("expected '" + key + "' line, got '" + l + "'");
        return l.substr(key.size() + 1);
    }
    std::size_t count(const std::string& key) {
        long v;
        if (!parse_int(field(key), v) || v < 0) throw FormatError("bad count for " + key);
        return static_cast<std::size_t>(v);
    }
};

double report_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v;
    if (!parse_real(s, v)) throw FormatError("bad number '" + s + "' in report");
    return v;
}

}  // namespace

SuiteResult parse_report(const std::string& text) {
    LineReader rd(text);
    if (rd.next() != "HOTYPE-EXP v1") throw FormatError("not a HOTYPE-EXP v1 report");
    SuiteResult r;
    r.tool_version = rd.field("tool");
    r.suite = rd.field("suite");
    r.space_id = rd.field("space");
    r.config_hash = rd.field("config_hash");
    const std::size_t nc = rd.count("config");
    for (std::size_t i = 0; i < nc; ++i) r.config_text += rd.next() + "\n";
    const std::size_t ncrit = rd.count("criteria");
    for (std::size_t i = 0; i < ncrit; ++i) {
        const std::string l = rd.field("criterion");
        const auto sp = l.find(' ');
        const auto tab = l.find('\t');
        if (sp == std::string::npos || tab == std::string::npos) throw FormatError("bad criterion line");
        const std::string flag = l.substr(0, sp);
        if (flag != "pass" && flag != "fail") throw FormatError("criterion must be pass or fail");
        r.criteria.push_back({l.substr(sp + 1, tab - sp - 1), flag == "pass", l.substr(tab + 1)});
    }
    const std::size_t ncon = rd.count("constants");
    for (std::size_t i = 0; i < ncon; ++i) {
        const std::string l = rd.field("constant");
        const auto sp = l.rfind(' ');
        if (sp == std::string::npos) throw FormatError("bad constant line");
        r.constants.emplace_back(l.substr(0, sp), report_double(l.substr(sp + 1)));
    }
    const std::size_t nt = rd.count("tables");
    for (std::size_t i = 0; i < nt; ++i) {
        std::istringstream head(rd.field("table"));
        Table t;
        std::size_t rows = 0, cols = 0;
        if (!(head >> t.name >> rows >> cols)) throw FormatError("bad table header");
        const std::string cl = rd.next();
        if (cl.rfind("columns", 0) != 0) throw FormatError("missing columns line");
        auto parts = split_on(cl, '\t');
        parts.erase(parts.begin());
        if (parts.size() != cols) throw FormatError("column count mismatch in table " + t.name);
        t.columns = parts;
        for (std::size_t k = 0; k < rows; ++k) {
            std::istringstream row(rd.next());
            std::vector<double> v;
            for (std::string tok; row >> tok;) v.push_back(report_double(tok));
            if (v.size() != cols) throw FormatError("ragged row in table " + t.name);
            t.rows.push_back(std::move(v));
        }
        r.tables.push_back(std::move(t));
    }
    const std::size_t nn = rd.count("notes");
    for (std::size_t i = 0; i < nn; ++i) r.notes.push_back(rd.field("note"));
    const auto pos = text.rfind("report_hash ");
    if (pos == std::string::npos) throw FormatError("missing report hash");
    const std::string stored = rd.field("report_hash");
    if (rd.next() != "end") throw FormatError("missing end marker");
    if (hex64(fnv1a(text.substr(0, pos))) != stored) throw FormatError("report hash mismatch");
    return r;
}

void write_report_file(const std::string& path, const SuiteResult& r) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << report_text(r);
}

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

SuiteResult read_report_file(const std::string& path) { return parse_report(slurp(path)); }

bool VerifyResult::ok() const {
    return report_hash_ok && config_hash_ok && (!checked_space || space_ok) && (!checked_rerun || rerun_ok);
}

VerifyResult verify_report(const std::string& path, bool rebuild_space, bool rerun) {
    VerifyResult v;
    const std::string text = slurp(path);
    SuiteResult r;
    try {
        r = parse_report(text);
        v.report_hash_ok = true;
    } catch (const FormatError& e) {
        v.messages.push_back(e.what());
        return v;
    }
    Config cfg;
    try {
        cfg = Config::parse_text(r.config_text).resolve();
        v.config_hash_ok = cfg.hash() == r.config_hash && cfg.text() == r.config_text;
        if (!v.config_hash_ok) v.messages.push_back("config hash does not match the echoed config");
    } catch (const SchemaError& e) {
        v.messages.push_back(std::string("echoed config invalid: ") + e.what());
        return v;
    }
    if (rebuild_space || rerun) {
        v.checked_space = true;
        const std::string id = build_space(cfg).id();
        v.space_ok = id == r.space_id;
        if (!v.space_ok) v.messages.push_back("space hash " + r.space_id + " does not match rebuilt " + id);
    }
    if (rerun) {
        v.checked_rerun = true;
        v.rerun_ok = report_text(run(cfg)) == text;
        if (!v.rerun_ok) v.messages.push_back("rerun does not reproduce the report");
    }
    return v;
}

std::vector<std::string> emit_plot_data(const SuiteResult& r, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    std::ostringstream man;
    man << "HOTYPE-PLOT v1\n";
    man << "suite " << r.suite << "\n";
    man << "config_hash " << r.config_hash << "\n";
    if (r.tables.empty()) man << "note report has no tables\n";
    for (const auto& t : r.tables) {
        if (t.rows.empty()) {
            man << "omitted " << t.name << " empty\n";
            continue;
        }
        std::string file = t.name;
        for (char& ch : file)
            if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
        file += ".csv";
        std::ofstream os(dir + "/" + file);
        if (!os) throw Error("cannot write " + dir + "/" + file);
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            std::string c = t.columns[j];
            if (c.find(',') != std::string::npos) c = "\"" + c + "\"";
            os << (j ? "," : "") << c;
        }
        os << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << fmt_double(row[j]);
            os << "\n";
        }
        man << "file " << file << ' ' << t.rows.size() << "\n";
        written.push_back(file);
    }
    std::ofstream mf(dir + "/manifest.txt");
    if (!mf) throw Error("cannot write manifest in " + dir);
    mf << man.str();
    written.push_back("manifest.txt");
    return written;
}

}  // namespace hotype::harness
