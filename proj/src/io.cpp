#include "hotype/io.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace hotype {

namespace {

std::string next_line(std::istream& is, const char* what) {
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') return line;
    }
    throw FormatError(std::string("unexpected end of input while reading ") + what);
}

double parse_double(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) throw FormatError("bad number '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) throw FormatError("bad integer '" + s + "'");
    return v;
}

void expect_header(std::istream& is, const std::string& magic) {
    const std::string h = next_line(is, "header");
    if (h != magic) throw FormatError("expected '" + magic + "', got '" + h + "'");
}

// "key value" lines up to (excluding) a line whose key is stop
std::map<std::string, std::string> read_block(std::istream& is, const std::string& stop, std::string& stop_value) {
    std::map<std::string, std::string> kv;
    for (;;) {
        const std::string line = next_line(is, "header block");
        const auto sp = line.find(' ');
        const std::string key = line.substr(0, sp);
        const std::string val = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (key == stop) {
            stop_value = val;
            return kv;
        }
        if (!kv.emplace(key, val).second) throw FormatError("duplicate key '" + key + "'");
    }
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("missing key '" + key + "'");
    return it->second;
}

std::vector<std::string> split(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

void expect_end(std::istream& is) {
    if (next_line(is, "end marker") != "end") throw FormatError("missing end marker");
}

void check_space(const DiscreteSpace& space, const std::string& id) {
    if (id != space.id()) throw SpaceMismatch("data belongs to space " + id + ", not " + space.id());
}

}  // namespace

void write_space(std::ostream& os, const DiscreteSpace& space) {
    const auto& info = space.build_info();
    const auto& c = space.constants();
    os << "HOTYPE-SPACE v1\n";
    os << "id " << space.id() << "\n";
    os << "kind " << to_string(space.kind()) << "\n";
    os << "param " << space.param() << "\n";
    os << "builder " << info.builder << "\n";
    for (const auto& [k, v] : info.params) os << "build." << k << " " << v << "\n";
    os << "metric.normalized " << (space.metric().normalized ? 1 : 0) << "\n";
    os << "metric.gamma " << fmt_double(space.metric().gamma) << "\n";
    os << "constants.c " << fmt_double(c.c) << "\n";
    os << "constants.K " << fmt_double(c.K) << "\n";
    os << "constants.gamma " << fmt_double(c.gamma) << "\n";
    os << "constants.beta " << fmt_double(c.beta) << "\n";
    os << "constants.A " << fmt_double(c.A) << "\n";
    os << "extent.diameter " << fmt_double(space.diameter()) << "\n";
    os << "extent.min_distance " << fmt_double(space.min_distance()) << "\n";
    os << "stride " << space.stride() << "\n";
    os << "points " << space.size() << "\n";
    for (std::size_t i = 0; i < space.size(); ++i) {
        os << fmt_double(space.weight(i));
        for (std::size_t a = 0; a < space.stride(); ++a) os << ' ' << fmt_double(space.coords(i)[a]);
        os << '\n';
    }
    os << "end\n";
}

DiscreteSpace read_space(std::istream& is) {
    expect_header(is, "HOTYPE-SPACE v1");
    std::string count_s;
    const auto kv = read_block(is, "points", count_s);
    const SpaceKind kind = space_kind_from_string(need(kv, "kind"));
    const int param = static_cast<int>(parse_u64(need(kv, "param")));
    const std::size_t stride = Point::coord_length(kind, param);
    if (parse_u64(need(kv, "stride")) != stride) throw FormatError("stride does not match kind and param");
    const std::size_t n = parse_u64(count_s);
    std::vector<double> coords;
    std::vector<double> w;
    coords.reserve(n * stride);
    w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto tok = split(next_line(is, "points"));
        if (tok.size() != stride + 1) throw FormatError("point line " + std::to_string(i) + " has a wrong field count");
        w.push_back(parse_double(tok[0]));
        for (std::size_t a = 0; a < stride; ++a) coords.push_back(parse_double(tok[a + 1]));
    }
    expect_end(is);
    BuildInfo info;
    info.builder = need(kv, "builder");
    for (const auto& [k, v] : kv)
        if (k.rfind("build.", 0) == 0 && k != "build.normalized_gamma") info.params[k.substr(6)] = v;
    Constants c;
    c.c = parse_double(need(kv, "constants.c"));
    c.K = parse_double(need(kv, "constants.K"));
    c.gamma = parse_double(need(kv, "constants.gamma"));
    c.beta = parse_double(need(kv, "constants.beta"));
    c.A = parse_double(need(kv, "constants.A"));
    DiscreteSpace s = DiscreteSpace::from_points(kind, param, std::move(coords), std::move(w), c, std::move(info));
    if (need(kv, "metric.normalized") == "1") s = normalize_metric(s, parse_double(need(kv, "metric.gamma")));
    s = s.with_constants(c).with_extent(parse_double(need(kv, "extent.diameter")),
                                        parse_double(need(kv, "extent.min_distance")));
    if (s.id() != need(kv, "id")) throw FormatError("space hash mismatch: file says " + need(kv, "id") + ", data gives " + s.id());
    return s;
}

void save_space(const std::string& path, const DiscreteSpace& space) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    write_space(os, space);
}

DiscreteSpace load_space(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read " + path);
    return read_space(is);
}

std::string file_hash(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return hex64(fnv1a(ss.str()));
}

void write_function(std::ostream& os, const DiscreteSpace& space, const DiscreteFunction& f) {
    f.check(space);
    os << "HOTYPE-FUNCTION v1\n";
    os << "space " << space.id() << "\n";
    os << "points " << f.size() << "\n";
    for (std::size_t i = 0; i < f.size(); ++i)
        os << i << ' ' << fmt_double(f.values[i].real()) << ' ' << fmt_double(f.values[i].imag()) << '\n';
    os << "end\n";
}

DiscreteFunction read_function(std::istream& is, const DiscreteSpace& space) {
    expect_header(is, "HOTYPE-FUNCTION v1");
    std::string count_s;
    const auto kv = read_block(is, "points", count_s);
    check_space(space, need(kv, "space"));
    const std::size_t n = parse_u64(count_s);
    if (n != space.size()) throw SpaceMismatch("function length differs from the space size");
    std::vector<cplx> v(n);
    std::vector<char> seen(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto tok = split(next_line(is, "values"));
        if (tok.size() != 3) throw FormatError("function row needs 'index re im'");
        const std::size_t i = parse_u64(tok[0]);
        if (i >= n || seen[i]) throw FormatError("bad or repeated point index " + tok[0]);
        seen[i] = 1;
        v[i] = cplx(parse_double(tok[1]), parse_double(tok[2]));
    }
    expect_end(is);
    return DiscreteFunction(space, std::move(v));
}

void write_report(std::ostream& os, const DiscreteSpace& space, const NormReport& rep) {
    os << "HOTYPE-REPORT v1\n";
    os << "space " << space.id() << "\n";
    os << "name " << rep.name << "\n";
    os << "value " << fmt_double(rep.value) << "\n";
    os << "upper_bound " << (rep.upper_bound ? 1 : 0) << "\n";
    os << "witness.center " << rep.witness.center << "\n";
    os << "witness.radius " << fmt_double(rep.witness.radius) << "\n";
    const GridSpec& g = rep.grid.spec;
    os << "grid.seed " << g.seed << "\n";
    os << "grid.num_centers " << g.num_centers << "\n";
    os << "grid.jitter " << fmt_double(g.jitter) << "\n";
    os << "grid.min_factor " << fmt_double(g.min_factor) << "\n";
    os << "grid.max_radius " << fmt_double(g.max_radius) << "\n";
    os << "grid.min_radius " << fmt_double(g.min_radius) << "\n";
    os << "grid.centers";
    for (std::size_t c : rep.grid.centers) os << ' ' << c;
    os << "\ngrid.radii";
    for (double r : rep.grid.radii) os << ' ' << fmt_double(r);
    os << "\nend\n";
}

NormReport read_report(std::istream& is, const DiscreteSpace& space) {
    expect_header(is, "HOTYPE-REPORT v1");
    std::string unused;
    const auto kv = read_block(is, "end", unused);
    check_space(space, need(kv, "space"));
    NormReport rep;
    rep.name = need(kv, "name");
    rep.value = parse_double(need(kv, "value"));
    rep.upper_bound = need(kv, "upper_bound") == "1";
    rep.witness.center = space.check_index(parse_u64(need(kv, "witness.center")));
    rep.witness.radius = parse_double(need(kv, "witness.radius"));
    GridSpec& g = rep.grid.spec;
    g.seed = parse_u64(need(kv, "grid.seed"));
    g.num_centers = parse_u64(need(kv, "grid.num_centers"));
    g.jitter = parse_double(need(kv, "grid.jitter"));
    g.min_factor = parse_double(need(kv, "grid.min_factor"));
    g.max_radius = parse_double(need(kv, "grid.max_radius"));
    g.min_radius = parse_double(need(kv, "grid.min_radius"));
    for (const auto& t : split(need(kv, "grid.centers"))) rep.grid.centers.push_back(space.check_index(parse_u64(t)));
    for (const auto& t : split(need(kv, "grid.radii"))) rep.grid.radii.push_back(parse_double(t));
    return rep;
}

void write_atom(std::ostream& os, const DiscreteSpace& space, const Atom& a) {
    a.function.check(space);
    os << "HOTYPE-ATOM v1\n";
    os << "space " << space.id() << "\n";
    os << "ball.center " << a.ball.center << "\n";
    os << "ball.radius " << fmt_double(a.ball.radius) << "\n";
    os << "ball.measure " << fmt_double(a.ball.measure) << "\n";
    os << "spec.p " << fmt_double(a.spec.p) << "\n";
    os << "spec.gamma " << fmt_double(a.spec.gamma) << "\n";
    os << "spec.k " << a.spec.k << "\n";
    os << "spec.alpha " << fmt_double(a.spec.alpha) << "\n";
    os << "spec.beta " << fmt_double(a.spec.beta) << "\n";
    os << "spec.hypothesis_ok " << (a.spec.hypothesis_ok ? 1 : 0) << "\n";
    os << "kind " << to_string(a.kind) << "\n";
    os << "profile " << to_string(a.profile) << "\n";
    os << "seed " << a.seed << "\n";
    os << "residuals";
    for (double r : a.moment_residuals) os << ' ' << fmt_double(r);
    os << "\nvalues " << a.ball.members.size() << "\n";
    for (std::size_t i : a.ball.members)
        os << i << ' ' << fmt_double(a.function.values[i].real()) << ' ' << fmt_double(a.function.values[i].imag())
           << '\n';
    os << "end\n";
}

Atom read_atom(std::istream& is, const DiscreteSpace& space) {
    expect_header(is, "HOTYPE-ATOM v1");
    std::string count_s;
    const auto kv = read_block(is, "values", count_s);
    check_space(space, need(kv, "space"));
    Atom a;
    a.ball.center = space.check_index(parse_u64(need(kv, "ball.center")));
    a.ball.radius = parse_double(need(kv, "ball.radius"));
    a.ball.measure = parse_double(need(kv, "ball.measure"));
    a.spec.p = parse_double(need(kv, "spec.p"));
    a.spec.gamma = parse_double(need(kv, "spec.gamma"));
    a.spec.k = static_cast<int>(parse_u64(need(kv, "spec.k")));
    a.spec.alpha = parse_double(need(kv, "spec.alpha"));
    a.spec.beta = parse_double(need(kv, "spec.beta"));
    a.spec.hypothesis_ok = need(kv, "spec.hypothesis_ok") == "1";
    const std::string kind = need(kv, "kind"), prof = need(kv, "profile");
    if (kind != "sup" && kind != "l2") throw FormatError("unknown atom kind '" + kind + "'");
    if (prof != "uniform" && prof != "smooth") throw FormatError("unknown atom profile '" + prof + "'");
    a.kind = kind == "sup" ? AtomKind::SupNormalized : AtomKind::L2Normalized;
    a.profile = prof == "uniform" ? AtomProfile::Uniform : AtomProfile::Smooth;
    a.seed = parse_u64(need(kv, "seed"));
    for (const auto& t : split(need(kv, "residuals"))) a.moment_residuals.push_back(parse_double(t));
    const std::size_t n = parse_u64(count_s);
    std::vector<cplx> v(space.size(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto tok = split(next_line(is, "atom values"));
        if (tok.size() != 3) throw FormatError("atom row needs 'index re im'");
        const std::size_t i = space.check_index(parse_u64(tok[0]));
        if (!a.ball.members.empty() && i <= a.ball.members.back()) throw FormatError("atom indices must increase");
        a.ball.members.push_back(i);
        v[i] = cplx(parse_double(tok[1]), parse_double(tok[2]));
    }
    expect_end(is);
    a.function = DiscreteFunction(space, std::move(v));
    return a;
}

void save_ensemble(const std::string& dir, const DiscreteSpace& space, const Ensemble& ens) {
    std::filesystem::create_directories(dir);
    std::ofstream man(dir + "/manifest.txt");
    if (!man) throw Error("cannot write manifest in " + dir);
    man << "HOTYPE-ATOM-MANIFEST v1\n";
    man << "space " << space.id() << "\n";
    man << "rejected " << ens.rejected << "\n";
    man << "scales";
    for (double s : ens.scales) man << ' ' << fmt_double(s);
    man << "\natoms " << ens.atoms.size() << "\n";
    for (std::size_t k = 0; k < ens.atoms.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "atom-%04zu.txt", k);
        const std::string path = dir + "/" + name;
        {
            std::ofstream os(path);
            if (!os) throw Error("cannot write " + path);
            write_atom(os, space, ens.atoms[k]);
        }
        man << name << ' ' << ens.scale_index[k] << ' ' << file_hash(path) << '\n';
    }
    man << "end\n";
}

Ensemble load_ensemble(const std::string& dir, const DiscreteSpace& space) {
    std::ifstream man(dir + "/manifest.txt");
    if (!man) throw Error("cannot read manifest in " + dir);
    expect_header(man, "HOTYPE-ATOM-MANIFEST v1");
    std::string count_s;
    const auto kv = read_block(man, "atoms", count_s);
    check_space(space, need(kv, "space"));
    Ensemble ens;
    ens.rejected = parse_u64(need(kv, "rejected"));
    for (const auto& t : split(need(kv, "scales"))) ens.scales.push_back(parse_double(t));
    const std::size_t n = parse_u64(count_s);
    for (std::size_t k = 0; k < n; ++k) {
        const auto tok = split(next_line(man, "manifest rows"));
        if (tok.size() != 3) throw FormatError("manifest row needs 'file scale_index hash'");
        const std::string path = dir + "/" + tok[0];
        if (file_hash(path) != tok[2]) throw FormatError("hash mismatch for " + tok[0]);
        std::ifstream is(path);
        ens.atoms.push_back(read_atom(is, space));
        ens.scale_index.push_back(parse_u64(tok[1]));
        if (ens.scale_index.back() >= ens.scales.size()) throw FormatError("scale index out of range in manifest");
    }
    expect_end(man);
    return ens;
}

}  // namespace hotype
