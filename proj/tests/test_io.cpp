#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hotype/io.hpp"

using namespace hotype;
namespace fs = std::filesystem;

namespace {

DiscreteSpace round_trip(const DiscreteSpace& s) {
    std::stringstream ss;
    write_space(ss, s);
    return read_space(ss);
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("hotype-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("spaces round-trip bit for bit") {
    for (const auto& s : {build_grid_space(2, 1.0, 9), build_heisenberg_space(1, 1.0, 5),
                          build_sphere_space(2, 300, 4), normalize_metric(build_grid_space(1, 1.0, 201), 1.0)}) {
        const auto t = round_trip(s);
        CHECK(t.id() == s.id());
        CHECK(t.all_coords() == s.all_coords());
        CHECK(t.weights() == s.weights());
        CHECK(t.constants().A == s.constants().A);
        CHECK(t.metric().normalized == s.metric().normalized);
    }
}

TEST_CASE("malformed space files raise FormatError") {
    const auto s = build_grid_space(1, 1.0, 5);
    std::stringstream ss;
    write_space(ss, s);
    const std::string text = ss.str();
    {
        std::istringstream bad("HOTYPE-SPACE v2\n" + text.substr(text.find('\n') + 1));
        CHECK_THROWS_AS(read_space(bad), FormatError);
    }
    {
        std::string t = text;
        t.replace(t.find("end"), 3, "");
        std::istringstream bad(t);
        CHECK_THROWS_AS(read_space(bad), FormatError);
    }
    {
        std::string t = text;
        const auto p = t.find("points 5");
        t.replace(p, 8, "points 6");
        std::istringstream bad(t);
        CHECK_THROWS_AS(read_space(bad), FormatError);
    }
}

TEST_CASE("functions and norm reports round-trip and are tied to their space") {
    const auto s = build_grid_space(1, 1.0, 101), other = build_grid_space(1, 1.0, 103);
    const auto f = DiscreteFunction::from(s, [](const double* x) { return cplx(std::sin(x[0]), 1 / 3.0); });
    std::stringstream ss;
    write_function(ss, s, f);
    const std::string text = ss.str();
    std::istringstream in(text);
    CHECK(read_function(in, s).values == f.values);
    std::istringstream in2(text);
    CHECK_THROWS_AS(read_function(in2, other), SpaceMismatch);

    const auto rep = bmo_norm(s, f);
    std::stringstream rs;
    write_report(rs, s, rep);
    const auto back = read_report(rs, s);
    CHECK(back.value == rep.value);
    CHECK(back.witness.center == rep.witness.center);
    CHECK(back.grid.radii == rep.grid.radii);
    CHECK(back.grid.centers == rep.grid.centers);
}

TEST_CASE("atom ensembles round-trip through a directory with hashes") {
    const auto s = build_grid_space(1, 1.0, 301);
    const auto fam = PolynomialFamily::for_space(s);
    EnsembleSpec es;
    es.num_atoms = 20;
    const auto ens = atom_ensemble(s, fam, moment_spec(0.5, 1.0), es);
    const auto dir = scratch("ens");
    save_ensemble(dir.string(), s, ens);
    const auto back = load_ensemble(dir.string(), s);
    REQUIRE(back.atoms.size() == ens.atoms.size());
    for (std::size_t i = 0; i < ens.atoms.size(); ++i) {
        CHECK(back.atoms[i].function.values == ens.atoms[i].function.values);
        CHECK(back.atoms[i].ball.members == ens.atoms[i].ball.members);
        CHECK(back.scale_index[i] == ens.scale_index[i]);
    }
    {
        std::ofstream tamper(dir / "atom-0003.txt", std::ios::app);
        tamper << "\n";
    }
    CHECK_THROWS_AS(load_ensemble(dir.string(), s), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("file hash changes with content") {
    const auto dir = scratch("hash");
    const auto p = (dir / "a.space").string();
    save_space(p, build_grid_space(1, 1.0, 11));
    const auto h1 = file_hash(p);
    CHECK(h1.size() == 16);
    save_space(p, build_grid_space(1, 1.0, 13));
    CHECK(file_hash(p) != h1);
    CHECK(load_space(p).size() == 13);
    fs::remove_all(dir);
}
