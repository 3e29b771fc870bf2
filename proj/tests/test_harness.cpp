#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hotype/harness.hpp"

using namespace hotype;
namespace hh = hotype::harness;
namespace fs = std::filesystem;

namespace {

hh::Config cfg(const std::string& body) { return hh::Config::parse_text("HOTYPE-CONFIG v1\n" + body); }

const char* kDuality =
    "[run]\nsuite = duality\nseed = 3\n[space]\nbuilder = grid\npoints = 401\n"
    "[params]\nnum_atoms = 40\nfunctions = smooth,sign\n";

std::string schema_message(const hh::Config& c) {
    try {
        c.resolve();
    } catch (const SchemaError& e) {
        return e.what();
    }
    return "";
}

const hh::Table& table(const hh::SuiteResult& r, const std::string& name) {
    const auto* t = r.table(name);
    REQUIRE(t != nullptr);
    return *t;
}

}  // namespace

TEST_CASE("config parsing enforces the version line and sections") {
    CHECK_THROWS_AS(hh::Config::parse_text("[run]\nsuite = norms\n"), SchemaError);
    CHECK_THROWS_AS(hh::Config::parse_text("HOTYPE-CONFIG v2\n"), SchemaError);
    CHECK_THROWS_AS(cfg("suite = norms\n"), SchemaError);
    CHECK_THROWS_AS(cfg("[run]\nsuite = norms\nsuite = atoms\n"), SchemaError);
    const auto c = cfg("# comment\n[run]\nsuite = norms\n\n[space]\nbuilder = grid\n");
    CHECK(c.get("run.suite") == "norms");
}

TEST_CASE("schema errors name the offending field") {
    CHECK(schema_message(cfg("[run]\nsuite = nope\n")).find("run.suite") != std::string::npos);
    CHECK(schema_message(cfg("[run]\nsuite = norms\n[params]\nbogus = 1\n")).find("params.bogus") != std::string::npos);
    CHECK(schema_message(cfg("[run]\nsuite = norms\n[params]\nfit_centers = ten\n")).find("params.fit_centers") !=
          std::string::npos);
    CHECK(schema_message(cfg("[run]\nsuite = norms\n[space]\nbuilder = grid\nn = 2\n")).find("space.n") !=
          std::string::npos);
    CHECK(schema_message(cfg("[run]\nsuite = atoms\n[params]\nalphas = 1\n")).find("params.alphas") !=
          std::string::npos);
    CHECK(schema_message(cfg("[space]\nbuilder = grid\n")).find("run.suite") != std::string::npos);
}

TEST_CASE("resolved config echoes every key in canonical form") {
    const auto r = cfg("[run]\nsuite = atoms\n[params]\np = 0.50\n").resolve();
    for (const auto& d : hh::schema("atoms", "grid")) CHECK(r.has(d.key));
    CHECK(r.get("params.p") == "0.5");
    CHECK(r.get("space.points") == "2001");
    CHECK(r.resolve().text() == r.text());
    CHECK(r.resolve().hash() == r.hash());
}

TEST_CASE("changing any echoed value changes the config hash") {
    const auto base = cfg("[run]\nsuite = duality\n").resolve();
    for (const auto& key : base.order()) {
        auto m = base;
        const auto& v = base.get(key);
        std::string nv;
        if (key == "run.suite" || key == "space.builder") continue;
        if (key == "params.kind") nv = "l2";
        else if (key == "params.functions") nv = "smooth";
        else if (key == "params.focus") nv = "0.25";
        else if (v.find(',') != std::string::npos || v.empty()) nv = v + ",7";
        else nv = std::isdigit(static_cast<unsigned char>(v.back())) ? v + "1" : "sup";
        m.set(key, nv);
        CHECK_MESSAGE(m.resolve().hash() != base.hash(), key);
    }
    auto with_dir = base;
    with_dir.set("run.output_dir", "/tmp/elsewhere");
    CHECK(with_dir.resolve().hash() == base.hash());
}

TEST_CASE("space builders honour the point budget") {
    CHECK_THROWS_AS(hh::build_space(cfg("[run]\nsuite = norms\n[space]\nbuilder = grid\ndim = 2\npoints = 400\n").resolve()),
                    BudgetExceeded);
    const auto s = hh::build_space(cfg("[run]\nsuite = norms\n[space]\npoints = 101\n").resolve(), 1);
    CHECK(s.size() == 201);
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
    const auto c = cfg(kDuality);
    ::setenv("HOTYPE_WORKERS", "1", 1);
    const auto a = hh::report_text(hh::run(c));
    ::setenv("HOTYPE_WORKERS", "3", 1);
    const auto b = hh::report_text(hh::run(c));
    ::unsetenv("HOTYPE_WORKERS");
    CHECK(a == b);
}

TEST_CASE("unit seeds are isolated from the other units of a suite") {
    const auto both = hh::run(cfg(kDuality));
    std::string only = kDuality;
    only.replace(only.find("smooth,sign"), 11, "sign");
    const auto one = hh::run(cfg(only));
    CHECK(table(both, "duality.sign.per_scale").rows == table(one, "duality.sign.per_scale").rows);
    CHECK(both.constant("duality.sign.slope") == one.constant("duality.sign.slope"));
    std::string reseeded = kDuality;
    reseeded.replace(reseeded.find("seed = 3"), 8, "seed = 4");
    CHECK(table(hh::run(cfg(reseeded)), "duality.sign.per_scale").rows != table(one, "duality.sign.per_scale").rows);
}

TEST_CASE("report text round-trips and detects tampering") {
    const auto r = hh::run(cfg(kDuality));
    const auto text = hh::report_text(r);
    const auto back = hh::parse_report(text);
    CHECK(hh::report_text(back) == text);
    CHECK(back.criteria.size() == r.criteria.size());
    auto tampered = text;
    const auto p = tampered.find("constant duality.");
    tampered[tampered.find(' ', p + 9) + 1] = 'x';
    CHECK_THROWS_AS(hh::parse_report(tampered), FormatError);
}

TEST_CASE("verify-report and plot data work from files") {
    const auto dir = fs::temp_directory_path() / "hotype-test-harness";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto r = hh::run(cfg(kDuality));
    const auto path = (dir / "duality.report").string();
    hh::write_report_file(path, r);
    const auto v = hh::verify_report(path, true, true);
    CHECK(v.ok());
    CHECK(v.space_ok);
    CHECK(v.rerun_ok);
    const auto files = hh::emit_plot_data(r, (dir / "plot").string());
    CHECK(std::find(files.begin(), files.end(), "manifest.txt") != files.end());
    CHECK(std::find(files.begin(), files.end(), "duality.sign.per_scale.csv") != files.end());
    std::ifstream csv(dir / "plot" / "duality.sign.per_scale.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header.find("scale [distance]") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("suites reject spaces they cannot use") {
    CHECK_THROWS_AS(hh::run(cfg("[run]\nsuite = szego\n[space]\npoints = 101\n")), KindMismatch);
    CHECK_THROWS_AS(hh::run(cfg("[run]\nsuite = commutator\n[space]\npoints = 5001\n")), BudgetExceeded);
}
