// hotype command-line front end.
#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "hotype/harness.hpp"

namespace hh = hotype::harness;

namespace {

// --section.key flags mirror config keys; values given on the command line win.
struct KeyFlags {
    std::map<std::string, std::string> values;

    void attach(CLI::App* app, const std::string& section_filter = "") {
        for (const auto& d : hh::all_keys()) {
            if (!section_filter.empty() && d.key.rfind(section_filter, 0) != 0) continue;
            if (d.key == "run.suite" && section_filter.empty()) continue;
            app->add_option_function<std::string>(
                   "--" + d.key, [this, k = d.key](const std::string& v) { values[k] = v; }, d.doc)
                ->group(d.key.substr(0, d.key.find('.')));
        }
    }

    void apply(hh::Config& cfg) const {
        for (const auto& [k, v] : values) cfg.set(k, v);
    }
};

hh::Config load_or_empty(const std::string& path) {
    if (!path.empty()) return hh::Config::load(path);
    return hh::Config::parse_text("HOTYPE-CONFIG v1\n");
}

void print_result(const hh::SuiteResult& r) {
    for (const auto& c : r.criteria)
        std::printf("%s %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    std::printf("suite %s space %s config %s: %s\n", r.suite.c_str(), r.space_id.c_str(), r.config_hash.c_str(),
                r.pass() ? "pass" : "fail");
}

int run_and_write(hh::Config cfg) {
    const hh::Config resolved = cfg.resolve();
    const std::string dir = resolved.has("run.output_dir") ? resolved.get("run.output_dir") : ".";
    const hh::SuiteResult r = hh::run(resolved);
    const std::string path = dir + "/" + r.suite + ".report";
    hh::write_report_file(path, r);
    print_result(r);
    std::printf("report %s\n", path.c_str());
    return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical harness for spaces of homogeneous type"};
    app.require_subcommand(1);

    auto* build = app.add_subcommand("build-space", "Build a space and save it as HOTYPE-SPACE v1");
    std::string build_config, build_out;
    KeyFlags build_flags;
    build->add_option("--config", build_config, "config file whose [space] section is used");
    build->add_option("-o,--output", build_out, "output file")->required();
    build_flags.attach(build, "space.");

    auto* cert = app.add_subcommand("cert", "Certify the structure constants of a space");
    std::string cert_config;
    KeyFlags cert_flags;
    cert->add_option("--config", cert_config, "config file");
    cert_flags.attach(cert);

    auto* run = app.add_subcommand("run", "Run the suite named in a config");
    std::string run_config;
    KeyFlags run_flags;
    run->add_option("config", run_config, "config file")->required();
    run_flags.attach(run);

    auto* plot = app.add_subcommand("plot-data", "Write one CSV per report table");
    std::string plot_report, plot_dir;
    plot->add_option("report", plot_report, "HOTYPE-EXP report")->required();
    plot->add_option("-o,--output-dir", plot_dir, "directory for CSV files")->required();

    auto* verify = app.add_subcommand("verify-report", "Re-check a report's hashes");
    std::string verify_path;
    bool rebuild = false, rerun = false;
    verify->add_option("report", verify_path, "HOTYPE-EXP report")->required();
    verify->add_flag("--rebuild-space", rebuild, "rebuild the space and compare its hash");
    verify->add_flag("--rerun", rerun, "rerun the suite and compare the report byte for byte");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (build->parsed()) {
            hh::Config cfg = load_or_empty(build_config);
            build_flags.apply(cfg);
            hh::Config only_space = hh::Config::parse_text("HOTYPE-CONFIG v1\n");
            for (const auto& [k, v] : cfg.values())
                if (k.rfind("space.", 0) == 0) only_space.set(k, v);
            only_space.set("run.suite", "space-cert");
            const auto space = hh::build_space(only_space.resolve());
            hotype::save_space(build_out, space);
            std::printf("space %s points %zu written to %s\n", space.id().c_str(), space.size(), build_out.c_str());
            return 0;
        }
        if (cert->parsed()) {
            hh::Config cfg = load_or_empty(cert_config);
            cert_flags.apply(cfg);
            cfg.set("run.suite", "space-cert");
            return run_and_write(cfg);
        }
        if (run->parsed()) {
            hh::Config cfg = hh::Config::load(run_config);
            run_flags.apply(cfg);
            return run_and_write(cfg);
        }
        if (plot->parsed()) {
            const auto r = hh::read_report_file(plot_report);
            for (const auto& f : hh::emit_plot_data(r, plot_dir)) std::printf("%s/%s\n", plot_dir.c_str(), f.c_str());
            return 0;
        }
        if (verify->parsed()) {
            const auto v = hh::verify_report(verify_path, rebuild, rerun);
            std::printf("report hash %s\n", v.report_hash_ok ? "ok" : "MISMATCH");
            std::printf("config hash %s\n", v.config_hash_ok ? "ok" : "MISMATCH");
            if (v.checked_space) std::printf("space hash %s\n", v.space_ok ? "ok" : "MISMATCH");
            if (v.checked_rerun) std::printf("rerun %s\n", v.rerun_ok ? "identical" : "DIFFERS");
            for (const auto& m : v.messages) std::fprintf(stderr, "%s\n", m.c_str());
            return v.ok() ? 0 : 1;
        }
    } catch (const hotype::SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return 2;
    } catch (const hotype::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
