#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hotype/io.hpp"
#include "hotype/operators.hpp"

namespace hotype::harness {

inline constexpr const char* kToolVersion = "hotype 0.1.0";

enum class ParamType { Integer, Real, String, RealList, StringList };

struct ParamDef {
    std::string key;  // section.name
    ParamType type = ParamType::Real;
    std::string default_value;
    std::string doc;
};

const std::vector<std::string>& suite_names();

/// Keys accepted for a suite and space builder, in echo order.
std::vector<ParamDef> schema(const std::string& suite, const std::string& builder);
/// Every key any suite or builder accepts (for CLI flag registration).
std::vector<ParamDef> all_keys();

/// Sectioned "key = value" configuration, versioned by its first line.
class Config {
public:
    static Config parse(std::istream& is);
    static Config parse_text(const std::string& text);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;

    /// Validates against the schema and fills defaults. Unknown keys and
    /// malformed values raise SchemaError naming the field.
    Config resolve() const;

    std::string text() const;
    std::string hash() const;

    long integer(const std::string& key) const;
    double real(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    std::vector<std::string> strings(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }
    const std::vector<std::string>& order() const { return order_; }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;  // echo order after resolve
};

/// Space described by the [space] section; level > 0 refines a grid builder
/// to (points - 1) * 2^level + 1 points per axis.
DiscreteSpace build_space(const Config& resolved, int level = 0);

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;  // "name [unit]"
    std::vector<std::vector<double>> rows;
};

struct SuiteResult {
    std::string suite;
    std::string tool_version = kToolVersion;
    std::string space_id;
    std::string config_hash;
    std::string config_text;
    std::vector<Criterion> criteria;
    std::vector<std::pair<std::string, double>> constants;
    std::vector<Table> tables;
    std::vector<std::string> notes;

    bool pass() const;
    double constant(const std::string& name) const;
    const Criterion& criterion(const std::string& name) const;
    const Table* table(const std::string& name) const;
};

/// Output of one independent work unit; units are assembled in declaration order.
struct UnitOutput {
    std::vector<Criterion> criteria;
    std::vector<std::pair<std::string, double>> constants;
    std::vector<Table> tables;
    std::vector<std::string> notes;
};

using WorkUnit = std::function<UnitOutput()>;

/// Runs units on worker_count() threads and concatenates outputs in unit order.
UnitOutput run_units(const std::vector<WorkUnit>& units);

/// Resolves, dispatches to the suite and fills provenance.
SuiteResult run(const Config& config);

// HOTYPE-EXP v1 report text; the last line before "end" is a hash of everything above it.
std::string report_text(const SuiteResult& r);
SuiteResult parse_report(const std::string& text);
void write_report_file(const std::string& path, const SuiteResult& r);
SuiteResult read_report_file(const std::string& path);

struct VerifyResult {
    bool report_hash_ok = false;
    bool config_hash_ok = false;
    bool space_ok = false;   // rebuilt space id matches
    bool checked_space = false;
    bool rerun_ok = false;   // rerun reproduces the report byte for byte
    bool checked_rerun = false;
    std::vector<std::string> messages;
    bool ok() const;
};

VerifyResult verify_report(const std::string& path, bool rebuild_space, bool rerun);

/// One CSV per nonempty table plus manifest.txt; returns written file names.
std::vector<std::string> emit_plot_data(const SuiteResult& r, const std::string& dir);

}  // namespace hotype::harness
