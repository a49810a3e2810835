#pragma once

#include "cocyclelab/base.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/lds.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cocy::harness {

using Json = nlohmann::ordered_json;

// Flat key = value text with [base] [cocycle] [operation] [output] sections.
// Typed getters raise ConfigError naming section.key; keys nobody asked for
// are reported by check_consumed().
class ExperimentConfig {
public:
    static ExperimentConfig parse(const std::string& text, const std::string& origin = "<config>");
    static ExperimentConfig load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string str(const std::string& section, const std::string& key) const;
    std::string str(const std::string& section, const std::string& key, const std::string& fallback) const;
    double num(const std::string& section, const std::string& key) const;
    double num(const std::string& section, const std::string& key, double fallback) const;
    // number restricted to [lo, hi]
    double num_in(const std::string& section, const std::string& key, double fallback, double lo, double hi) const;
    long integer(const std::string& section, const std::string& key, long fallback, long lo, long hi) const;
    std::uint64_t seed() const;
    std::vector<double> numbers(const std::string& section, const std::string& key,
                                const std::vector<double>& fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);
    void check_consumed() const;

    const std::string& origin() const { return origin_; }
    Json echo() const;

private:
    const std::string* find(const std::string& section, const std::string& key) const;
    std::map<std::string, std::map<std::string, std::string>> sections_;
    mutable std::set<std::string> used_;
    std::string origin_;
};

// The base system named by [base].
struct BaseSpec {
    std::optional<DiscreteBase> map;
    std::optional<FlowBase> flow;
};
BaseSpec make_base(const ExperimentConfig& cfg);
MatrixCocycle make_cocycle(const ExperimentConfig& cfg, const std::string& rule_key = "rule");
Generator make_generator(const ExperimentConfig& cfg);

struct Check {
    std::string invariant;  // what is being compared
    double bound = 0.0;
    double measured = 0.0;
    bool pass = false;
    bool required = true;   // advisory checks do not fail the run
};

struct ResultRecord {
    std::string operation;
    Json config;
    std::uint64_t seed = 0;
    Json measured = Json::object();  // name -> {value, stderr}
    std::vector<Check> checks;
    std::optional<std::pair<std::string, std::string>> error;  // kind, message
    double wall_clock = 0.0;
    // plot-ready rows, written as CSV on request
    std::vector<std::string> csv_header;
    std::vector<std::vector<double>> csv_rows;

    void measure(const std::string& name, double value, double stderr_ = 0.0);
    void check(std::string invariant, double measured, double bound, bool pass, bool required = true);
    bool pass() const;
    Json to_json() const;
    std::string csv() const;
};

std::string version_string();

// Writes <dir>/<stem>.json (and <stem>.csv for format csv) via a temporary
// file and a rename, so readers never see a partial record.
void write_record(const ResultRecord& rec, const std::string& dir, const std::string& stem,
                  const std::string& format);
const std::vector<std::string>& operations();

// Runs one experiment. ConfigError propagates; module errors are recorded.
ResultRecord run(ExperimentConfig cfg);

// Minimal validator for the shipped JSON schema (type, required, properties,
// items, enum, minimum). Returns the list of violations.
std::vector<std::string> validate(const Json& instance, const Json& schema);
Json result_schema();

struct SuiteRow {
    std::string name;
    bool pass = false;
    bool config_error = false;
    std::string note;
};

struct SuiteSummary {
    std::vector<SuiteRow> rows;
    bool pass() const;
    bool config_error() const;
    std::string table() const;
};
// out_dir non-empty: each record also lands there as <config stem>.json
SuiteSummary suite(const std::vector<std::string>& config_paths, const std::optional<std::uint64_t>& seed,
                   const std::string& out_dir = "");

// ---------------------------------------------------------------- acceptance

struct CriterionResult {
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Criterion {
    int id = 0;
    std::string name;
    std::function<CriterionResult()> run;
};

const std::vector<Criterion>& acceptance_criteria();
// runs the selected criteria (all when empty), prints one line each
SuiteSummary run_acceptance(const std::vector<int>& ids, std::ostream& out);

}  // namespace cocy::harness
