#include "cocyclelab/errors.hpp"
#include "cocyclelab/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace h = cocy::harness;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
};

int run_one(const std::string& op, const Common& c) {
    h::ExperimentConfig cfg = h::ExperimentConfig::load(c.config);
    const std::string named = cfg.str("operation", "name", op);
    if (named != op) throw cocy::ConfigError("operation.name: config is for '" + named + "', not '" + op + "'");
    cfg.set("operation", "name", op);
    if (c.seed) cfg.set("operation", "seed", std::to_string(*c.seed));
    const std::string dir = !c.out.empty() ? c.out : cfg.str("output", "dir", "results");
    const std::string format = !c.format.empty() ? c.format : cfg.str("output", "format", "json");
    if (format != "json" && format != "csv") throw cocy::ConfigError("--format: expected json or csv");
    std::string stem = cfg.str("output", "name", "");
    if (stem.empty()) stem = std::filesystem::path(c.config).stem().string();

    const h::ResultRecord rec = h::run(cfg);
    h::write_record(rec, dir, stem, format);
    std::cout << rec.operation << ": " << (rec.pass() ? "pass" : "FAIL") << " (" << dir << "/" << stem << ".json)\n";
    if (rec.error) std::cout << "  error " << rec.error->first << ": " << rec.error->second << "\n";
    for (const auto& chk : rec.checks)
        std::cout << "  " << (chk.pass ? "ok  " : (chk.required ? "FAIL" : "note")) << "  " << chk.invariant << ": "
                  << chk.measured << " vs " << chk.bound << "\n";
    return rec.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cocyclelab: experiments on linear cocycles and linear differential systems"};
    app.require_subcommand(1);
    Common common;

    for (const auto& op : h::operations()) {
        CLI::App* sub = app.add_subcommand(op, "run a " + op + " experiment from a config file");
        sub->add_option("--config", common.config, "config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "override operation.seed");
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    }

    std::vector<std::string> configs;
    bool acceptance = false;
    std::vector<int> criteria;
    CLI::App* suite = app.add_subcommand("suite", "run a list of configs, or the acceptance criteria");
    suite->add_option("configs", configs, "config files");
    suite->add_option("--config", configs, "config file (repeatable)");
    suite->add_option("--seed", common.seed, "override every operation.seed");
    suite->add_option("--out", common.out, "write the summary table and records here");
    suite->add_flag("--acceptance", acceptance, "run the built-in acceptance criteria");
    suite->add_option("--criterion", criteria, "restrict --acceptance to these criterion ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (suite->parsed()) {
            h::SuiteSummary s;
            if (acceptance) s = h::run_acceptance(criteria, std::cout);
            const h::SuiteSummary runs = h::suite(configs, common.seed, common.out);
            s.rows.insert(s.rows.end(), runs.rows.begin(), runs.rows.end());
            const std::string table = s.table();
            std::cout << table;
            if (!common.out.empty()) {
                std::filesystem::create_directories(common.out);
                std::ofstream(std::filesystem::path(common.out) / "summary.txt") << table;
            }
            if (s.config_error()) return 2;
            return s.pass() ? 0 : 1;
        }
        for (const auto& op : h::operations())
            if (app.got_subcommand(op)) return run_one(op, common);
    } catch (const cocy::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
