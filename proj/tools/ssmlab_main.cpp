// ssmlab: scenario runner for the spin-wave modulator simulation.
//
// Exit codes: 0 all criteria met (or informational command), 1 at least one
// criterion failed, 2 execution error (bad config, I/O, ...).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssmlab/scenario.hpp"

namespace {

int cmd_list() {
    const auto names = ssmlab::list_scenarios();
    const auto descs = ssmlab::scenario_descriptions();
    size_t width = 0;
    for (const auto& n : names) width = std::max(width, n.size());
    for (size_t i = 0; i < names.size(); ++i)
        std::printf("%-*s  %s\n", static_cast<int>(width), names[i].c_str(),
                    descs[i].c_str());
    return 0;
}

int cmd_validate(const std::string& path) {
    const auto problems = ssmlab::validate_config_file(path);
    if (problems.empty()) {
        std::printf("%s: ok\n", path.c_str());
        return 0;
    }
    for (const auto& p : problems)
        std::fprintf(stderr, "%s: %s\n", path.c_str(), p.c_str());
    return 2;
}

int cmd_run(const std::string& scenario, const std::string& config_path,
            const std::vector<std::string>& overrides, const std::string& out_dir,
            bool quiet) {
    ssmlab::json user;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::fprintf(stderr, "error: cannot read '%s'\n", config_path.c_str());
            return 2;
        }
        user = ssmlab::json::parse(in);
    }
    ssmlab::json cfg = ssmlab::merge_config(scenario, user);
    ssmlab::apply_overrides(cfg, overrides);
    if (!out_dir.empty()) cfg["output_dir"] = out_dir;

    const ssmlab::ScenarioReport report = ssmlab::run_scenario(cfg);

    if (!quiet) {
        std::printf("scenario: %s (seed %llu)\n", scenario.c_str(),
                    static_cast<unsigned long long>(cfg.at("seed").get<uint64_t>()));
        for (const auto& c : report.data.at("criteria")) {
            std::printf("  [%s] %s = %.6g (%s)\n",
                        c.at("pass").get<bool>() ? "PASS" : "FAIL",
                        c.at("name").get<std::string>().c_str(),
                        c.at("value").get<double>(),
                        c.at("target").get<std::string>().c_str());
        }
        std::printf("result: %s (%.1f s)\n", report.passed ? "PASS" : "FAIL",
                    report.wall_clock_s);
        if (!out_dir.empty())
            std::printf("report: %s/report.json\n", out_dir.c_str());
    }
    return report.passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-wave modulator simulation scenarios"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "list available scenarios");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "validate a config file");
    validate->add_option("file", validate_path, "JSON config to check")->required();

    std::string scenario, config_path, out_dir;
    std::vector<std::string> overrides;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "run a scenario");
    run->add_option("scenario", scenario, "scenario name (see `ssmlab list`)")->required();
    run->add_option("--config", config_path, "JSON config merged over the defaults");
    run->add_option("--set", overrides, "override single keys, e.g. --set camera.gain=3");
    run->add_option("--out", out_dir, "output directory for report and data files");
    run->add_flag("--quiet", quiet, "suppress the per-criterion summary");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) return cmd_list();
        if (validate->parsed()) return cmd_validate(validate_path);
        return cmd_run(scenario, config_path, overrides, out_dir, quiet);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
