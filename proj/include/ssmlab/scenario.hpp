#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace ssmlab {

using json = nlohmann::json;

/// Names of the built-in scenarios, in registry order.
std::vector<std::string> list_scenarios();

/// One-line description per scenario, same order as list_scenarios().
std::vector<std::string> scenario_descriptions();

/// Full default configuration for a scenario (includes a seed).
json default_config(const std::string& scenario);

/// Deep-merge a user config over the scenario defaults. The user config must
/// carry its own "seed" (determinism is opt-in, never implicit) and may not
/// disagree with `scenario` if it names one.
json merge_config(const std::string& scenario, const json& user);

/// Apply `--set path.to.key=value` overrides (value parsed as JSON when
/// possible, else kept as string).
void apply_overrides(json& config, const std::vector<std::string>& overrides);

/// Structural and cross-field validation; returns human-readable problems,
/// empty when the config is runnable.
std::vector<std::string> validate_config(const json& config);

/// Convenience: read a config file and validate it against its scenario.
std::vector<std::string> validate_config_file(const std::string& path);

struct ScenarioReport {
    json data;          // what gets written to report.json (no timestamps)
    bool passed = false;
    double wall_clock_s = 0.0;
};

/// Run a scenario. Writes report.json, config.json, timing.json, maps and
/// CSV series into config["output_dir"] (created if needed; empty string
/// disables file output). Throws ValidationError on a bad config.
ScenarioReport run_scenario(const json& config);

} // namespace ssmlab
