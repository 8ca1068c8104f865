#pragma once

#include <string>

#include <json.hpp>

#include "perifront/scenario.hpp"

namespace perifront {

// Reaction object: {"kind": "cubic"|"cubic_xdep"|"combustion"|"plateau"|"tabulated", ...}
Reaction parse_reaction(const nlohmann::json& j, const std::string& path);

// Whole scenario config; throws ConfigError with a field path on bad input.
Scenario load_scenario_config(const std::string& config_text, const ScenarioOptions& overrides);

ScenarioOptions options_from_config(const nlohmann::json& j);

}  // namespace perifront
