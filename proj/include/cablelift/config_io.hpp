#pragma once

#include <string>

#include "cablelift/simloop.hpp"

namespace cablelift {

/// Parse a scenario config (TOML-style sections, key = value, arrays; strict
/// schema: unknown keys are errors, missing required keys are listed).
/// Quaternions in config files are scalar-last [x, y, z, w]; the reference
/// attitude is normalized on load.
Scenario parse_config(const std::string& path);
Scenario parse_config_string(const std::string& text);

/// Canonical lossless form: parse_config_string(serialize_scenario(s))
/// reproduces s exactly.
std::string serialize_scenario(const Scenario& s);
void save_config(const Scenario& s, const std::string& path);

/// Field-exact comparison (used by the round-trip contract).
bool scenario_equal(const Scenario& a, const Scenario& b);

}  // namespace cablelift
