#pragma once

#include <stdexcept>
#include <string>

#include "socnav/world.hpp"

namespace socnav {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Loads and fully validates a scenario document (see docs/scenario_format.md).
// Throws ScenarioError on parse failures, dangling references, a robot start
// in collision, or an unreachable goal.
ScenarioSpec load_scenario(const std::string& path);

// Parses a scenario from JSON text; base_dir resolves referenced pgm files.
ScenarioSpec parse_scenario(const std::string& json_text, const std::string& base_dir);

// Validation applied by load_scenario, usable on programmatic specs too.
void validate_scenario(const ScenarioSpec& spec);

}  // namespace socnav
