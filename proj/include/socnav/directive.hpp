#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socnav/costmap.hpp"

namespace socnav {

enum class Mode { Follow, Goal, Explore, Idle };

std::string mode_name(Mode m);
std::optional<Mode> mode_from_name(const std::string& s);

struct DirectiveGoal {
  std::optional<std::string> region_id;
  std::optional<Vec2> point;

  bool operator==(const DirectiveGoal& o) const {
    if (region_id != o.region_id) return false;
    if (point.has_value() != o.point.has_value()) return false;
    if (point && (point->x != o.point->x || point->y != o.point->y)) return false;
    return true;
  }
};

// One slow-loop output bundle: mode, parameter updates, costmap markers and
// an optional navigation goal. Applied atomically at a fast-loop tick
// boundary.
struct Directive {
  Mode mode = Mode::Idle;
  std::map<std::string, double> param_updates;
  std::vector<SocialEntityAttr> markers;
  std::optional<DirectiveGoal> goal;
  double issued_at = 0.0;  // sim-time seconds
};

enum class ModulatorSourceKind { Scripted, Replay, External };

struct ModulatorConfig {
  double decision_period = 10.0;  // seconds
  double injected_latency = 0.0;  // seconds, sim-time
  ModulatorSourceKind source = ModulatorSourceKind::Scripted;
  std::string rules_path;       // scripted: rule table document
  std::string replay_log_path;  // replay: directive log
  std::string external_url;     // external: overrides MODULATOR_URL
};

}  // namespace socnav
