#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socnav/directive.hpp"
#include "socnav/metrics.hpp"
#include "socnav/world.hpp"

namespace socnav {

struct AppliedDirective {
  double at = 0.0;  // sim time of atomic application
  Directive directive;
  // Parameter values in effect right after application, for rule audits.
  std::map<std::string, double> applied_params;
};

struct MetricValues {
  bool success = false;
  std::string failure_reason;
  int collision_count = 0;
  std::optional<double> smoothness;        // radians, lower is smoother
  std::optional<double> smoothness_score;  // 100 / (1 + smoothness)
  std::optional<double> subject;
  std::optional<double> region;
  std::optional<double> band_fraction;  // post-acquisition in-band fraction
  double duration = 0.0;
};

// Task facts echoed into the report so metrics are recomputable from the
// log alone.
struct TaskEcho {
  double time_limit = 60.0;
  std::vector<std::string> forbidden_regions;
  std::optional<FollowRule> follow;
  bool goal_reached = false;
};

struct ScoredRegion {
  std::string id;
  RegionKind kind = RegionKind::Neutral;
  double severity_weight = 0.0;
};

// Everything recorded about one episode; all per-tick logs cover the same
// tick range as the trajectory.
struct EpisodeReport {
  std::string scenario_name;
  uint64_t seed = 0;
  double dt = 0.05;
  std::vector<TrajectorySample> trajectory;
  RegionOccupancy region_occupancy;
  std::vector<CollisionEvent> collisions;
  std::vector<SubjectTrack> subjects;
  std::vector<AppliedDirective> directives;
  std::vector<LatencySample> latency_log;
  TaskEcho task;
  std::vector<ScoredRegion> scored_regions;
  Outcome outcome;
  MetricValues metrics;
  std::string metrics_config_hash;
};

std::string report_to_json(const EpisodeReport& report);
EpisodeReport report_from_json(const std::string& text);

void save_report(const EpisodeReport& report, const std::string& path);
EpisodeReport load_report(const std::string& path);

}  // namespace socnav
