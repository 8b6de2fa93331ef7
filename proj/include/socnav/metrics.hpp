#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socnav/geometry.hpp"
#include "socnav/world.hpp"

namespace socnav {

// Angle normalization used by the curvature metric; see wrap_angle.
inline double wrap(double angle) { return wrap_angle(angle); }

struct TrajectorySample {
  double t = 0.0;
  Pose pose;
  double v = 0.0;
  double omega = 0.0;
};

// Cumulative absolute wrapped heading change between consecutive segments.
// Segments shorter than 1 cm are merged first. Undefined (nullopt) for fewer
// than 3 samples; lower is smoother.
std::optional<double> curvature_smoothness(const std::vector<TrajectorySample>& samples);

// Normalized companion for results tables: higher is better.
inline double smoothness_display_score(double raw) { return 100.0 / (1.0 + raw); }

struct MetricsConfig {
  double below_band_slope = 50.0;      // score drop across [0, d_min)
  double above_band_slope = 25.0;      // score drop per meter beyond d_max
  double keep_away_safe_distance = 1.5;  // meters
  double region_cap_per_region = 100.0;
  bool collision_fails_episode = false;  // strict mode

  std::string canonical_text() const;
  std::string hash() const;
};

// Reads coefficient overrides from a json document; missing keys keep the
// defaults above.
MetricsConfig load_metrics_config(const std::string& path);

enum class SubjectScoreMode { FollowBand, KeepAway };

struct SubjectTrack {
  std::string id;
  SubjectScoreMode mode = SubjectScoreMode::KeepAway;
  double d_min = 1.0;  // band bounds for FollowBand scoring
  double d_max = 3.0;
  std::vector<double> distances;  // one per tick
};

// Per-tick distance score in [0, 100].
double subject_tick_score(const SubjectTrack& subject, double distance,
                          const MetricsConfig& config);

// Mean over ticks then over subjects; nullopt when there are no scored
// subjects (rendered "none" in tables).
std::optional<double> subject_score(const std::vector<SubjectTrack>& subjects,
                                    const MetricsConfig& config);

// Per-tick region ids occupied by the robot, one entry per tick.
using RegionOccupancy = std::vector<std::vector<std::string>>;

// 100 minus the mean per-tick violation severity, each region's contribution
// capped; nullopt when the scenario has no forbidden or caution regions.
std::optional<double> region_score(const RegionOccupancy& occupancy,
                                   const std::vector<Region>& regions,
                                   const MetricsConfig& config);

struct LatencySample {
  std::string component;  // "slow_decide" or "fast_step"
  double ms = 0.0;
};

struct LatencyStats {
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
  int count = 0;
};

std::map<std::string, LatencyStats> latency_stats(const std::vector<LatencySample>& log);

struct Outcome {
  bool success = false;
  std::string failure_reason;  // empty on success
};

}  // namespace socnav
