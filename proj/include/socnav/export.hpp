#pragma once

#include <string>

#include "socnav/report.hpp"
#include "socnav/runner.hpp"

namespace socnav {

// Per-tick pose/velocity/region rows; one header line plus a row per sample.
void export_trajectory_csv(const EpisodeReport& report, const std::string& path);

// Map outline, shaded regions, pedestrian and robot polylines, directive
// markers. scenario may be null; the map/regions/pedestrians are then
// omitted.
void export_trajectory_svg(const EpisodeReport& report, const ScenarioSpec* scenario,
                           const std::string& path);

struct CsvIngest {
  std::vector<TrajectorySample> trajectory;
  RegionOccupancy occupancy;
};

// Re-ingests an exported csv; throws std::runtime_error on truncated or
// non-monotonic logs.
CsvIngest ingest_trajectory_csv(const std::string& path);

struct ReplayResult {
  MetricValues recomputed;
  bool config_mismatch = false;  // metrics config hash differs from the log's
  bool values_match = false;     // recomputed metrics equal the stored block
};

// Recomputes metrics from a report's logs and compares with the stored
// values. A changed metrics config is flagged, not an error.
ReplayResult replay_report(const EpisodeReport& report, const MetricsConfig& config);

}  // namespace socnav
