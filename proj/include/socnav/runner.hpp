#pragma once

#include <functional>
#include <string>
#include <vector>

#include "socnav/directive.hpp"
#include "socnav/metrics.hpp"
#include "socnav/modulator.hpp"
#include "socnav/report.hpp"
#include "socnav/scenario.hpp"
#include "socnav/sfm.hpp"

namespace socnav {

struct RunConfig {
  double dt = 0.05;  // 20 Hz fast loop
  LidarConfig lidar{.beam_count = 360, .angle_min = -M_PI, .angle_max = M_PI, .max_range = 8.0};
  // Ground-truth oracle: full surround, ranged to cover the bundled maps;
  // occlusion against walls still applies.
  FovConfig fov{.fov = 2.0 * M_PI, .range = 25.0};
  ModulatorConfig modulator;
  MetricsConfig metrics;
  SfmParams base_params;

  double replan_period = 1.0;       // seconds between global replans
  double waypoint_lookahead = 0.6;  // meters
  double arrival_radius = 0.25;     // brake instead of chasing the last waypoint
  double social_agent_range = 6.0;  // meters; follow targets are always kept

  // Randomized initial conditions, derived from the episode seed.
  bool randomize_initial = true;
  double start_jitter_pos = 0.3;                  // meters
  double start_jitter_theta = 15.0 * M_PI / 180;  // radians
  double ped_phase_jitter = 0.5;                  // seconds

  bool disable_social_layer = false;  // ablation: markers are ignored
  bool measure_latency = false;       // wall-clock capture breaks byte-identity
};

// Composes the fast loop (costmap + forces + controller) with the slow loop
// (directive source + scheduler) and runs one episode to termination.
// Fully deterministic for a given (scenario, config, seed) when latency
// measurement is off.
EpisodeReport run_episode(const ScenarioSpec& scenario, const RunConfig& config, uint64_t seed);

// Recomputes the metric block from the report's logs alone; run_episode and
// replay share this path.
MetricValues compute_episode_metrics(const EpisodeReport& report, const MetricsConfig& config);

struct SuiteConfig {
  std::vector<std::string> scenario_paths;
  int repetitions = 5;
  uint64_t base_seed = 1;
  RunConfig run;
  std::string out_dir;  // empty: reports are not written
};

SuiteConfig load_suite(const std::string& path);

struct ScenarioAggregate {
  std::string scenario;
  int episodes = 0;
  double success_rate = 0.0;    // percent
  double collision_rate = 0.0;  // percent of episodes with >= 1 collision
  std::optional<double> smoothness;
  std::optional<double> smoothness_score;
  std::optional<double> subject;
  std::optional<double> region;
};

struct BatchResult {
  std::vector<EpisodeReport> reports;  // ordered by (scenario, repetition)
  std::vector<ScenarioAggregate> aggregates;
};

// Deterministic per-episode seed: mixes the base seed, scenario name and
// repetition index without global state.
uint64_t derive_episode_seed(uint64_t base_seed, const std::string& scenario_id, int repetition);

BatchResult run_batch(const SuiteConfig& suite);

// Results table with Table-style columns; absent metrics render "none".
std::string results_table_csv(const BatchResult& result);

}  // namespace socnav
