#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "socnav/export.hpp"
#include "socnav/runner.hpp"
#include "socnav/scenario.hpp"

namespace {

using namespace socnav;

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "none";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", *v);
  return buf;
}

void print_report_summary(const EpisodeReport& r) {
  std::cout << "scenario:       " << r.scenario_name << " (seed " << r.seed << ")\n"
            << "outcome:        " << (r.outcome.success ? "success" : "failure")
            << (r.outcome.failure_reason.empty() ? "" : " (" + r.outcome.failure_reason + ")")
            << "\n"
            << "duration:       " << r.metrics.duration << " s\n"
            << "collisions:     " << r.metrics.collision_count << "\n"
            << "smoothness:     " << fmt_opt(r.metrics.smoothness) << " rad (display score "
            << fmt_opt(r.metrics.smoothness_score) << ")\n"
            << "subject score:  " << fmt_opt(r.metrics.subject) << "\n"
            << "region score:   " << fmt_opt(r.metrics.region) << "\n";
  if (r.metrics.band_fraction)
    std::cout << "band fraction:  " << fmt_opt(r.metrics.band_fraction) << "\n";
  if (!r.latency_log.empty()) {
    for (const auto& [component, stats] : latency_stats(r.latency_log)) {
      std::cout << "latency " << component << ": mean " << stats.mean << " ms, p50 " << stats.p50
                << ", p95 " << stats.p95 << ", max " << stats.max << " (" << stats.count
                << " samples)\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic 2D social-navigation benchmark"};
  app.require_subcommand(1);

  // ---- run ----
  auto* run = app.add_subcommand("run", "Run one episode");
  std::string scenario_path, modulator = "scripted", out_dir, rules_path, replay_log, url;
  uint64_t seed = 1;
  double latency_ms = 0.0, decision_period = 10.0;
  bool disable_social = false, measure_latency = false, no_jitter = false;
  run->add_option("--scenario", scenario_path, "Scenario file")->required();
  run->add_option("--seed", seed, "Episode seed");
  run->add_option("--modulator", modulator, "scripted|replay|external")
      ->check(CLI::IsMember({"scripted", "replay", "external"}));
  run->add_option("--latency", latency_ms, "Injected slow-loop latency in milliseconds");
  run->add_option("--decision-period", decision_period, "Slow-loop period in seconds");
  run->add_option("--out", out_dir, "Directory for the episode report");
  run->add_option("--rules", rules_path, "Rule table for the scripted modulator");
  run->add_option("--replay-log", replay_log, "Directive log for the replay modulator");
  run->add_option("--url", url, "External modulator URL (default: env MODULATOR_URL)");
  run->add_flag("--disable-social-layer", disable_social, "Ablation: ignore costmap markers");
  run->add_flag("--measure-latency", measure_latency, "Record wall-clock latencies");
  run->add_flag("--no-jitter", no_jitter, "Disable randomized initial conditions");
  std::string metrics_config_path;
  run->add_option("--metrics-config", metrics_config_path, "Metrics coefficients file");

  // ---- batch ----
  auto* batch = app.add_subcommand("batch", "Run a benchmark suite");
  std::string suite_path, batch_out;
  batch->add_option("--suite", suite_path, "Suite file")->required();
  batch->add_option("--out", batch_out, "Output directory")->required();

  // ---- replay ----
  auto* replay = app.add_subcommand("replay", "Recompute metrics from a log");
  std::string replay_path, replay_csv;
  replay->add_option("--log", replay_path, "Episode report (json)")->required();
  replay->add_option("--csv", replay_csv, "Exported csv to re-ingest instead of the report log");

  // ---- export ----
  auto* exp = app.add_subcommand("export", "Export a trajectory");
  std::string export_log, export_format = "csv", export_out, export_scenario;
  exp->add_option("--log", export_log, "Episode report (json)")->required();
  exp->add_option("--format", export_format, "csv|svg")
      ->check(CLI::IsMember({"csv", "svg"}));
  exp->add_option("--out", export_out, "Output file")->required();
  exp->add_option("--scenario", export_scenario, "Scenario file (svg map/regions/pedestrians)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ScenarioSpec spec = load_scenario(scenario_path);
      RunConfig config;
      config.modulator.injected_latency = latency_ms / 1000.0;
      config.modulator.decision_period = decision_period;
      config.disable_social_layer = disable_social;
      config.measure_latency = measure_latency;
      config.randomize_initial = !no_jitter;
      if (!metrics_config_path.empty()) config.metrics = load_metrics_config(metrics_config_path);
      if (modulator == "scripted") {
        config.modulator.source = ModulatorSourceKind::Scripted;
        config.modulator.rules_path =
            rules_path.empty()
                ? (std::filesystem::path(scenario_path).parent_path() / "rules.json").string()
                : rules_path;
      } else if (modulator == "replay") {
        config.modulator.source = ModulatorSourceKind::Replay;
        if (replay_log.empty()) throw std::runtime_error("--modulator replay needs --replay-log");
        config.modulator.replay_log_path = replay_log;
      } else {
        config.modulator.source = ModulatorSourceKind::External;
        config.modulator.external_url = url;
      }

      EpisodeReport report = run_episode(spec, config, seed);
      print_report_summary(report);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::string file = spec.name + "_seed" + std::to_string(seed) + ".json";
        save_report(report, (std::filesystem::path(out_dir) / file).string());
        std::cout << "report written to " << (std::filesystem::path(out_dir) / file).string()
                  << "\n";
      }
      return report.outcome.success ? 0 : 1;
    }

    if (*batch) {
      SuiteConfig suite = load_suite(suite_path);
      suite.out_dir = batch_out;
      BatchResult result = run_batch(suite);
      std::cout << results_table_csv(result);
      std::cout << "reports written to " << batch_out << "\n";
      return 0;
    }

    if (*replay) {
      EpisodeReport report = load_report(replay_path);
      MetricsConfig config;  // defaults; the hash flags drift
      if (!replay_csv.empty()) {
        CsvIngest ingest = ingest_trajectory_csv(replay_csv);
        EpisodeReport from_csv = report;
        from_csv.trajectory = ingest.trajectory;
        from_csv.region_occupancy = ingest.occupancy;
        ReplayResult res = replay_report(from_csv, config);
        std::cout << "csv smoothness:    " << fmt_opt(res.recomputed.smoothness) << "\n"
                  << "csv region score:  " << fmt_opt(res.recomputed.region) << "\n"
                  << "stored smoothness: " << fmt_opt(report.metrics.smoothness) << "\n"
                  << "stored region:     " << fmt_opt(report.metrics.region) << "\n";
        bool ok = res.recomputed.smoothness == report.metrics.smoothness &&
                  res.recomputed.region == report.metrics.region;
        std::cout << (ok ? "csv round-trip: identical\n" : "csv round-trip: MISMATCH\n");
        return ok ? 0 : 1;
      }
      ReplayResult res = replay_report(report, config);
      if (res.config_mismatch)
        std::cout << "config-mismatch: metrics config differs from the one in the log\n";
      std::cout << "recomputed success:    " << res.recomputed.success << "\n"
                << "recomputed collisions: " << res.recomputed.collision_count << "\n"
                << "recomputed smoothness: " << fmt_opt(res.recomputed.smoothness) << "\n"
                << "recomputed subject:    " << fmt_opt(res.recomputed.subject) << "\n"
                << "recomputed region:     " << fmt_opt(res.recomputed.region) << "\n"
                << (res.values_match ? "metrics match the log\n" : "metrics DIFFER from the log\n");
      if (!res.values_match && !res.config_mismatch) return 1;
      return 0;
    }

    if (*exp) {
      EpisodeReport report = load_report(export_log);
      if (export_format == "csv") {
        export_trajectory_csv(report, export_out);
      } else {
        std::optional<ScenarioSpec> spec;
        if (!export_scenario.empty()) spec = load_scenario(export_scenario);
        export_trajectory_svg(report, spec ? &*spec : nullptr, export_out);
      }
      std::cout << "wrote " << export_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
