#include "socnav/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "socnav/global_path.hpp"

namespace socnav {

using nlohmann::json;

namespace {

// splitmix64: portable deterministic stream, independent of libstdc++
// distribution internals.
struct SplitMix64 {
  uint64_t state;
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double wall_ms(std::chrono::steady_clock::time_point t0) {
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

std::map<std::string, double> snapshot_params(const SfmParams& p) {
  std::map<std::string, double> out;
  for (const auto& key : param_keys()) out[key] = get_param(p, key);
  return out;
}

bool start_pose_valid(const ScenarioSpec& spec, const Pose& pose) {
  ScenarioSpec probe = spec;
  probe.robot_start = pose;
  int row, col;
  if (!probe.static_map.world_to_cell(pose.position(), row, col)) return false;
  if (probe.static_map.occupied(row, col)) return false;
  World w(std::move(probe));
  return !w.robot_in_static_collision();
}

// Pure-pursuit carrot: project the robot onto the waypoint polyline, then
// advance `lookahead` meters along it. A continuous carrot avoids the
// heading dither that discrete waypoint hopping produces.
Vec2 carrot_on_path(const std::vector<Vec2>& path, const Vec2& rp, double lookahead) {
  if (path.size() == 1) return path.front();

  size_t best_seg = 0;
  double best_u = 0.0, best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    Vec2 a = path[i], b = path[i + 1];
    Vec2 ab = b - a;
    double len2 = ab.squaredNorm();
    double u = len2 < 1e-12 ? 0.0 : std::clamp((rp - a).dot(ab) / len2, 0.0, 1.0);
    double d2 = (rp - (a + ab * u)).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_seg = i;
      best_u = u;
    }
  }

  double remaining = lookahead;
  Vec2 cur = path[best_seg] + (path[best_seg + 1] - path[best_seg]) * best_u;
  for (size_t i = best_seg; i + 1 < path.size(); ++i) {
    Vec2 to_next = path[i + 1] - cur;
    double len = to_next.norm();
    if (remaining <= len) return cur + to_next * (len < 1e-12 ? 0.0 : remaining / len);
    remaining -= len;
    cur = path[i + 1];
  }
  return path.back();
}

}  // namespace

uint64_t derive_episode_seed(uint64_t base_seed, const std::string& scenario_id, int repetition) {
  SplitMix64 rng{base_seed ^ fnv1a(scenario_id) ^
                 (0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(repetition + 1))};
  return rng.next();
}

MetricValues compute_episode_metrics(const EpisodeReport& report, const MetricsConfig& config) {
  MetricValues m;
  m.collision_count = static_cast<int>(report.collisions.size());
  m.duration = report.trajectory.empty()
                   ? 0.0
                   : report.trajectory.back().t - report.trajectory.front().t;

  m.smoothness = curvature_smoothness(report.trajectory);
  if (m.smoothness) m.smoothness_score = smoothness_display_score(*m.smoothness);

  m.subject = subject_score(report.subjects, config);

  std::vector<Region> scored;
  for (const auto& s : report.scored_regions) {
    Region r;
    r.id = s.id;
    r.kind = s.kind;
    r.severity_weight = s.severity_weight;
    scored.push_back(std::move(r));
  }
  m.region = region_score(report.region_occupancy, scored, config);

  // Band maintenance over post-acquisition ticks.
  if (report.task.follow) {
    const auto& follow = *report.task.follow;
    const SubjectTrack* track = nullptr;
    for (const auto& s : report.subjects)
      if (s.id == follow.target_id && s.mode == SubjectScoreMode::FollowBand) track = &s;
    if (track && !track->distances.empty()) {
      size_t acq = track->distances.size();
      for (size_t i = 0; i < track->distances.size(); ++i) {
        if (track->distances[i] >= follow.d_min && track->distances[i] <= follow.d_max) {
          acq = i;
          break;
        }
      }
      if (acq == track->distances.size()) {
        m.band_fraction = 0.0;
      } else {
        size_t in_band = 0, total = track->distances.size() - acq;
        for (size_t i = acq; i < track->distances.size(); ++i) {
          if (track->distances[i] >= follow.d_min && track->distances[i] <= follow.d_max)
            ++in_band;
        }
        m.band_fraction = static_cast<double>(in_band) / static_cast<double>(total);
      }
    }
  }

  size_t forbidden_ticks = 0;
  for (const auto& tick : report.region_occupancy) {
    for (const auto& id : tick) {
      if (std::find(report.task.forbidden_regions.begin(), report.task.forbidden_regions.end(),
                    id) != report.task.forbidden_regions.end()) {
        ++forbidden_ticks;
        break;
      }
    }
  }

  bool within_time = m.duration <= report.task.time_limit + 1e-9;
  bool band_ok = !report.task.follow || (m.band_fraction.has_value() &&
                                         *m.band_fraction >= report.task.follow->min_band_fraction);
  bool collisions_ok = !config.collision_fails_episode || report.collisions.empty();

  if (!report.task.goal_reached || !within_time) {
    m.success = false;
    m.failure_reason = "timeout";
  } else if (forbidden_ticks > 0) {
    m.success = false;
    m.failure_reason = "semantic_violation";
  } else if (!band_ok) {
    m.success = false;
    m.failure_reason = "band_violation";
  } else if (!collisions_ok) {
    m.success = false;
    m.failure_reason = "collision";
  } else {
    m.success = true;
  }
  return m;
}

EpisodeReport run_episode(const ScenarioSpec& scenario, const RunConfig& config, uint64_t seed) {
  ScenarioSpec spec = scenario;
  SplitMix64 rng{seed};

  // Randomized initial conditions: start-pose jitter and pedestrian phase
  // offsets, all drawn up-front so the stream is independent of acceptance.
  std::vector<double> phases(spec.pedestrians.size(), 0.0);
  if (config.randomize_initial) {
    double dx = rng.uniform(-1.0, 1.0) * config.start_jitter_pos;
    double dy = rng.uniform(-1.0, 1.0) * config.start_jitter_pos;
    double dth = rng.uniform(-1.0, 1.0) * config.start_jitter_theta;
    for (auto& phase : phases) phase = rng.uniform(0.0, config.ped_phase_jitter);

    for (double scale = 1.0; scale > 1e-3; scale *= 0.5) {
      Pose p = scenario.robot_start;
      p.x += dx * scale;
      p.y += dy * scale;
      p.theta = wrap_angle(p.theta + dth * scale);
      if (start_pose_valid(scenario, p)) {
        spec.robot_start = p;
        break;
      }
    }
  }

  World world(spec);
  for (size_t i = 0; i < spec.pedestrians.size(); ++i)
    world.set_pedestrian_phase(spec.pedestrians[i].id, phases[i]);

  CostmapStack stack(spec.static_map, spec.robot_radius);
  SfmParams params = config.base_params;
  auto source = make_source(config.modulator);
  DirectiveScheduler scheduler;

  EpisodeReport report;
  report.scenario_name = spec.name;
  report.seed = seed;
  report.dt = config.dt;
  report.metrics_config_hash = config.metrics.hash();
  report.task.time_limit = spec.task.time_limit;
  report.task.forbidden_regions = spec.task.forbidden_regions;
  report.task.follow = spec.task.follow;
  for (const auto& r : spec.regions) {
    if (r.kind == RegionKind::Forbidden || r.kind == RegionKind::Caution)
      report.scored_regions.push_back({r.id, r.kind, r.severity_weight});
  }

  // Scored subjects: the follow target (band) plus vulnerable pedestrians.
  if (spec.task.follow) {
    SubjectTrack track;
    track.id = spec.task.follow->target_id;
    track.mode = SubjectScoreMode::FollowBand;
    track.d_min = spec.task.follow->d_min;
    track.d_max = spec.task.follow->d_max;
    report.subjects.push_back(std::move(track));
  }
  for (const auto& ped : spec.pedestrians) {
    if (!ped.vulnerable) continue;
    if (spec.task.follow && spec.task.follow->target_id == ped.id) continue;
    SubjectTrack track;
    track.id = ped.id;
    track.mode = SubjectScoreMode::KeepAway;
    report.subjects.push_back(std::move(track));
  }

  std::vector<Directive> history;
  std::vector<SocialEntityAttr> markers;
  Mode mode = Mode::Idle;
  std::optional<Vec2> nav_goal;
  std::optional<std::string> follow_target_id;
  std::optional<Vec2> follow_prev_pos;  // finite-difference target velocity
  double next_decision = 0.0;
  double next_replan = 0.0;
  bool replan_now = false;
  std::optional<Vec2> last_plan_goal;
  std::vector<Vec2> waypoints;

  auto resolve_goal = [&](const std::optional<DirectiveGoal>& g) -> std::optional<Vec2> {
    if (!g) return std::nullopt;
    if (g->point) return g->point;
    if (g->region_id) {
      const Region* region = spec.find_region(*g->region_id);
      if (region) return region->centroid();
    }
    return std::nullopt;
  };

  auto resolve_marker_positions = [&](std::vector<SocialEntityAttr> ms) {
    for (auto& m : ms) {
      if (spec.find_pedestrian(m.entity_id)) {
        m.position = world.pedestrian_position(m.entity_id);
      } else if (const Region* r = spec.find_region(m.entity_id)) {
        m.position = r->centroid();
      }
    }
    return ms;
  };

  auto goal_reached_now = [&]() {
    Vec2 p = world.robot().pose.position();
    if (spec.task.goal.region_id) {
      const Region* region = spec.find_region(*spec.task.goal.region_id);
      return region && point_in_region(*region, p);
    }
    if (spec.task.goal.point)
      return (p - *spec.task.goal.point).norm() <= spec.task.goal.radius;
    return false;
  };

  auto log_tick = [&]() {
    const RobotState& r = world.robot();
    report.trajectory.push_back({world.sim_time(), r.pose, r.v, r.omega});
    std::vector<std::string> inside;
    for (const auto& region : spec.regions)
      if (point_in_region(region, r.pose.position())) inside.push_back(region.id);
    report.region_occupancy.push_back(std::move(inside));
    for (auto& track : report.subjects)
      track.distances.push_back(
          (world.pedestrian_position(track.id) - r.pose.position()).norm());
  };

  const std::vector<SocialEntityAttr> no_markers;
  bool goal_reached = false;

  while (true) {
    double t = world.sim_time();
    log_tick();

    if (goal_reached_now()) {
      goal_reached = true;
      break;
    }
    if (t >= spec.task.time_limit - 1e-9) break;

    // Slow loop: decision cycle.
    if (t + 1e-9 >= next_decision) {
      DecisionContext ctx;
      ctx.instruction = spec.instruction;
      ctx.detections = world.detect_entities(config.fov);
      ctx.robot = world.robot();
      ctx.sim_time = t;
      ctx.history = &history;
      auto t0 = std::chrono::steady_clock::now();
      std::optional<Directive> directive = source->decide(ctx);
      if (config.measure_latency)
        report.latency_log.push_back({"slow_decide", wall_ms(t0)});
      if (directive) {
        directive->issued_at = t;
        scheduler.submit(std::move(*directive), t + config.modulator.injected_latency);
      }
      next_decision += config.modulator.decision_period;
    }

    // Atomic directive application at the tick boundary: parameters,
    // markers, mode and goal swap together.
    if (auto due = scheduler.poll(t)) {
      try {
        SfmParams next = apply_param_update(params, due->param_updates);
        params = next;
        markers = resolve_marker_positions(due->markers);
        mode = due->mode;
        nav_goal = resolve_goal(due->goal);
        follow_target_id.reset();
        for (const auto& m : markers)
          if (m.band) {
            follow_target_id = m.entity_id;
            break;
          }
        if (!follow_target_id && mode == Mode::Follow && spec.task.follow)
          follow_target_id = spec.task.follow->target_id;
        history.push_back(*due);
        report.directives.push_back({t, *due, snapshot_params(params)});
        replan_now = true;
      } catch (const std::invalid_argument& e) {
        // Whole directive rejected; the fast loop keeps the previous state.
        std::cerr << "[runner] directive rejected: " << e.what() << "\n";
      }
    }

    auto fast_t0 = std::chrono::steady_clock::now();

    // Markers anchored to tracked pedestrians follow them between slow-loop
    // refreshes.
    for (auto& m : markers) {
      if (spec.find_pedestrian(m.entity_id))
        m.position = world.pedestrian_position(m.entity_id);
    }

    LidarScan scan = world.sense_lidar(config.lidar);
    stack.update_obstacle_layer(scan, world.robot().pose);
    stack.apply_social_entities(config.disable_social_layer ? no_markers : markers);
    stack.merge_layers();

    // Navigation goal point for this tick.
    std::optional<Vec2> goal_point;
    if (mode == Mode::Follow && follow_target_id && spec.find_pedestrian(*follow_target_id)) {
      Vec2 target = world.pedestrian_position(*follow_target_id);
      double lo = params.d_min, hi = params.d_max;
      for (const auto& m : markers)
        if (m.band && m.entity_id == *follow_target_id) {
          lo = m.band->first;
          hi = m.band->second;
        }
      // Stand-off behind the target's motion; a robot-relative direction
      // would let robot wiggle rotate the stand-off around the target.
      Vec2 away;
      if (follow_prev_pos) {
        Vec2 vel = (target - *follow_prev_pos) / config.dt;
        if (vel.norm() > 0.05) away = -vel.normalized();
      }
      if (away.norm() < 0.5) {
        away = (world.robot().pose.position() - target).normalized();
        if (away.norm() < 0.5) away = -world.robot().pose.heading();
      }
      follow_prev_pos = target;
      goal_point = target + away * ((lo + hi) * 0.5);
    } else if (mode == Mode::Goal || mode == Mode::Explore) {
      goal_point = nav_goal;
    }

    // A moving goal (follow stand-off) invalidates the plan well before the
    // periodic replan would.
    bool goal_drifted =
        goal_point && last_plan_goal && (*goal_point - *last_plan_goal).norm() > 0.25;
    if (goal_point && (replan_now || goal_drifted || t + 1e-9 >= next_replan)) {
      Vec2 plan_start = world.robot().pose.position();
      if (auto snapped = nearest_free_point(stack, plan_start, 1.0)) plan_start = *snapped;
      Vec2 plan_goal = *goal_point;
      if (auto snapped = nearest_free_point(stack, plan_goal, 1.5)) plan_goal = *snapped;
      if (auto path = plan_global_path(stack, plan_start, plan_goal)) {
        waypoints = path->waypoints;
      } else {
        waypoints = {*goal_point};  // no grid path; steer directly and let forces act
      }
      last_plan_goal = goal_point;
      next_replan = t + config.replan_period;
      replan_now = false;
    }
    if (!goal_point) {
      waypoints.clear();
      last_plan_goal.reset();
    }

    std::optional<Vec2> waypoint;
    if (!waypoints.empty()) {
      Vec2 rp = world.robot().pose.position();
      waypoint = carrot_on_path(waypoints, rp, config.waypoint_lookahead);
      // Inside the arrival radius of the path end the desired force would
      // flip direction every tick; brake instead.
      if ((waypoints.back() - rp).norm() < config.arrival_radius) waypoint.reset();
    }

    Vec2 f_desired =
        waypoint ? compute_desired_force(world.robot(), *waypoint, params) : Vec2{0.0, 0.0};
    Vec2 f_obstacle = compute_obstacle_force(world.robot(), stack, params);

    std::vector<AgentView> agents;
    Vec2 rp = world.robot().pose.position();
    for (const auto& ped : spec.pedestrians) {
      Vec2 pp = world.pedestrian_position(ped.id);
      bool is_target = follow_target_id && *follow_target_id == ped.id;
      if (!is_target && (pp - rp).norm() > config.social_agent_range) continue;
      agents.push_back({ped.id, pp, ped.radius, is_target});
    }
    Vec2 f_social = compute_social_force(world.robot(), agents, params);

    ForceBreakdown forces = combine_forces(f_desired, f_obstacle, f_social, {0.0, 0.0});

    Command cmd;
    if (mode == Mode::Explore && !goal_point) {
      // Surveying turn until a goal is grounded.
      cmd = {0.0, std::min(0.5, params.max_rot_vel)};
    } else {
      cmd = force_to_cmd(forces.total, world.robot(), params, config.dt);
    }

    if (config.measure_latency)
      report.latency_log.push_back({"fast_step", wall_ms(fast_t0)});

    auto events = world.step(cmd.v, cmd.omega, params.limits(), config.dt);
    report.collisions.insert(report.collisions.end(), events.begin(), events.end());
  }

  report.task.goal_reached = goal_reached;
  report.metrics = compute_episode_metrics(report, config.metrics);
  report.outcome.success = report.metrics.success;
  report.outcome.failure_reason = report.metrics.failure_reason;
  return report;
}

SuiteConfig load_suite(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open suite file: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("suite parse error: ") + e.what());
  }

  std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp = p;
    return fp.is_relative() ? (base / fp).string() : fp.string();
  };

  SuiteConfig suite;
  try {
    for (const auto& s : j.at("scenarios")) suite.scenario_paths.push_back(resolve(s));
    suite.repetitions = j.value("repetitions", 5);
    suite.base_seed = j.value("base_seed", 1ULL);
    if (suite.repetitions < 1) throw std::runtime_error("repetitions must be >= 1");
    if (suite.scenario_paths.empty()) throw std::runtime_error("suite has no scenarios");

    if (j.contains("modulator")) {
      const json& jm = j["modulator"];
      std::string source = jm.value("source", "scripted");
      if (source == "scripted") suite.run.modulator.source = ModulatorSourceKind::Scripted;
      else if (source == "replay") suite.run.modulator.source = ModulatorSourceKind::Replay;
      else if (source == "external") suite.run.modulator.source = ModulatorSourceKind::External;
      else throw std::runtime_error("unknown modulator source: " + source);
      suite.run.modulator.decision_period = jm.value("decision_period", 10.0);
      suite.run.modulator.injected_latency = jm.value("injected_latency", 0.0);
      if (jm.contains("rules")) suite.run.modulator.rules_path = resolve(jm["rules"]);
      if (jm.contains("replay_log")) suite.run.modulator.replay_log_path = resolve(jm["replay_log"]);
      if (jm.contains("url")) suite.run.modulator.external_url = jm["url"];
    }
    if (j.contains("run")) {
      const json& jr = j["run"];
      suite.run.dt = jr.value("dt", suite.run.dt);
      suite.run.measure_latency = jr.value("measure_latency", false);
      suite.run.disable_social_layer = jr.value("disable_social_layer", false);
      suite.run.randomize_initial = jr.value("randomize_initial", true);
    }
    if (j.contains("metrics_config"))
      suite.run.metrics = load_metrics_config(resolve(j["metrics_config"]));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("suite schema error: ") + e.what());
  }
  return suite;
}

BatchResult run_batch(const SuiteConfig& suite) {
  BatchResult result;

  for (const auto& path : suite.scenario_paths) {
    ScenarioSpec spec = load_scenario(path);
    ScenarioAggregate agg;
    agg.scenario = spec.name;

    int successes = 0, with_collisions = 0;
    double smooth_sum = 0.0, smooth_score_sum = 0.0, subject_sum = 0.0, region_sum = 0.0;
    int smooth_n = 0, subject_n = 0, region_n = 0;

    for (int rep = 0; rep < suite.repetitions; ++rep) {
      uint64_t seed = derive_episode_seed(suite.base_seed, spec.name, rep);
      EpisodeReport report;
      try {
        report = run_episode(spec, suite.run, seed);
      } catch (const std::exception& e) {
        // Individual failure is recorded; the batch continues.
        std::cerr << "[batch] episode failed (" << spec.name << ", rep " << rep
                  << "): " << e.what() << "\n";
        report.scenario_name = spec.name;
        report.seed = seed;
        report.outcome.success = false;
        report.outcome.failure_reason = std::string("error: ") + e.what();
        report.metrics.success = false;
        report.metrics.failure_reason = report.outcome.failure_reason;
      }

      if (report.metrics.success) ++successes;
      if (!report.collisions.empty()) ++with_collisions;
      if (report.metrics.smoothness) {
        smooth_sum += *report.metrics.smoothness;
        smooth_score_sum += *report.metrics.smoothness_score;
        ++smooth_n;
      }
      if (report.metrics.subject) {
        subject_sum += *report.metrics.subject;
        ++subject_n;
      }
      if (report.metrics.region) {
        region_sum += *report.metrics.region;
        ++region_n;
      }
      result.reports.push_back(std::move(report));
    }

    agg.episodes = suite.repetitions;
    agg.success_rate = 100.0 * successes / suite.repetitions;
    agg.collision_rate = 100.0 * with_collisions / suite.repetitions;
    if (smooth_n > 0) {
      agg.smoothness = smooth_sum / smooth_n;
      agg.smoothness_score = smooth_score_sum / smooth_n;
    }
    if (subject_n > 0) agg.subject = subject_sum / subject_n;
    if (region_n > 0) agg.region = region_sum / region_n;
    result.aggregates.push_back(std::move(agg));
  }

  if (!suite.out_dir.empty()) {
    std::filesystem::create_directories(suite.out_dir);
    for (size_t i = 0; i < result.reports.size(); ++i) {
      const auto& r = result.reports[i];
      std::string name = r.scenario_name + "_" + std::to_string(i % suite.repetitions) + ".json";
      save_report(r, (std::filesystem::path(suite.out_dir) / name).string());
    }
    std::ofstream csv(std::filesystem::path(suite.out_dir) / "results.csv");
    csv << results_table_csv(result);
  }
  return result;
}

std::string results_table_csv(const BatchResult& result) {
  auto fmt = [](std::optional<double> v, const char* spec) {
    if (!v) return std::string("none");
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, *v);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "scenario,episodes,success_rate,collision_rate,smoothness,smoothness_score,"
         "subject_score,region_score\n";
  for (const auto& a : result.aggregates) {
    char head[128];
    std::snprintf(head, sizeof(head), "%d,%.2f,%.2f", a.episodes, a.success_rate,
                  a.collision_rate);
    out << a.scenario << "," << head << "," << fmt(a.smoothness, "%.4f") << ","
        << fmt(a.smoothness_score, "%.2f") << "," << fmt(a.subject, "%.2f") << ","
        << fmt(a.region, "%.2f") << "\n";
  }
  return out.str();
}

}  // namespace socnav
