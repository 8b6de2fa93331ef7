#include "socnav/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "socnav/wire.hpp"

namespace socnav {

using nlohmann::json;

namespace {

json optional_to_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

std::optional<double> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string report_to_json(const EpisodeReport& r) {
  json j;
  j["scenario"] = r.scenario_name;
  j["seed"] = r.seed;
  j["dt"] = r.dt;

  json traj = json::array();
  for (const auto& s : r.trajectory)
    traj.push_back({s.t, s.pose.x, s.pose.y, s.pose.theta, s.v, s.omega});
  j["trajectory"] = std::move(traj);

  j["region_occupancy"] = r.region_occupancy;

  json cols = json::array();
  for (const auto& c : r.collisions) {
    cols.push_back({{"t", c.t},
                    {"type", c.type == CollisionType::Pedestrian ? "pedestrian" : "obstacle"},
                    {"other_id", c.other_id},
                    {"x", c.position.x},
                    {"y", c.position.y}});
  }
  j["collisions"] = std::move(cols);

  json subs = json::array();
  for (const auto& s : r.subjects) {
    subs.push_back({{"id", s.id},
                    {"mode", s.mode == SubjectScoreMode::FollowBand ? "follow_band" : "keep_away"},
                    {"d_min", s.d_min},
                    {"d_max", s.d_max},
                    {"distances", s.distances}});
  }
  j["subjects"] = std::move(subs);

  json dirs = json::array();
  for (const auto& d : r.directives) {
    json applied = json::object();
    for (const auto& [k, v] : d.applied_params) applied[k] = v;
    dirs.push_back({{"at", d.at},
                    {"issued_at", d.directive.issued_at},
                    {"directive", json::parse(encode_response(d.directive))},
                    {"applied_params", applied}});
  }
  j["directives"] = std::move(dirs);

  json lat = json::array();
  for (const auto& s : r.latency_log) lat.push_back({{"component", s.component}, {"ms", s.ms}});
  j["latency_log"] = std::move(lat);

  json task = {{"time_limit", r.task.time_limit},
               {"forbidden_regions", r.task.forbidden_regions},
               {"goal_reached", r.task.goal_reached}};
  if (r.task.follow) {
    task["follow"] = {{"target_id", r.task.follow->target_id},
                      {"d_min", r.task.follow->d_min},
                      {"d_max", r.task.follow->d_max},
                      {"min_band_fraction", r.task.follow->min_band_fraction}};
  }
  j["task"] = std::move(task);

  json scored = json::array();
  for (const auto& s : r.scored_regions) {
    const char* kind = s.kind == RegionKind::Forbidden ? "forbidden"
                       : s.kind == RegionKind::Caution ? "caution"
                       : s.kind == RegionKind::Goal    ? "goal"
                                                       : "neutral";
    scored.push_back({{"id", s.id}, {"kind", kind}, {"severity_weight", s.severity_weight}});
  }
  j["scored_regions"] = std::move(scored);

  j["outcome"] = {{"success", r.outcome.success}, {"failure_reason", r.outcome.failure_reason}};
  j["metrics"] = {{"success", r.metrics.success},
                  {"failure_reason", r.metrics.failure_reason},
                  {"collision_count", r.metrics.collision_count},
                  {"smoothness", optional_to_json(r.metrics.smoothness)},
                  {"smoothness_score", optional_to_json(r.metrics.smoothness_score)},
                  {"subject", optional_to_json(r.metrics.subject)},
                  {"region", optional_to_json(r.metrics.region)},
                  {"band_fraction", optional_to_json(r.metrics.band_fraction)},
                  {"duration", r.metrics.duration}};
  j["metrics_config_hash"] = r.metrics_config_hash;
  return j.dump(2);
}

EpisodeReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("report parse error: ") + e.what());
  }

  try {
    EpisodeReport r;
    r.scenario_name = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    r.dt = j.at("dt").get<double>();

    for (const auto& js : j.at("trajectory")) {
      if (!js.is_array() || js.size() != 6)
        throw std::runtime_error("trajectory rows must be [t, x, y, theta, v, omega]");
      TrajectorySample s;
      s.t = js[0].get<double>();
      s.pose = {js[1].get<double>(), js[2].get<double>(), js[3].get<double>()};
      s.v = js[4].get<double>();
      s.omega = js[5].get<double>();
      r.trajectory.push_back(s);
    }
    for (size_t i = 1; i < r.trajectory.size(); ++i) {
      if (r.trajectory[i].t <= r.trajectory[i - 1].t)
        throw std::runtime_error("trajectory timestamps must be strictly increasing");
    }

    r.region_occupancy = j.at("region_occupancy").get<RegionOccupancy>();
    if (r.region_occupancy.size() != r.trajectory.size())
      throw std::runtime_error("truncated log: region_occupancy does not cover the trajectory");

    for (const auto& jc : j.at("collisions")) {
      CollisionEvent c;
      c.t = jc.at("t").get<double>();
      c.type = jc.at("type").get<std::string>() == "pedestrian" ? CollisionType::Pedestrian
                                                                : CollisionType::Obstacle;
      c.other_id = jc.at("other_id").get<std::string>();
      c.position = {jc.at("x").get<double>(), jc.at("y").get<double>()};
      r.collisions.push_back(std::move(c));
    }

    for (const auto& js : j.at("subjects")) {
      SubjectTrack s;
      s.id = js.at("id").get<std::string>();
      s.mode = js.at("mode").get<std::string>() == "follow_band" ? SubjectScoreMode::FollowBand
                                                                 : SubjectScoreMode::KeepAway;
      s.d_min = js.at("d_min").get<double>();
      s.d_max = js.at("d_max").get<double>();
      s.distances = js.at("distances").get<std::vector<double>>();
      if (s.distances.size() != r.trajectory.size())
        throw std::runtime_error("truncated log: subject distances do not cover the trajectory");
      r.subjects.push_back(std::move(s));
    }

    for (const auto& jd : j.at("directives")) {
      AppliedDirective d;
      d.at = jd.at("at").get<double>();
      d.directive = decode_response(jd.at("directive").dump());
      d.directive.issued_at = jd.at("issued_at").get<double>();
      if (jd.contains("applied_params"))
        for (const auto& [k, v] : jd.at("applied_params").items())
          d.applied_params[k] = v.get<double>();
      r.directives.push_back(std::move(d));
    }

    for (const auto& js : j.at("latency_log"))
      r.latency_log.push_back({js.at("component").get<std::string>(), js.at("ms").get<double>()});

    const json& jt = j.at("task");
    r.task.time_limit = jt.at("time_limit").get<double>();
    r.task.forbidden_regions = jt.at("forbidden_regions").get<std::vector<std::string>>();
    r.task.goal_reached = jt.at("goal_reached").get<bool>();
    if (jt.contains("follow")) {
      FollowRule f;
      f.target_id = jt["follow"].at("target_id").get<std::string>();
      f.d_min = jt["follow"].at("d_min").get<double>();
      f.d_max = jt["follow"].at("d_max").get<double>();
      f.min_band_fraction = jt["follow"].at("min_band_fraction").get<double>();
      r.task.follow = f;
    }

    for (const auto& js : j.at("scored_regions")) {
      ScoredRegion s;
      s.id = js.at("id").get<std::string>();
      std::string kind = js.at("kind").get<std::string>();
      s.kind = kind == "forbidden" ? RegionKind::Forbidden
               : kind == "caution" ? RegionKind::Caution
               : kind == "goal"    ? RegionKind::Goal
                                   : RegionKind::Neutral;
      s.severity_weight = js.at("severity_weight").get<double>();
      r.scored_regions.push_back(std::move(s));
    }

    r.outcome.success = j.at("outcome").at("success").get<bool>();
    r.outcome.failure_reason = j.at("outcome").at("failure_reason").get<std::string>();

    const json& jm = j.at("metrics");
    r.metrics.success = jm.at("success").get<bool>();
    r.metrics.failure_reason = jm.at("failure_reason").get<std::string>();
    r.metrics.collision_count = jm.at("collision_count").get<int>();
    r.metrics.smoothness = optional_from_json(jm.at("smoothness"));
    r.metrics.smoothness_score = optional_from_json(jm.at("smoothness_score"));
    r.metrics.subject = optional_from_json(jm.at("subject"));
    r.metrics.region = optional_from_json(jm.at("region"));
    r.metrics.band_fraction = optional_from_json(jm.at("band_fraction"));
    r.metrics.duration = jm.at("duration").get<double>();
    r.metrics_config_hash = j.at("metrics_config_hash").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("report schema error: ") + e.what());
  }
}

void save_report(const EpisodeReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write report file: " + path);
  f << report_to_json(report) << "\n";
}

EpisodeReport load_report(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open report file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return report_from_json(ss.str());
}

}  // namespace socnav
