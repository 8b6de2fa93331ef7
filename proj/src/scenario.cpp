#include "socnav/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace socnav {

using nlohmann::json;

namespace {

Vec2 parse_vec2(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2)
    throw ScenarioError(what + " must be a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

Pose parse_pose(const json& j) {
  Pose p;
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  p.theta = wrap_angle(j.value("theta", 0.0));
  return p;
}

RegionKind parse_kind(const std::string& s) {
  if (s == "goal") return RegionKind::Goal;
  if (s == "forbidden") return RegionKind::Forbidden;
  if (s == "caution") return RegionKind::Caution;
  if (s == "neutral") return RegionKind::Neutral;
  throw ScenarioError("unknown region kind: " + s);
}

// 8-connected flood fill reachability on free cells.
bool reachable_on_map(const OccupancyGrid& map, const Vec2& from, const Vec2& to) {
  int r0, c0, r1, c1;
  if (!map.world_to_cell(from, r0, c0) || !map.world_to_cell(to, r1, c1)) return false;
  if (map.occupied(r0, c0) || map.occupied(r1, c1)) return false;

  std::vector<uint8_t> seen(static_cast<size_t>(map.width()) * map.height(), 0);
  std::queue<std::pair<int, int>> q;
  q.push({r0, c0});
  seen[static_cast<size_t>(r0) * map.width() + c0] = 1;
  while (!q.empty()) {
    auto [r, c] = q.front();
    q.pop();
    if (r == r1 && c == c1) return true;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        int nr = r + dr, nc = c + dc;
        if (!map.in_bounds(nr, nc) || map.occupied(nr, nc)) continue;
        size_t idx = static_cast<size_t>(nr) * map.width() + nc;
        if (seen[idx]) continue;
        seen[idx] = 1;
        q.push({nr, nc});
      }
    }
  }
  return false;
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }

  try {
    ScenarioSpec spec;
    spec.name = doc.value("name", "unnamed");
    spec.seed = doc.value("seed", 0ULL);
    spec.instruction = doc.at("instruction").get<std::string>();

    const json& jmap = doc.at("map");
    double resolution = jmap.at("resolution").get<double>();
    Vec2 origin{0.0, 0.0};
    if (jmap.contains("origin")) {
      Pose op = parse_pose(jmap.at("origin"));
      if (std::abs(op.theta) > 1e-9)
        throw ScenarioError("rotated map origins are not supported (origin.theta must be 0)");
      origin = {op.x, op.y};
    }
    if (jmap.contains("rows")) {
      spec.static_map = OccupancyGrid::from_rle_rows(
          jmap.at("rows").get<std::vector<std::string>>(), resolution, origin);
    } else if (jmap.contains("pgm")) {
      std::filesystem::path p = jmap.at("pgm").get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      spec.static_map = OccupancyGrid::from_pgm(p.string(), resolution, origin);
    } else {
      throw ScenarioError("map must provide either 'rows' or 'pgm'");
    }

    for (const auto& jr : doc.value("regions", json::array())) {
      Region region;
      region.id = jr.at("id").get<std::string>();
      region.kind = parse_kind(jr.value("kind", "neutral"));
      region.severity_weight = jr.value("severity_weight", 0.0);
      for (const auto& jv : jr.at("polygon")) region.polygon.push_back(parse_vec2(jv, "vertex"));
      spec.regions.push_back(std::move(region));
    }

    for (const auto& jp : doc.value("pedestrians", json::array())) {
      Pedestrian ped;
      ped.id = jp.at("id").get<std::string>();
      ped.identity = jp.value("identity", "person");
      ped.radius = jp.value("radius", 0.3);
      ped.vulnerable = jp.value("vulnerable", false);
      for (const auto& jw : jp.at("trajectory")) {
        if (!jw.is_array() || jw.size() != 3)
          throw ScenarioError("trajectory waypoints must be [t, x, y] triples");
        ped.trajectory.push_back({jw[0].get<double>(), {jw[1].get<double>(), jw[2].get<double>()}});
      }
      spec.pedestrians.push_back(std::move(ped));
    }

    const json& jrobot = doc.at("robot");
    spec.robot_start = parse_pose(jrobot.at("start"));
    spec.robot_radius = jrobot.value("radius", 0.25);

    const json& jtask = doc.at("task");
    const json& jgoal = jtask.at("goal");
    if (jgoal.contains("region_id")) {
      spec.task.goal.region_id = jgoal.at("region_id").get<std::string>();
    } else if (jgoal.contains("point")) {
      spec.task.goal.point = parse_vec2(jgoal.at("point"), "goal point");
      spec.task.goal.radius = jgoal.value("radius", 0.5);
    } else {
      throw ScenarioError("task goal must provide 'region_id' or 'point'");
    }
    spec.task.time_limit = jtask.value("time_limit", 60.0);
    if (jtask.contains("forbidden_regions"))
      spec.task.forbidden_regions = jtask.at("forbidden_regions").get<std::vector<std::string>>();
    if (jtask.contains("follow")) {
      const json& jf = jtask.at("follow");
      FollowRule f;
      f.target_id = jf.at("target_id").get<std::string>();
      f.d_min = jf.value("d_min", 1.0);
      f.d_max = jf.value("d_max", 3.0);
      f.min_band_fraction = jf.value("min_band_fraction", 0.8);
      spec.task.follow = f;
    }

    validate_scenario(spec);
    return spec;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario schema error: ") + e.what());
  }
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), std::filesystem::path(path).parent_path().string());
}

void validate_scenario(const ScenarioSpec& spec) {
  if (spec.static_map.width() == 0) throw ScenarioError("scenario has no map");

  for (const auto& region : spec.regions) {
    if (region.polygon.size() < 3)
      throw ScenarioError("region '" + region.id + "' needs at least 3 vertices");
    if (region.severity_weight < 0.0)
      throw ScenarioError("region '" + region.id + "' has negative severity_weight");
    // Simple-polygon check: no two non-adjacent edges intersect.
    const auto& poly = region.polygon;
    size_t n = poly.size();
    auto segs_intersect = [](const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
      auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        return v > 1e-12 ? 1 : (v < -1e-12 ? -1 : 0);
      };
      int o1 = orient(a, b, c), o2 = orient(a, b, d);
      int o3 = orient(c, d, a), o4 = orient(c, d, b);
      return o1 != o2 && o3 != o4;
    };
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;  // adjacent around the wrap
        if (segs_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
          throw ScenarioError("region '" + region.id + "' polygon self-intersects");
      }
    }
  }

  for (const auto& ped : spec.pedestrians) {
    if (ped.trajectory.empty())
      throw ScenarioError("pedestrian '" + ped.id + "' has an empty trajectory");
    if (ped.radius <= 0.0)
      throw ScenarioError("pedestrian '" + ped.id + "' has non-positive radius");
    for (size_t i = 1; i < ped.trajectory.size(); ++i) {
      if (ped.trajectory[i].t <= ped.trajectory[i - 1].t)
        throw ScenarioError("pedestrian '" + ped.id +
                            "' trajectory timestamps must be strictly increasing");
    }
  }

  if (spec.robot_radius <= 0.0) throw ScenarioError("robot radius must be positive");

  // Referenced ids must exist.
  for (const auto& rid : spec.task.forbidden_regions) {
    if (!spec.find_region(rid)) throw ScenarioError("unknown forbidden region id: " + rid);
  }
  if (spec.task.goal.region_id && !spec.find_region(*spec.task.goal.region_id))
    throw ScenarioError("unknown goal region id: " + *spec.task.goal.region_id);
  if (spec.task.follow && !spec.find_pedestrian(spec.task.follow->target_id))
    throw ScenarioError("unknown follow target id: " + spec.task.follow->target_id);
  if (spec.task.follow && spec.task.follow->d_min >= spec.task.follow->d_max)
    throw ScenarioError("follow band requires d_min < d_max");

  // Robot start must be inside free space.
  Vec2 start = spec.robot_start.position();
  int row, col;
  if (!spec.static_map.world_to_cell(start, row, col))
    throw ScenarioError("robot start is outside the map");
  if (spec.static_map.occupied(row, col))
    throw ScenarioError("robot start is in collision with the static map");

  // Goal must be reachable on the static map.
  Vec2 goal_point;
  if (spec.task.goal.region_id) {
    goal_point = spec.find_region(*spec.task.goal.region_id)->centroid();
  } else {
    goal_point = *spec.task.goal.point;
  }
  if (!reachable_on_map(spec.static_map, start, goal_point))
    throw ScenarioError("goal is not reachable from the robot start on the static map");
}

}  // namespace socnav
