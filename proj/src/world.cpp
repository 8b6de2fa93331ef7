#include "socnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace socnav {

Vec2 Pedestrian::position_at(double t) const {
  if (trajectory.empty()) return {0.0, 0.0};
  if (t <= trajectory.front().t) return trajectory.front().p;
  if (t >= trajectory.back().t) return trajectory.back().p;
  // Find the segment containing t.
  for (size_t i = 1; i < trajectory.size(); ++i) {
    if (t <= trajectory[i].t) {
      const auto& a = trajectory[i - 1];
      const auto& b = trajectory[i];
      double u = (t - a.t) / (b.t - a.t);
      return a.p + (b.p - a.p) * u;
    }
  }
  return trajectory.back().p;
}

Vec2 Region::centroid() const {
  // Polygon area centroid; falls back to the vertex mean for degenerate area.
  double area2 = 0.0, cx = 0.0, cy = 0.0;
  for (size_t i = 0; i < polygon.size(); ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % polygon.size()];
    double cross = a.x * b.y - b.x * a.y;
    area2 += cross;
    cx += (a.x + b.x) * cross;
    cy += (a.y + b.y) * cross;
  }
  if (std::abs(area2) < 1e-12) {
    Vec2 mean;
    for (const auto& p : polygon) mean += p;
    return mean / static_cast<double>(polygon.size());
  }
  return {cx / (3.0 * area2), cy / (3.0 * area2)};
}

namespace {

// Distance from point to segment, for boundary-inclusive containment.
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return (p - a).norm();
  double u = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * u)).norm();
}

}  // namespace

bool point_in_region(const Region& region, const Vec2& point) {
  const auto& poly = region.polygon;
  const size_t n = poly.size();
  if (n < 3) return false;

  for (size_t i = 0; i < n; ++i) {
    if (point_segment_distance(point, poly[i], poly[(i + 1) % n]) < 1e-9) return true;
  }

  // Even-odd rule with a horizontal ray towards +x.
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    bool crosses = (a.y > point.y) != (b.y > point.y);
    if (crosses) {
      double x_at = a.x + (point.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (point.x < x_at) inside = !inside;
    }
  }
  return inside;
}

const Region* ScenarioSpec::find_region(const std::string& id) const {
  for (const auto& r : regions)
    if (r.id == id) return &r;
  return nullptr;
}

const Pedestrian* ScenarioSpec::find_pedestrian(const std::string& id) const {
  for (const auto& p : pedestrians)
    if (p.id == id) return &p;
  return nullptr;
}

World::World(ScenarioSpec spec) : spec_(std::move(spec)) {
  robot_.pose = spec_.robot_start;
  robot_.pose.theta = wrap_angle(robot_.pose.theta);
  robot_.radius = spec_.robot_radius;
  ped_phase_.assign(spec_.pedestrians.size(), 0.0);
  ped_in_contact_.assign(spec_.pedestrians.size(), 0);
}

Vec2 World::pedestrian_position(const std::string& id) const {
  for (size_t i = 0; i < spec_.pedestrians.size(); ++i) {
    if (spec_.pedestrians[i].id == id)
      return spec_.pedestrians[i].position_at(sim_time_ + ped_phase_[i]);
  }
  throw std::out_of_range("unknown pedestrian id: " + id);
}

void World::set_pedestrian_phase(const std::string& id, double phase) {
  for (size_t i = 0; i < spec_.pedestrians.size(); ++i) {
    if (spec_.pedestrians[i].id == id) {
      ped_phase_[i] = phase;
      return;
    }
  }
  throw std::out_of_range("unknown pedestrian id: " + id);
}

std::vector<CollisionEvent> World::step(double v_cmd, double omega_cmd,
                                        const VelocityLimits& limits, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");

  double v = std::clamp(v_cmd, -limits.max_lin_vel, limits.max_lin_vel);
  double omega = std::clamp(omega_cmd, -limits.max_rot_vel, limits.max_rot_vel);

  Pose& pose = robot_.pose;
  if (std::abs(omega) > 1e-6) {
    // Exact arc integration.
    double theta_new = pose.theta + omega * dt;
    pose.x += v / omega * (std::sin(theta_new) - std::sin(pose.theta));
    pose.y += v / omega * (-std::cos(theta_new) + std::cos(pose.theta));
    pose.theta = wrap_angle(theta_new);
  } else {
    pose.x += v * dt * std::cos(pose.theta);
    pose.y += v * dt * std::sin(pose.theta);
    pose.theta = wrap_angle(pose.theta + omega * dt);
  }
  robot_.v = v;
  robot_.omega = omega;
  sim_time_ += dt;

  std::vector<CollisionEvent> events;
  Vec2 rp = pose.position();

  for (size_t i = 0; i < spec_.pedestrians.size(); ++i) {
    const auto& ped = spec_.pedestrians[i];
    Vec2 pp = ped.position_at(sim_time_ + ped_phase_[i]);
    bool contact = (pp - rp).norm() < robot_.radius + ped.radius;
    if (contact && !ped_in_contact_[i]) {
      events.push_back({sim_time_, CollisionType::Pedestrian, ped.id, pp});
    }
    ped_in_contact_[i] = contact ? 1 : 0;
  }

  bool wall = robot_in_static_collision();
  if (wall && !wall_in_contact_) {
    events.push_back({sim_time_, CollisionType::Obstacle, "", rp});
  }
  wall_in_contact_ = wall;

  return events;
}

bool World::robot_in_static_collision() const {
  const auto& map = spec_.static_map;
  Vec2 rp = robot_.pose.position();
  double r = robot_.radius;
  int r0, c0;
  map.world_to_cell(rp, r0, c0);
  int span = static_cast<int>(std::ceil(r / map.resolution())) + 1;
  for (int dr = -span; dr <= span; ++dr) {
    for (int dc = -span; dc <= span; ++dc) {
      int row = r0 + dr, col = c0 + dc;
      if (!map.in_bounds(row, col) || !map.occupied(row, col)) continue;
      // Closest point of the cell rectangle to the robot center.
      double cx0 = map.origin().x + col * map.resolution();
      double cy0 = map.origin().y + row * map.resolution();
      double nx = std::clamp(rp.x, cx0, cx0 + map.resolution());
      double ny = std::clamp(rp.y, cy0, cy0 + map.resolution());
      if ((Vec2{nx, ny} - rp).norm() < r) return true;
    }
  }
  return false;
}

LidarScan World::sense_lidar(const LidarConfig& config) const {
  return sense_lidar(robot_.pose, config);
}

LidarScan World::sense_lidar(const Pose& from, const LidarConfig& config) const {
  if (config.beam_count < 1) throw std::invalid_argument("beam_count must be >= 1");

  LidarScan scan;
  scan.beam_count = config.beam_count;
  scan.angle_min = config.angle_min;
  scan.angle_max = config.angle_max;
  scan.max_range = config.max_range;
  scan.ranges.resize(config.beam_count);

  double inc = config.beam_count > 1
                   ? (config.angle_max - config.angle_min) / (config.beam_count - 1)
                   : 0.0;

  // Pedestrian discs at the current sim time.
  std::vector<std::pair<Vec2, double>> discs;
  discs.reserve(spec_.pedestrians.size());
  for (size_t i = 0; i < spec_.pedestrians.size(); ++i) {
    discs.emplace_back(spec_.pedestrians[i].position_at(sim_time_ + ped_phase_[i]),
                       spec_.pedestrians[i].radius);
  }

  Vec2 o = from.position();
  for (int b = 0; b < config.beam_count; ++b) {
    double a = from.theta + config.angle_min + b * inc;
    Vec2 dir{std::cos(a), std::sin(a)};
    double range = spec_.static_map.raycast(o, dir, config.max_range);

    for (const auto& [c, r] : discs) {
      // Ray-circle intersection: |o + t*dir - c| = r.
      Vec2 oc = o - c;
      double bq = oc.dot(dir);
      double cq = oc.squaredNorm() - r * r;
      double disc = bq * bq - cq;
      if (disc < 0.0) continue;
      double t = -bq - std::sqrt(disc);
      if (t >= 0.0 && t < range) range = t;
    }
    scan.ranges[b] = std::clamp(range, 0.0, config.max_range);
  }
  return scan;
}

std::vector<Detection> World::detect_entities(const FovConfig& config) const {
  if (config.fov <= 0.0 || config.fov > 2.0 * M_PI + 1e-9)
    throw std::invalid_argument("fov must be in (0, 2pi]");
  if (config.range <= 0.0) throw std::invalid_argument("detection range must be positive");

  std::vector<Detection> out;
  Vec2 rp = robot_.pose.position();

  auto visible = [&](const Vec2& target) {
    Vec2 d = target - rp;
    double dist = d.norm();
    if (dist > config.range) return false;
    if (dist > 1e-9) {
      double bearing = wrap_angle(d.angle() - robot_.pose.theta);
      if (std::abs(bearing) > config.fov / 2.0 + 1e-12) return false;
    }
    // Occlusion against the static map only.
    return !spec_.static_map.segment_blocked(rp, target);
  };

  for (size_t i = 0; i < spec_.pedestrians.size(); ++i) {
    const auto& ped = spec_.pedestrians[i];
    Vec2 pp = ped.position_at(sim_time_ + ped_phase_[i]);
    if (!visible(pp)) continue;
    out.push_back({ped.id, ped.identity, pp, (pp - rp).norm(), DetectionKind::Pedestrian});
  }
  for (const auto& region : spec_.regions) {
    Vec2 anchor = region.centroid();
    if (!visible(anchor)) continue;
    out.push_back({region.id, region.id, anchor, (anchor - rp).norm(), DetectionKind::Region});
  }
  return out;
}

bool World::pedestrian_contact(const Pedestrian& ped, Vec2& pos) const {
  pos = ped.position_at(sim_time_);
  return (pos - robot_.pose.position()).norm() < robot_.radius + ped.radius;
}

}  // namespace socnav
