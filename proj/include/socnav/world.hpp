#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socnav/geometry.hpp"
#include "socnav/grid.hpp"

namespace socnav {

struct RobotState {
  Pose pose;
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
  double radius = 0.25;
};

struct TrajectoryPoint {
  double t = 0.0;  // seconds
  Vec2 p;
};

struct Pedestrian {
  std::string id;
  std::string identity;  // semantic label: doctor, patient, worker, ...
  std::vector<TrajectoryPoint> trajectory;
  double radius = 0.3;
  bool vulnerable = false;

  // Linear interpolation between waypoints, clamped to the endpoints.
  Vec2 position_at(double t) const;
  double end_time() const { return trajectory.empty() ? 0.0 : trajectory.back().t; }
};

enum class RegionKind { Goal, Forbidden, Caution, Neutral };

struct Region {
  std::string id;
  std::vector<Vec2> polygon;  // simple, >= 3 vertices
  RegionKind kind = RegionKind::Neutral;
  double severity_weight = 0.0;

  Vec2 centroid() const;
};

// Even-odd ray-cast containment; boundary points count as inside.
bool point_in_region(const Region& region, const Vec2& point);

struct GoalSpec {
  std::optional<std::string> region_id;
  std::optional<Vec2> point;
  double radius = 0.5;  // tolerance for point goals
};

struct FollowRule {
  std::string target_id;
  double d_min = 1.0;
  double d_max = 3.0;
  double min_band_fraction = 0.8;
};

struct TaskRules {
  GoalSpec goal;
  double time_limit = 60.0;  // seconds
  std::vector<std::string> forbidden_regions;
  std::optional<FollowRule> follow;
};

struct ScenarioSpec {
  std::string name;
  OccupancyGrid static_map;
  std::vector<Region> regions;
  std::vector<Pedestrian> pedestrians;
  Pose robot_start;
  double robot_radius = 0.25;
  std::string instruction;
  TaskRules task;
  uint64_t seed = 0;

  const Region* find_region(const std::string& id) const;
  const Pedestrian* find_pedestrian(const std::string& id) const;
};

struct LidarConfig {
  int beam_count = 360;
  double angle_min = -M_PI;  // relative to robot heading
  double angle_max = M_PI;
  double max_range = 10.0;
};

struct LidarScan {
  int beam_count = 0;
  double angle_min = 0.0;
  double angle_max = 0.0;
  double max_range = 0.0;
  std::vector<double> ranges;
};

enum class DetectionKind { Pedestrian, Region };

struct Detection {
  std::string entity_id;
  std::string class_label;
  Vec2 position;      // world frame
  double distance = 0.0;
  DetectionKind kind = DetectionKind::Pedestrian;
};

struct FovConfig {
  double fov = 2.0 * M_PI;  // cone width centered on the heading, in (0, 2pi]
  double range = 12.0;
};

enum class CollisionType { Pedestrian, Obstacle };

struct CollisionEvent {
  double t = 0.0;
  CollisionType type = CollisionType::Pedestrian;
  std::string other_id;  // pedestrian id, or empty for obstacles
  Vec2 position;
};

struct VelocityLimits {
  double max_lin_vel = 1.0;
  double max_rot_vel = 1.5;
};

// Deterministic 2D world. Stepping is single-threaded; a copy of the state
// can be handed to other components between ticks.
class World {
 public:
  explicit World(ScenarioSpec spec);

  double sim_time() const { return sim_time_; }
  const RobotState& robot() const { return robot_; }
  const ScenarioSpec& scenario() const { return spec_; }
  Vec2 pedestrian_position(const std::string& id) const;

  // Advances sim time by dt. Commands outside `limits` are clamped, not
  // rejected. Collision events fire on contact onset only.
  std::vector<CollisionEvent> step(double v_cmd, double omega_cmd,
                                   const VelocityLimits& limits, double dt);

  LidarScan sense_lidar(const LidarConfig& config) const;
  LidarScan sense_lidar(const Pose& from, const LidarConfig& config) const;

  // Ground-truth detections: pedestrians and region anchor points inside the
  // field-of-view cone, within range, with line of sight on the static map.
  std::vector<Detection> detect_entities(const FovConfig& config) const;

  // Uses `phase` to shift pedestrian trajectories in time (seed jitter).
  void set_pedestrian_phase(const std::string& id, double phase);

  bool robot_in_static_collision() const;

 private:
  bool pedestrian_contact(const Pedestrian& ped, Vec2& pos) const;

  ScenarioSpec spec_;
  RobotState robot_;
  double sim_time_ = 0.0;
  std::vector<double> ped_phase_;
  // Contact sets from the previous tick, for onset detection.
  std::vector<uint8_t> ped_in_contact_;
  bool wall_in_contact_ = false;
};

}  // namespace socnav
