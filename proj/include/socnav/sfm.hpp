#pragma once

#include <map>
#include <string>
#include <vector>

#include "socnav/costmap.hpp"
#include "socnav/geometry.hpp"
#include "socnav/world.hpp"

namespace socnav {

// Planner parameter vector. Slow-loop directives patch these by name; see
// param_keys() for the schema used by directives and the wire protocol.
struct SfmParams {
  // Force factors and mode weights are kept as separate multipliers.
  double force_factor_desired = 1.0;
  double force_factor_obstacle = 1.0;
  double force_factor_social = 1.0;
  double force_factor_group = 1.0;
  double sfm_people_weight = 1.0;
  double sfm_goal_weight = 1.0;
  double sfm_obstacle_weight = 1.0;

  double desired_speed = 0.8;    // m/s
  double relaxation_time = 0.5;  // tau, seconds

  double obstacle_amplitude = 2.0;  // A
  double obstacle_range = 0.35;     // B, meters
  double social_amplitude = 2.0;
  double social_range = 0.45;  // meters

  // Follow-band force.
  double k_rep = 2.0;  // force per meter
  double k_att = 1.0;
  double d_min = 1.0;  // meters
  double d_max = 3.0;

  double max_lin_vel = 1.0;  // m/s
  double max_rot_vel = 1.5;  // rad/s
  double k_ang = 2.0;
  double k_lin = 0.45;

  VelocityLimits limits() const { return {max_lin_vel, max_rot_vel}; }
};

// Flat key -> field schema shared by apply_param_update and the wire format.
const std::vector<std::string>& param_keys();
bool is_param_key(const std::string& key);
double get_param(const SfmParams& p, const std::string& key);

// Replaces the listed fields; unlisted fields keep their values. Unknown keys
// or invariant violations reject the whole update (no partial application);
// the thrown std::invalid_argument names the offending key or invariant.
SfmParams apply_param_update(const SfmParams& params,
                             const std::map<std::string, double>& updates);
void validate_params(const SfmParams& p);

struct ForceBreakdown {
  Vec2 desired;
  Vec2 obstacle;
  Vec2 social;
  Vec2 group;
  Vec2 total;  // exact vector sum of the four components
};

// An agent as seen by the social force: pedestrians near the robot, with the
// slow-loop follow designation. The follow target uses the band force instead
// of the default repulsion.
struct AgentView {
  std::string id;
  Vec2 position;
  double radius = 0.3;
  bool follow_target = false;
};

// Relaxation towards desired_speed along the unit vector to the waypoint.
// A waypoint closer than 1e-6 m yields zero force.
Vec2 compute_desired_force(const RobotState& state, const Vec2& waypoint, const SfmParams& params);

// Exponential kernel summed over physical lethal cells within
// 5 * obstacle_range of the robot, each pushing away from the cell.
Vec2 compute_obstacle_force(const RobotState& state, const CostmapStack& stack,
                            const SfmParams& params);

// Default repulsion for every agent, except the follow target which uses the
// band force: repulsion below d_min, attraction beyond d_max, zero inside.
Vec2 compute_social_force(const RobotState& state, const std::vector<AgentView>& agents,
                          const SfmParams& params);

// Band force term alone (unit-weight), exposed for direct checks.
Vec2 follow_band_force(const Vec2& robot_pos, const Vec2& target_pos, const SfmParams& params);

ForceBreakdown combine_forces(const Vec2& desired, const Vec2& obstacle, const Vec2& social,
                              const Vec2& group);

struct Command {
  double v = 0.0;
  double omega = 0.0;
};

// Heading controller: steer towards the force direction, drive forward when
// roughly aligned. Zero force decays v towards 0 with omega = 0.
Command force_to_cmd(const Vec2& force, const RobotState& state, const SfmParams& params,
                     double dt);

}  // namespace socnav
