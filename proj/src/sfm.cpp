#include "socnav/sfm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace socnav {

namespace {

struct ParamField {
  const char* key;
  double SfmParams::* member;
};

constexpr ParamField kParamFields[] = {
    {"force_factor_desired", &SfmParams::force_factor_desired},
    {"force_factor_obstacle", &SfmParams::force_factor_obstacle},
    {"force_factor_social", &SfmParams::force_factor_social},
    {"force_factor_group", &SfmParams::force_factor_group},
    {"sfm_people_weight", &SfmParams::sfm_people_weight},
    {"sfm_goal_weight", &SfmParams::sfm_goal_weight},
    {"sfm_obstacle_weight", &SfmParams::sfm_obstacle_weight},
    {"desired_speed", &SfmParams::desired_speed},
    {"relaxation_time", &SfmParams::relaxation_time},
    {"obstacle_amplitude", &SfmParams::obstacle_amplitude},
    {"obstacle_range", &SfmParams::obstacle_range},
    {"social_amplitude", &SfmParams::social_amplitude},
    {"social_range", &SfmParams::social_range},
    {"k_rep", &SfmParams::k_rep},
    {"k_att", &SfmParams::k_att},
    {"d_min", &SfmParams::d_min},
    {"d_max", &SfmParams::d_max},
    {"max_lin_vel", &SfmParams::max_lin_vel},
    {"max_rot_vel", &SfmParams::max_rot_vel},
    {"k_ang", &SfmParams::k_ang},
    {"k_lin", &SfmParams::k_lin},
};

}  // namespace

const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : kParamFields) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

bool is_param_key(const std::string& key) {
  for (const auto& f : kParamFields)
    if (key == f.key) return true;
  return false;
}

double get_param(const SfmParams& p, const std::string& key) {
  for (const auto& f : kParamFields)
    if (key == f.key) return p.*(f.member);
  throw std::invalid_argument("unknown parameter key: " + key);
}

void validate_params(const SfmParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("parameter invariant violated: ") + what);
  };
  require(p.force_factor_desired >= 0.0, "force_factor_desired >= 0");
  require(p.force_factor_obstacle >= 0.0, "force_factor_obstacle >= 0");
  require(p.force_factor_social >= 0.0, "force_factor_social >= 0");
  require(p.force_factor_group >= 0.0, "force_factor_group >= 0");
  require(p.sfm_people_weight >= 0.0, "sfm_people_weight >= 0");
  require(p.sfm_goal_weight >= 0.0, "sfm_goal_weight >= 0");
  require(p.sfm_obstacle_weight >= 0.0, "sfm_obstacle_weight >= 0");
  require(p.relaxation_time > 0.0, "relaxation_time > 0");
  require(p.d_min > 0.0 && p.d_min < p.d_max, "0 < d_min < d_max");
  require(p.max_lin_vel >= 0.0, "max_lin_vel >= 0");
  require(p.max_rot_vel >= 0.0, "max_rot_vel >= 0");
}

SfmParams apply_param_update(const SfmParams& params,
                             const std::map<std::string, double>& updates) {
  SfmParams next = params;
  for (const auto& [key, value] : updates) {
    bool found = false;
    for (const auto& f : kParamFields) {
      if (key == f.key) {
        next.*(f.member) = value;
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("unknown parameter key: " + key);
  }
  validate_params(next);  // reject atomically; caller keeps the old params
  return next;
}

Vec2 compute_desired_force(const RobotState& state, const Vec2& waypoint,
                           const SfmParams& params) {
  Vec2 to_goal = waypoint - state.pose.position();
  if (to_goal.norm() < 1e-6) return {0.0, 0.0};
  Vec2 e_goal = to_goal.normalized();
  Vec2 v_vec = state.pose.heading() * state.v;
  Vec2 f = (e_goal * params.desired_speed - v_vec) / params.relaxation_time;
  return f * (params.sfm_goal_weight * params.force_factor_desired);
}

Vec2 compute_obstacle_force(const RobotState& state, const CostmapStack& stack,
                            const SfmParams& params) {
  const double reach = 5.0 * params.obstacle_range;
  Vec2 rp = state.pose.position();

  int r0, c0;
  if (!stack.world_to_cell(rp, r0, c0)) return {0.0, 0.0};
  int span = static_cast<int>(std::ceil(reach / stack.resolution())) + 1;

  Vec2 sum{0.0, 0.0};
  for (int dr = -span; dr <= span; ++dr) {
    for (int dc = -span; dc <= span; ++dc) {
      int row = r0 + dr, col = c0 + dc;
      if (!stack.in_bounds(row, col) || !stack.physical_lethal(row, col)) continue;
      Vec2 cell = stack.cell_center(row, col);
      Vec2 away = rp - cell;
      double d = away.norm();
      if (d > reach || d < 1e-9) continue;
      double mag = params.obstacle_amplitude *
                   std::exp((state.radius - d) / params.obstacle_range);
      sum += away.normalized() * mag;
    }
  }
  return sum * (params.sfm_obstacle_weight * params.force_factor_obstacle);
}

Vec2 follow_band_force(const Vec2& robot_pos, const Vec2& target_pos, const SfmParams& params) {
  Vec2 to_target = target_pos - robot_pos;
  double d = to_target.norm();
  if (d < 1e-9) return {0.0, 0.0};
  Vec2 e = to_target / d;  // unit vector towards the target
  return (-e) * (params.k_rep * hinge(params.d_min - d)) +
         e * (params.k_att * hinge(d - params.d_max));
}

Vec2 compute_social_force(const RobotState& state, const std::vector<AgentView>& agents,
                          const SfmParams& params) {
  Vec2 rp = state.pose.position();
  Vec2 repulsion{0.0, 0.0};
  Vec2 band{0.0, 0.0};

  for (const auto& agent : agents) {
    if (agent.follow_target) {
      band += follow_band_force(rp, agent.position, params);
      continue;
    }
    Vec2 away = rp - agent.position;
    double d = away.norm();
    if (d < 1e-9) continue;
    double contact = state.radius + agent.radius;
    double mag = params.social_amplitude * std::exp((contact - d) / params.social_range);
    repulsion += away.normalized() * mag;
  }

  // The whole social term scales with the people weight so that a zero
  // weight silences it regardless of agents.
  return (repulsion * params.force_factor_social + band) * params.sfm_people_weight;
}

ForceBreakdown combine_forces(const Vec2& desired, const Vec2& obstacle, const Vec2& social,
                              const Vec2& group) {
  ForceBreakdown out;
  out.desired = desired;
  out.obstacle = obstacle;
  out.social = social;
  out.group = group;
  out.total = desired + obstacle + social + group;
  return out;
}

Command force_to_cmd(const Vec2& force, const RobotState& state, const SfmParams& params,
                     double dt) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");

  Command cmd;
  double f_norm = force.norm();
  if (f_norm < 0.05) {
    // No usable drive signal. The deadband matters: without it, far-field
    // kernel tails (1e-3-scale forces) spin the robot in place whenever the
    // desired force drops out.
    cmd.omega = 0.0;
    double decay = std::max(0.0, 1.0 - dt / params.relaxation_time);
    cmd.v = std::clamp(state.v * decay, 0.0, params.max_lin_vel);
    return cmd;
  }

  double theta_err = wrap_angle(force.angle() - state.pose.theta);
  cmd.omega = std::clamp(params.k_ang * theta_err, -params.max_rot_vel, params.max_rot_vel);
  double forward = params.k_lin * f_norm * std::max(0.0, std::cos(theta_err));
  cmd.v = std::clamp(forward, 0.0, params.max_lin_vel);
  return cmd;
}

}  // namespace socnav
