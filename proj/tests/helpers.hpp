#pragma once

#include <string>
#include <vector>

#include "socnav/scenario.hpp"
#include "socnav/world.hpp"

namespace socnav::test {

// Bordered free map, n x n cells at the given resolution.
inline OccupancyGrid bordered_map(int n = 100, double res = 0.1) {
  OccupancyGrid g(n, n, res, {0.0, 0.0});
  for (int i = 0; i < n; ++i) {
    g.set_occupied(0, i, true);
    g.set_occupied(n - 1, i, true);
    g.set_occupied(i, 0, true);
    g.set_occupied(i, n - 1, true);
  }
  return g;
}

inline OccupancyGrid open_map(int n = 100, double res = 0.1) {
  return OccupancyGrid(n, n, res, {0.0, 0.0});
}

inline ScenarioSpec basic_scenario(OccupancyGrid map, Pose start = {5.0, 5.0, 0.0}) {
  ScenarioSpec spec;
  spec.name = "test";
  spec.static_map = std::move(map);
  spec.robot_start = start;
  spec.robot_radius = 0.25;
  spec.instruction = "test";
  spec.task.goal.point = Vec2{8.0, 5.0};
  spec.task.goal.radius = 0.3;
  spec.task.time_limit = 60.0;
  return spec;
}

inline Pedestrian straight_walker(const std::string& id, Vec2 from, Vec2 to, double t_end,
                                  const std::string& identity = "person") {
  Pedestrian p;
  p.id = id;
  p.identity = identity;
  p.radius = 0.3;
  p.trajectory = {{0.0, from}, {t_end, to}};
  return p;
}

}  // namespace socnav::test
