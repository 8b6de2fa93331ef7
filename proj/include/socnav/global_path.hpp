#pragma once

#include <optional>
#include <vector>

#include "socnav/costmap.hpp"

namespace socnav {

struct GlobalPath {
  std::vector<Vec2> waypoints;  // start excluded, goal included
  double cost = 0.0;            // accumulated weighted cost
};

// Minimal-cost 8-connected grid path on the merged master grid; a step costs
// its euclidean length times (1 + cell_cost / 64). Lethal cells block. The
// path is decimated to waypoints roughly every 0.5 m. Returns nullopt when
// the goal is unreachable.
std::optional<GlobalPath> plan_global_path(const CostmapStack& stack, const Vec2& start,
                                           const Vec2& goal);

// Nearest non-lethal cell center to p within max_radius (for snapping a
// start or goal that sits inside a lethal disc).
std::optional<Vec2> nearest_free_point(const CostmapStack& stack, const Vec2& p,
                                       double max_radius);

}  // namespace socnav
