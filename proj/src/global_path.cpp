#include "socnav/global_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace socnav {

namespace {

struct Node {
  double f;
  double g;
  int idx;
  bool operator>(const Node& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g > o.g;
    return idx > o.idx;  // deterministic tie-break
  }
};

}  // namespace

std::optional<GlobalPath> plan_global_path(const CostmapStack& stack, const Vec2& start,
                                           const Vec2& goal) {
  int sr, sc, gr, gc;
  if (!stack.world_to_cell(start, sr, sc) || !stack.world_to_cell(goal, gr, gc))
    return std::nullopt;
  if (stack.master_at(sr, sc) == kLethalCost || stack.master_at(gr, gc) == kLethalCost)
    return std::nullopt;

  const int w = stack.width(), h = stack.height();
  const double res = stack.resolution();
  const int start_idx = sr * w + sc;
  const int goal_idx = gr * w + gc;

  std::vector<double> g(static_cast<size_t>(w) * h, std::numeric_limits<double>::infinity());
  std::vector<int> parent(static_cast<size_t>(w) * h, -1);
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;

  auto heuristic = [&](int idx) {
    int r = idx / w, c = idx % w;
    double dr = (r - gr) * res, dc = (c - gc) * res;
    // Octile distance in meters; admissible for the (1 + cost/64) >= 1 weight.
    double adr = std::abs(dr), adc = std::abs(dc);
    return std::max(adr, adc) + (M_SQRT2 - 1.0) * std::min(adr, adc);
  };

  g[start_idx] = 0.0;
  open.push({heuristic(start_idx), 0.0, start_idx});

  static const int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  static const int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

  bool found = false;
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.g > g[node.idx]) continue;  // stale entry
    if (node.idx == goal_idx) {
      found = true;
      break;
    }
    int r = node.idx / w, c = node.idx % w;
    for (int k = 0; k < 8; ++k) {
      int nr = r + kDr[k], nc = c + kDc[k];
      if (!stack.in_bounds(nr, nc)) continue;
      uint8_t cell_cost = stack.master_at(nr, nc);
      if (cell_cost == kLethalCost) continue;
      double step_len = (kDr[k] != 0 && kDc[k] != 0) ? res * M_SQRT2 : res;
      double step = step_len * (1.0 + cell_cost / 64.0);
      int nidx = nr * w + nc;
      double ng = node.g + step;
      if (ng < g[nidx] - 1e-12) {
        g[nidx] = ng;
        parent[nidx] = node.idx;
        open.push({ng + heuristic(nidx), ng, nidx});
      }
    }
  }
  if (!found) return std::nullopt;

  std::vector<Vec2> cells;
  for (int idx = goal_idx; idx != -1; idx = parent[idx])
    cells.push_back(stack.cell_center(idx / w, idx % w));
  std::reverse(cells.begin(), cells.end());

  // Decimate to ~0.5 m waypoints, always keeping the goal.
  GlobalPath path;
  path.cost = g[goal_idx];
  double acc = 0.0;
  for (size_t i = 1; i < cells.size(); ++i) {
    acc += (cells[i] - cells[i - 1]).norm();
    if (acc >= 0.5 || i + 1 == cells.size()) {
      path.waypoints.push_back(cells[i]);
      acc = 0.0;
    }
  }
  if (path.waypoints.empty()) path.waypoints.push_back(goal);
  return path;
}

std::optional<Vec2> nearest_free_point(const CostmapStack& stack, const Vec2& p,
                                       double max_radius) {
  int r0, c0;
  if (!stack.world_to_cell(p, r0, c0)) return std::nullopt;
  int span = static_cast<int>(std::ceil(max_radius / stack.resolution()));

  double best_d = std::numeric_limits<double>::infinity();
  std::optional<Vec2> best;
  for (int dr = -span; dr <= span; ++dr) {
    for (int dc = -span; dc <= span; ++dc) {
      int row = r0 + dr, col = c0 + dc;
      if (!stack.in_bounds(row, col)) continue;
      if (stack.master_at(row, col) == kLethalCost) continue;
      Vec2 center = stack.cell_center(row, col);
      double d = (center - p).norm();
      if (d < best_d && d <= max_radius) {
        best_d = d;
        best = center;
      }
    }
  }
  return best;
}

}  // namespace socnav
