#include "socnav/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace socnav {

CostmapStack::CostmapStack(const OccupancyGrid& static_map, double inflation_radius)
    : width_(static_map.width()),
      height_(static_map.height()),
      resolution_(static_map.resolution()),
      origin_(static_map.origin()) {
  size_t n = static_cast<size_t>(width_) * height_;
  static_.assign(n, 0);
  obstacle_.assign(n, 0);
  social_.assign(n, 0.0f);
  master_.assign(n, 0);

  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c)
      if (static_map.occupied(r, c)) static_[index(r, c)] = kLethalCost;

  // Fixed robot-radius inflation pass around walls.
  if (inflation_radius > 0.0) {
    int span = static_cast<int>(std::ceil(inflation_radius / resolution_));
    std::vector<uint8_t> inflated = static_;
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        if (static_[index(r, c)] != kLethalCost) continue;
        for (int dr = -span; dr <= span; ++dr) {
          for (int dc = -span; dc <= span; ++dc) {
            int nr = r + dr, nc = c + dc;
            if (!in_bounds(nr, nc)) continue;
            if (inflated[index(nr, nc)] == kLethalCost) continue;
            double d = resolution_ * std::hypot(dr, dc);
            if (d <= inflation_radius) inflated[index(nr, nc)] = kInflatedCost;
          }
        }
      }
    }
    static_ = std::move(inflated);
  }
  merge_layers();
}

bool CostmapStack::world_to_cell(const Vec2& p, int& row, int& col) const {
  col = static_cast<int>(std::floor((p.x - origin_.x) / resolution_));
  row = static_cast<int>(std::floor((p.y - origin_.y) / resolution_));
  return in_bounds(row, col);
}

void CostmapStack::update_obstacle_layer(const LidarScan& scan, const Pose& pose) {
  double inc = scan.beam_count > 1
                   ? (scan.angle_max - scan.angle_min) / (scan.beam_count - 1)
                   : 0.0;
  Vec2 o = pose.position();

  for (int b = 0; b < scan.beam_count; ++b) {
    double range = scan.ranges[b];
    double a = pose.theta + scan.angle_min + b * inc;
    Vec2 dir{std::cos(a), std::sin(a)};
    bool hit = range < scan.max_range - 1e-9;

    // Grid line traversal (Amanatides-Woo): clear cells crossed before the
    // endpoint, mark the cell containing the endpoint when the beam hit.
    int row, col;
    if (!world_to_cell(o, row, col)) continue;

    const int step_col = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
    const int step_row = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
    double t_max_x, t_max_y, t_delta_x, t_delta_y;
    if (step_col != 0) {
      double next_x = origin_.x + (col + (step_col > 0 ? 1 : 0)) * resolution_;
      t_max_x = (next_x - o.x) / dir.x;
      t_delta_x = resolution_ / std::abs(dir.x);
    } else {
      t_max_x = t_delta_x = std::numeric_limits<double>::infinity();
    }
    if (step_row != 0) {
      double next_y = origin_.y + (row + (step_row > 0 ? 1 : 0)) * resolution_;
      t_max_y = (next_y - o.y) / dir.y;
      t_delta_y = resolution_ / std::abs(dir.y);
    } else {
      t_max_y = t_delta_y = std::numeric_limits<double>::infinity();
    }

    double t_entry = 0.0;
    while (t_entry <= range + 1e-9) {
      if (!in_bounds(row, col)) break;
      if (hit && t_entry >= range - 1e-9) {
        obstacle_[index(row, col)] = kLethalCost;
        break;
      }
      obstacle_[index(row, col)] = 0;
      if (t_max_x < t_max_y) {
        t_entry = t_max_x;
        t_max_x += t_delta_x;
        col += step_col;
      } else {
        t_entry = t_max_y;
        t_max_y += t_delta_y;
        row += step_row;
      }
    }
  }
}

double CostmapStack::social_cost_at(const SocialEntityAttr& e, double d) {
  if (e.band) {
    double d_min = e.band->first, d_max = e.band->second;
    if (d < d_min) return static_cast<double>(kLethalCost);
    if (d <= d_max) return e.cost_value * 0.5;
    if (d <= d_max + e.inflation_radius) return e.cost_value * std::exp(-e.decay_rate * (d - d_max));
    return 0.0;
  }
  if (d > e.inflation_radius) return 0.0;
  return e.cost_value * std::exp(-e.decay_rate * d);
}

void CostmapStack::apply_social_entities(const std::vector<SocialEntityAttr>& entities) {
  for (const auto& e : entities) {
    if (e.cost_value < 0.0 || e.cost_value > 254.0)
      throw std::invalid_argument("marker cost_value out of [0, 254] for entity " + e.entity_id);
    if (e.inflation_radius <= 0.0)
      throw std::invalid_argument("marker inflation_radius must be positive for entity " +
                                  e.entity_id);
    if (e.decay_rate < 0.0)
      throw std::invalid_argument("marker decay_rate must be >= 0 for entity " + e.entity_id);
    if (e.band && !(e.band->first > 0.0 && e.band->first < e.band->second))
      throw std::invalid_argument("marker band requires 0 < d_min < d_max for entity " +
                                  e.entity_id);
  }

  std::fill(social_.begin(), social_.end(), 0.0f);

  for (const auto& e : entities) {
    double reach = e.band ? e.band->second + e.inflation_radius : e.inflation_radius;
    int c0 = static_cast<int>(std::floor((e.position.x - reach - origin_.x) / resolution_));
    int c1 = static_cast<int>(std::floor((e.position.x + reach - origin_.x) / resolution_));
    int r0 = static_cast<int>(std::floor((e.position.y - reach - origin_.y) / resolution_));
    int r1 = static_cast<int>(std::floor((e.position.y + reach - origin_.y) / resolution_));
    c0 = std::max(c0, 0);
    r0 = std::max(r0, 0);
    c1 = std::min(c1, width_ - 1);
    r1 = std::min(r1, height_ - 1);

    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        double d = (cell_center(r, c) - e.position).norm();
        double v = social_cost_at(e, d);
        float& cell = social_[index(r, c)];
        if (v > cell) cell = static_cast<float>(v);
      }
    }
  }
}

void CostmapStack::merge_layers() {
  size_t n = master_.size();
  for (size_t i = 0; i < n; ++i) {
    double s = std::clamp(std::round(static_cast<double>(social_[i])), 0.0, 254.0);
    master_[i] = std::max({static_[i], obstacle_[i], static_cast<uint8_t>(s)});
  }
}

std::optional<CostSample> CostmapStack::sample(const Vec2& point) const {
  int row, col;
  if (!world_to_cell(point, row, col)) return std::nullopt;

  CostSample s;
  s.cost = master_[index(row, col)];

  // Central finite difference, one-sided at the borders.
  auto value = [&](int r, int c) { return static_cast<double>(master_[index(r, c)]); };
  int cl = std::max(col - 1, 0), cr = std::min(col + 1, width_ - 1);
  int rl = std::max(row - 1, 0), rh = std::min(row + 1, height_ - 1);
  s.gradient.x = (value(row, cr) - value(row, cl)) / ((cr - cl) * resolution_);
  s.gradient.y = (value(rh, col) - value(rl, col)) / ((rh - rl) * resolution_);
  if (cr == cl) s.gradient.x = 0.0;
  if (rh == rl) s.gradient.y = 0.0;
  return s;
}

void CostmapStack::write_layer_pgm(const std::string& layer, const std::string& path) const {
  auto value = [&](int r, int c) -> double {
    if (layer == "static") return static_[index(r, c)];
    if (layer == "obstacle") return obstacle_[index(r, c)];
    if (layer == "social") return social_[index(r, c)];
    if (layer == "master") return master_[index(r, c)];
    throw std::invalid_argument("unknown layer: " + layer);
  };
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write pgm file: " + path);
  f << "P5\n" << width_ << " " << height_ << "\n255\n";
  for (int r = height_ - 1; r >= 0; --r) {
    for (int c = 0; c < width_; ++c) {
      double v = std::clamp(value(r, c), 0.0, 254.0);
      unsigned char out = static_cast<unsigned char>(255.0 - v);
      f.write(reinterpret_cast<const char*>(&out), 1);
    }
  }
}

}  // namespace socnav
