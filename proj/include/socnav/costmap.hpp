#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "socnav/grid.hpp"
#include "socnav/world.hpp"

namespace socnav {

constexpr uint8_t kLethalCost = 254;
// Static-wall inflation ring: near-lethal for planning but not treated as a
// physical obstacle by the force model.
constexpr uint8_t kInflatedCost = 253;

// Cost attributes attached to a marked entity by the slow loop.
struct SocialEntityAttr {
  std::string entity_id;
  std::string class_label;
  double cost_value = 100.0;      // C_base in [0, 254]
  double inflation_radius = 2.0;  // R, meters
  double decay_rate = 1.0;        // lambda, 1/meters
  std::optional<std::pair<double, double>> band;  // (d_min, d_max) for follow targets
  Vec2 position;

  bool operator==(const SocialEntityAttr&) const = default;
};

struct CostSample {
  double cost = 0.0;
  Vec2 gradient;  // cost units per meter
};

// Layered costmap: static walls (with a fixed robot-radius inflation pass),
// a scan-driven obstacle layer, and the social layer. Layers merge into the
// master grid by per-cell maximum.
class CostmapStack {
 public:
  CostmapStack() = default;
  // Builds the static layer from the map; inflation_radius in meters.
  CostmapStack(const OccupancyGrid& static_map, double inflation_radius);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }

  // Marks beam endpoints (range < max_range) lethal and clears traversed
  // cells; cells outside the sensor footprint are untouched.
  void update_obstacle_layer(const LidarScan& scan, const Pose& pose);

  // Rebuilds the social layer from the given marker set; stale markers from
  // previous calls vanish. Contributions from multiple entities take the
  // per-cell maximum. Throws std::invalid_argument on invalid attributes.
  void apply_social_entities(const std::vector<SocialEntityAttr>& entities);

  // Social field of a single entity at distance d, before quantization.
  static double social_cost_at(const SocialEntityAttr& entity, double d);

  // master = elementwise max(static, obstacle, quantized social).
  void merge_layers();

  // Master cost and central-difference gradient at a world point;
  // nullopt when out of bounds (callers treat that as lethal).
  std::optional<CostSample> sample(const Vec2& point) const;

  uint8_t master_at(int row, int col) const { return master_[index(row, col)]; }
  uint8_t static_at(int row, int col) const { return static_[index(row, col)]; }
  uint8_t obstacle_at(int row, int col) const { return obstacle_[index(row, col)]; }
  double social_at(int row, int col) const { return social_[index(row, col)]; }

  // True physical obstacle (wall or scan hit), excluding inflation and
  // social fields; the obstacle force sums over these cells.
  bool physical_lethal(int row, int col) const {
    return static_[index(row, col)] == kLethalCost || obstacle_[index(row, col)] == kLethalCost;
  }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  bool world_to_cell(const Vec2& p, int& row, int& col) const;
  Vec2 cell_center(int row, int col) const {
    return {origin_.x + (col + 0.5) * resolution_, origin_.y + (row + 0.5) * resolution_};
  }

  // Debug dump of one layer ("static", "obstacle", "social", "master").
  void write_layer_pgm(const std::string& layer, const std::string& path) const;

 private:
  int index(int row, int col) const { return row * width_ + col; }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.1;
  Vec2 origin_;
  std::vector<uint8_t> static_;
  std::vector<uint8_t> obstacle_;
  std::vector<float> social_;  // real-valued, quantized at merge
  std::vector<uint8_t> master_;
};

}  // namespace socnav
