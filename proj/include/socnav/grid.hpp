#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "socnav/geometry.hpp"

namespace socnav {

// Static occupancy grid. Row 0 is the bottom of the map (lowest y);
// cell (row, col) covers [origin + col*res, origin + (col+1)*res) in x
// and the analogous interval in y.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, Vec2 origin);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }

  bool occupied(int row, int col) const { return cells_[index(row, col)] != 0; }
  void set_occupied(int row, int col, bool v) { cells_[index(row, col)] = v ? 1 : 0; }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }

  // World <-> grid transforms. world_to_cell returns false when outside.
  bool world_to_cell(const Vec2& p, int& row, int& col) const;
  Vec2 cell_center(int row, int col) const;

  bool occupied_at(const Vec2& p) const;  // out-of-bounds counts as occupied

  // Casts a ray from `from` along `dir` (unit) up to max_range; returns the
  // distance to the first occupied cell boundary, or max_range if free.
  double raycast(const Vec2& from, const Vec2& dir, double max_range) const;

  // True if the straight segment from a to b crosses an occupied cell.
  bool segment_blocked(const Vec2& a, const Vec2& b) const;

  double min_x() const { return origin_.x; }
  double min_y() const { return origin_.y; }
  double max_x() const { return origin_.x + width_ * resolution_; }
  double max_y() const { return origin_.y + height_ * resolution_; }

  // Run-length row parsing, e.g. "3#14.3#" = 3 occupied, 14 free, 3 occupied.
  // A bare '.' or '#' counts as one cell. Rows are listed bottom-up.
  static OccupancyGrid from_rle_rows(const std::vector<std::string>& rows,
                                     double resolution, Vec2 origin);

  // Portable graymap: values below 128 are occupied. P2 and P5 supported.
  static OccupancyGrid from_pgm(const std::string& path, double resolution, Vec2 origin);
  void write_pgm(const std::string& path) const;

 private:
  int index(int row, int col) const { return row * width_ + col; }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.1;
  Vec2 origin_;
  std::vector<uint8_t> cells_;
};

}  // namespace socnav
