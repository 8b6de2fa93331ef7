#include "socnav/grid.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace socnav {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Vec2 origin)
    : width_(width), height_(height), resolution_(resolution), origin_(origin),
      cells_(static_cast<size_t>(width) * height, 0) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
  if (resolution <= 0.0) throw std::invalid_argument("grid resolution must be positive");
}

bool OccupancyGrid::world_to_cell(const Vec2& p, int& row, int& col) const {
  col = static_cast<int>(std::floor((p.x - origin_.x) / resolution_));
  row = static_cast<int>(std::floor((p.y - origin_.y) / resolution_));
  return in_bounds(row, col);
}

Vec2 OccupancyGrid::cell_center(int row, int col) const {
  return {origin_.x + (col + 0.5) * resolution_, origin_.y + (row + 0.5) * resolution_};
}

bool OccupancyGrid::occupied_at(const Vec2& p) const {
  int row, col;
  if (!world_to_cell(p, row, col)) return true;
  return occupied(row, col);
}

// Amanatides-Woo traversal.
double OccupancyGrid::raycast(const Vec2& from, const Vec2& dir, double max_range) const {
  int row, col;
  if (!world_to_cell(from, row, col)) return 0.0;

  const double dx = dir.x, dy = dir.y;
  const int step_col = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_row = dy > 0 ? 1 : (dy < 0 ? -1 : 0);

  // Distance along the ray to the next vertical / horizontal cell boundary.
  double t_max_x, t_max_y, t_delta_x, t_delta_y;
  if (step_col != 0) {
    double next_x = origin_.x + (col + (step_col > 0 ? 1 : 0)) * resolution_;
    t_max_x = (next_x - from.x) / dx;
    t_delta_x = resolution_ / std::abs(dx);
  } else {
    t_max_x = std::numeric_limits<double>::infinity();
    t_delta_x = std::numeric_limits<double>::infinity();
  }
  if (step_row != 0) {
    double next_y = origin_.y + (row + (step_row > 0 ? 1 : 0)) * resolution_;
    t_max_y = (next_y - from.y) / dy;
    t_delta_y = resolution_ / std::abs(dy);
  } else {
    t_max_y = std::numeric_limits<double>::infinity();
    t_delta_y = std::numeric_limits<double>::infinity();
  }

  if (occupied(row, col)) return 0.0;

  double t = 0.0;
  while (t <= max_range) {
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      col += step_col;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      row += step_row;
    }
    if (t > max_range) break;
    if (!in_bounds(row, col)) return max_range;
    if (occupied(row, col)) return t;
  }
  return max_range;
}

bool OccupancyGrid::segment_blocked(const Vec2& a, const Vec2& b) const {
  Vec2 d = b - a;
  double len = d.norm();
  if (len < 1e-12) return occupied_at(a);
  double hit = raycast(a, d / len, len);
  return hit < len - 1e-9;
}

OccupancyGrid OccupancyGrid::from_rle_rows(const std::vector<std::string>& rows,
                                           double resolution, Vec2 origin) {
  if (rows.empty()) throw std::invalid_argument("map rows are empty");

  std::vector<std::vector<uint8_t>> decoded;
  decoded.reserve(rows.size());
  size_t width = 0;
  for (const auto& row : rows) {
    std::vector<uint8_t> cells;
    size_t i = 0;
    while (i < row.size()) {
      int count = 0;
      while (i < row.size() && std::isdigit(static_cast<unsigned char>(row[i]))) {
        count = count * 10 + (row[i] - '0');
        ++i;
      }
      if (count == 0) count = 1;
      if (i >= row.size()) throw std::invalid_argument("map row ends after a run count: " + row);
      char c = row[i++];
      uint8_t v;
      if (c == '.') v = 0;
      else if (c == '#') v = 1;
      else throw std::invalid_argument(std::string("unknown map cell char '") + c + "'");
      cells.insert(cells.end(), count, v);
    }
    if (width == 0) width = cells.size();
    else if (cells.size() != width)
      throw std::invalid_argument("map rows have inconsistent widths");
    decoded.push_back(std::move(cells));
  }

  OccupancyGrid g(static_cast<int>(width), static_cast<int>(decoded.size()), resolution, origin);
  for (int r = 0; r < g.height(); ++r)
    for (int c = 0; c < g.width(); ++c)
      g.set_occupied(r, c, decoded[r][c] != 0);
  return g;
}

OccupancyGrid OccupancyGrid::from_pgm(const std::string& path, double resolution, Vec2 origin) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open pgm file: " + path);

  auto next_token = [&f, &path]() -> std::string {
    std::string tok;
    while (f >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(f, rest);
        continue;
      }
      return tok;
    }
    throw std::runtime_error("truncated pgm header: " + path);
  };

  std::string magic = next_token();
  if (magic != "P2" && magic != "P5") throw std::runtime_error("unsupported pgm magic: " + magic);
  int w = std::stoi(next_token());
  int h = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("bad pgm dimensions in " + path);

  std::vector<int> values(static_cast<size_t>(w) * h);
  if (magic == "P2") {
    for (auto& v : values) {
      if (!(f >> v)) throw std::runtime_error("truncated pgm data: " + path);
    }
  } else {
    f.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(values.size());
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (f.gcount() != static_cast<std::streamsize>(raw.size()))
      throw std::runtime_error("truncated pgm data: " + path);
    for (size_t i = 0; i < raw.size(); ++i) values[i] = raw[i];
  }

  // PGM stores the top image row first; grid row 0 is the bottom.
  OccupancyGrid g(w, h, resolution, origin);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      g.set_occupied(h - 1 - r, c, values[static_cast<size_t>(r) * w + c] < 128);
  return g;
}

void OccupancyGrid::write_pgm(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write pgm file: " + path);
  f << "P5\n" << width_ << " " << height_ << "\n255\n";
  for (int r = height_ - 1; r >= 0; --r) {
    for (int c = 0; c < width_; ++c) {
      unsigned char v = occupied(r, c) ? 0 : 255;
      f.write(reinterpret_cast<const char*>(&v), 1);
    }
  }
}

}  // namespace socnav
