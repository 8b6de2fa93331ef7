#pragma once

#include <cmath>

namespace socnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Vec2 operator-() const { return {-x, -y}; }
  bool operator==(const Vec2&) const = default;

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double squaredNorm() const { return x * x + y * y; }
  double angle() const { return std::atan2(y, x); }

  // Zero vector stays zero instead of producing NaNs.
  Vec2 normalized() const {
    double n = norm();
    if (n < 1e-12) return {0.0, 0.0};
    return {x / n, y / n};
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

// Normalizes an angle to (-pi, pi]. -pi maps to +pi.
inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians, kept in (-pi, pi]

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const { return {std::cos(theta), std::sin(theta)}; }
};

// Positive hinge [x]_+ used by the follow-band force.
inline double hinge(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace socnav
