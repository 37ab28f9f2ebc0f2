#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stlplan {

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - std::numbers::pi;
}

/// Planar pose; also the state of the unicycle model.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double alpha = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangle, x_lb < x_ub and y_lb < y_ub.
struct Box {
  double x_lb = 0.0;
  double x_ub = 0.0;
  double y_lb = 0.0;
  double y_ub = 0.0;

  bool valid() const { return x_lb < x_ub && y_lb < y_ub; }
  bool contains(Point2 p) const {
    return p.x >= x_lb && p.x <= x_ub && p.y >= y_lb && p.y <= y_ub;
  }
  Point2 center() const { return {0.5 * (x_lb + x_ub), 0.5 * (y_lb + y_ub)}; }
  Box translated(double dx, double dy) const {
    return {x_lb + dx, x_ub + dx, y_lb + dy, y_ub + dy};
  }
  Box inflated(double margin) const {
    return {x_lb - margin, x_ub + margin, y_lb - margin, y_ub + margin};
  }
  bool overlaps(const Box& o) const {
    return x_lb < o.x_ub && o.x_lb < x_ub && y_lb < o.y_ub && o.y_lb < y_ub;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Euclidean distance from a point to the closest point of a closed box (0 inside).
inline double distance_to_box(Point2 p, const Box& b) {
  const double dx = std::max({b.x_lb - p.x, 0.0, p.x - b.x_ub});
  const double dy = std::max({b.y_lb - p.y, 0.0, p.y - b.y_ub});
  return std::hypot(dx, dy);
}

}  // namespace stlplan
