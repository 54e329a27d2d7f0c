#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fleet {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  Point operator+(Point o) const { return {x + o.x, y + o.y}; }
  Point operator-(Point o) const { return {x - o.x, y - o.y}; }
  Point operator*(double s) const { return {x * s, y * s}; }
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(b - a); }

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

inline Point rotate(Point p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Axis-aligned rectangle; `min` is the lower-left corner.
struct Rect {
  Point min;
  Point max;

  friend bool operator==(const Rect&, const Rect&) = default;

  bool contains_strict(Point p) const {
    return p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y;
  }
  bool contains(Point p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  Rect inflated(double r) const { return {{min.x - r, min.y - r}, {max.x + r, max.y + r}}; }
};

/// True when the closed segment [a, b] passes through the open interior of `r`.
/// Touching an edge or a corner does not count.
inline bool segment_hits_interior(Point a, Point b, const Rect& r) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.min.x, r.max.x - a.x, a.y - r.min.y, r.max.y - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] <= 0.0) return false;  // parallel and on/outside this slab edge
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  if (t1 - t0 <= 1e-12) return false;
  const double tm = 0.5 * (t0 + t1);
  return r.contains_strict({a.x + tm * dx, a.y + tm * dy});
}

}  // namespace fleet
