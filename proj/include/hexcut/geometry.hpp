#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "hexcut/errors.hpp"

namespace hexcut {

// Relative tolerance for parallelism / degeneracy tests. Coordinates are
// O(10^3) px, so this sits far below pixel noise.
inline constexpr double kGeomEps = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point2& o) const { return x == o.x && y == o.y; }
};

inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Point2& a, const Point2& b) { return norm(b - a); }

inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

struct Segment {
  Point2 a;
  Point2 b;

  double length() const { return distance(a, b); }
  // Direction in degrees, (-180, 180].
  double direction_deg() const {
    return std::atan2(b.y - a.y, b.x - a.x) * 180.0 / M_PI;
  }
};

// Closed simple polygon; the edge from the last vertex back to the first is
// implicit.
struct Polygon {
  std::vector<Point2> vertices;

  std::size_t size() const { return vertices.size(); }
  const Point2& operator[](std::size_t i) const { return vertices[i]; }

  // Shoelace formula; sign encodes orientation.
  double signed_area() const {
    double acc = 0.0;
    for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
      acc += cross(vertices[j], vertices[i]);
    }
    return 0.5 * acc;
  }

  double area() const { return std::abs(signed_area()); }
};

// Undirected cut-plane orientation; a plane at angle d and d+180 are the same
// plane, so angles are kept in [0, 180).
struct PlaneAngle {
  double degrees = 0.0;

  static PlaneAngle normalized(double deg) {
    double d = std::fmod(deg, 180.0);
    if (d < 0.0) d += 180.0;
    if (d >= 180.0) d -= 180.0;
    if (d == 0.0) d = 0.0;  // squash -0
    return {d};
  }
};

inline double distance_point_segment(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, a);
  double t = dot(p - a, d) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + d * t);
}

// Validates the cheap polygon invariants: vertex count, finiteness and
// nonzero area. Simplicity is checked separately (see polygon_is_simple) as
// it is quadratic.
inline void validate_polygon(const Polygon& poly) {
  if (poly.size() < 3) throw validation_error("degenerate polygon: fewer than 3 vertices");
  for (const auto& v : poly.vertices) {
    if (!is_finite(v)) throw validation_error("degenerate polygon: non-finite vertex");
  }
  if (poly.area() <= 0.0) throw validation_error("degenerate polygon: zero area");
}

// Strict interior test, half-open even-odd ray crossing; points on the
// boundary report false so cells sitting exactly on a target outline are
// never counted twice.
inline bool point_in_polygon(const Point2& p, const Polygon& poly) {
  validate_polygon(poly);
  const auto& v = poly.vertices;
  const std::size_t n = v.size();

  const double scale = std::max({1.0, std::abs(p.x), std::abs(p.y)});
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (distance_point_segment(p, v[j], v[i]) <= kGeomEps * scale) return false;
  }

  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = v[j];
    const Point2& b = v[i];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x_cross > p.x) inside = !inside;
    }
  }
  return inside;
}

// Unique proper crossing of two segments, endpoints inclusive (a shared
// endpoint counts). Parallel and collinear-overlap cases report absent; the
// caller treats those as degenerate.
inline std::optional<Point2> segment_intersection(const Segment& s1, const Segment& s2) {
  const Point2 d1 = s1.b - s1.a;
  const Point2 d2 = s2.b - s2.a;
  const double denom = cross(d1, d2);
  const double scale = norm(d1) * norm(d2);
  if (std::abs(denom) <= kGeomEps * scale) return std::nullopt;

  const Point2 w = s2.a - s1.a;
  const double t = cross(w, d2) / denom;
  const double u = cross(w, d1) / denom;
  constexpr double slack = 1e-12;
  if (t < -slack || t > 1.0 + slack || u < -slack || u > 1.0 + slack) return std::nullopt;
  const double tc = std::clamp(t, 0.0, 1.0);
  return s1.a + d1 * tc;
}

// (direction + 90) folded into [0, 180); the blade plane for an edge.
inline PlaneAngle perpendicular_angle(double edge_direction_degrees) {
  return PlaneAngle::normalized(edge_direction_degrees + 90.0);
}

// Quadratic check used when polygons come from external input.
inline bool polygon_is_simple(const Polygon& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Segment si{v[i], v[(i + 1) % n]};
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      const Segment sj{v[j], v[(j + 1) % n]};
      if (segment_intersection(si, sj)) return false;
    }
  }
  return true;
}

}  // namespace hexcut
