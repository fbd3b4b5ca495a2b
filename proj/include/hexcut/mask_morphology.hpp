#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hexcut/errors.hpp"
#include "hexcut/geometry.hpp"
#include "hexcut/heatmap.hpp"
#include "hexcut/lattice_graph.hpp"

namespace hexcut {

// Mask raster geometry: supersample mask pixels per image pixel, with mask
// pixel (0,0) centered at `origin` in image coordinates.
struct RasterConfig {
  int supersample = 2;
  Point2 origin = {0.0, 0.0};
};

inline void validate_raster_config(const RasterConfig& rc) {
  if (rc.supersample < 1) throw validation_error("supersample must be >= 1");
}

struct Rect {
  Point2 min;
  Point2 max;
};

inline Point2 mask_to_image(const RasterConfig& rc, double mx, double my) {
  const double s = static_cast<double>(rc.supersample);
  return {rc.origin.x + mx / s, rc.origin.y + my / s};
}

inline Polygon mask_polygon_to_image(const RasterConfig& rc, const Polygon& poly) {
  Polygon out;
  out.vertices.reserve(poly.size());
  for (const auto& v : poly.vertices) out.vertices.push_back(mask_to_image(rc, v.x, v.y));
  return out;
}

// Lattice cells as vertex-id cycles; the realization of "structure" used to
// snap the target mask to whole cells.
struct FaceSet {
  std::vector<std::vector<int>> faces;
};

namespace detail {

// Scanline fill of one polygon into an existing mask. Sets exactly the mask
// pixels whose centers are strictly inside, matching point_in_polygon's
// boundary convention: centers on edges (crossing x, horizontal runs) stay
// clear.
inline void scanline_fill(const Polygon& poly, const RasterConfig& rc, BinaryMask& mask) {
  const double s = static_cast<double>(rc.supersample);
  const auto& v = poly.vertices;
  const std::size_t n = v.size();

  double min_y = std::numeric_limits<double>::max();
  double max_y = std::numeric_limits<double>::lowest();
  for (const auto& p : v) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  int my0 = static_cast<int>(std::ceil((min_y - rc.origin.y) * s));
  int my1 = static_cast<int>(std::floor((max_y - rc.origin.y) * s));
  my0 = std::max(my0, 0);
  my1 = std::min(my1, mask.height - 1);

  std::vector<double> crossings;
  for (int my = my0; my <= my1; ++my) {
    const double y = rc.origin.y + my / s;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point2& a = v[j];
      const Point2& b = v[i];
      if ((a.y > y) != (b.y > y)) {
        crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
      // Strictly-inside pixel centers: mx/s in (c0 - ox, c1 - ox).
      const double lo = (crossings[i] - rc.origin.x) * s;
      const double hi = (crossings[i + 1] - rc.origin.x) * s;
      int mx0 = static_cast<int>(std::floor(lo)) + 1;
      int mx1 = static_cast<int>(std::ceil(hi)) - 1;
      mx0 = std::max(mx0, 0);
      mx1 = std::min(mx1, mask.width - 1);
      for (int mx = mx0; mx <= mx1; ++mx) mask.set(mx, my);
    }
    // Centers sitting exactly on a horizontal edge are boundary, not inside.
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point2& a = v[j];
      const Point2& b = v[i];
      if (a.y == y && b.y == y) {
        const double lo = (std::min(a.x, b.x) - rc.origin.x) * s;
        const double hi = (std::max(a.x, b.x) - rc.origin.x) * s;
        int mx0 = static_cast<int>(std::ceil(lo));
        int mx1 = static_cast<int>(std::floor(hi));
        mx0 = std::max(mx0, 0);
        mx1 = std::min(mx1, mask.width - 1);
        for (int mx = mx0; mx <= mx1; ++mx) mask.set(mx, my, false);
      }
    }
  }
}

inline BinaryMask make_mask_for_bounds(const RasterConfig& rc, const Rect& bounds) {
  const double s = static_cast<double>(rc.supersample);
  const int w = static_cast<int>(std::floor((bounds.max.x - rc.origin.x) * s)) + 1;
  const int h = static_cast<int>(std::floor((bounds.max.y - rc.origin.y) * s)) + 1;
  if (w < 1 || h < 1) throw validation_error("raster bounds are empty");
  return BinaryMask::zeros(w, h);
}

}  // namespace detail

// Rasterizes one polygon over `bounds` (whose min corner must be the raster
// origin). Bit set iff the pixel center is strictly inside.
inline BinaryMask rasterize_polygon(const Polygon& poly, const RasterConfig& rc,
                                    const Rect& bounds) {
  validate_polygon(poly);
  validate_raster_config(rc);
  if (std::abs(bounds.min.x - rc.origin.x) > 1e-9 || std::abs(bounds.min.y - rc.origin.y) > 1e-9) {
    throw validation_error("bounds.min must coincide with the raster origin");
  }
  for (const auto& p : poly.vertices) {
    if (p.x < bounds.min.x - 1e-9 || p.y < bounds.min.y - 1e-9 || p.x > bounds.max.x + 1e-9 ||
        p.y > bounds.max.y + 1e-9) {
      throw validation_error("polygon outside raster bounds");
    }
  }
  BinaryMask mask = detail::make_mask_for_bounds(rc, bounds);
  detail::scanline_fill(poly, rc, mask);
  return mask;
}

// Bounded faces of the reconstructed lattice via angle-ordered half-edge
// traversal: at each node the incident edges are sorted by direction and the
// walk always takes the most-clockwise turn. The unbounded face comes out
// with non-positive signed area and is dropped; honeycomb cells keep between
// 4 and 8 vertices.
inline FaceSet extract_faces(const LatticeGraph& graph) {
  const int n = static_cast<int>(graph.nodes.size());
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
  for (const auto& e : graph.edges) {
    nbrs[static_cast<std::size_t>(e.a)].push_back(e.b);
    nbrs[static_cast<std::size_t>(e.b)].push_back(e.a);
  }
  auto angle_of = [&](int from, int to) {
    const Point2 d = graph.node_position(to) - graph.node_position(from);
    return std::atan2(d.y, d.x);
  };
  for (int u = 0; u < n; ++u) {
    std::sort(nbrs[static_cast<std::size_t>(u)].begin(), nbrs[static_cast<std::size_t>(u)].end(),
              [&](int p, int q) { return angle_of(u, p) < angle_of(u, q); });
  }

  // next half-edge after (u -> v): successor of u in v's angular order.
  auto next_neighbor = [&](int u, int v) {
    const auto& ring = nbrs[static_cast<std::size_t>(v)];
    const double rev = angle_of(v, u);
    std::size_t best = 0;
    double best_gap = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < ring.size(); ++i) {
      double gap = angle_of(v, ring[i]) - rev;
      if (gap <= 1e-15) gap += 2.0 * M_PI;
      if (gap < best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    return ring[best];
  };

  std::map<std::pair<int, int>, bool> used;
  for (const auto& e : graph.edges) {
    used[{e.a, e.b}] = false;
    used[{e.b, e.a}] = false;
  }

  FaceSet out;
  for (auto& [he, done] : used) {
    if (done) continue;
    std::vector<int> cycle;
    int u = he.first;
    int v = he.second;
    while (true) {
      auto it = used.find({u, v});
      if (it->second) break;
      it->second = true;
      cycle.push_back(u);
      const int w = next_neighbor(u, v);
      u = v;
      v = w;
    }
    if (cycle.size() < 4 || cycle.size() > 8) continue;

    Polygon poly;
    for (int id : cycle) poly.vertices.push_back(graph.node_position(id));
    if (poly.signed_area() <= 0.0) continue;

    // Canonical rotation: smallest vertex id first.
    const auto min_it = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), min_it, cycle.end());
    out.faces.push_back(std::move(cycle));
  }
  std::sort(out.faces.begin(), out.faces.end());
  return out;
}

struct StructureMaskResult {
  BinaryMask mask;
  RasterConfig rc;                      // effective raster frame (origin follows the data)
  std::vector<std::size_t> kept_faces;  // indices into the FaceSet
  FaceSet faces;
};

// Union of rasterized lattice cells whose vertices all lie strictly inside
// the target outline. The raster frame is anchored one mean edge length
// outside the node bounding box so a later dilation cannot clip.
inline StructureMaskResult structure_mask(const LatticeGraph& graph, const Polygon& target,
                                          const RasterConfig& rc_in) {
  validate_polygon(target);
  validate_raster_config(rc_in);

  StructureMaskResult result;
  result.faces = extract_faces(graph);

  for (std::size_t i = 0; i < result.faces.faces.size(); ++i) {
    bool all_inside = true;
    for (int id : result.faces.faces[i]) {
      if (!point_in_polygon(graph.node_position(id), target)) {
        all_inside = false;
        break;
      }
    }
    if (all_inside) result.kept_faces.push_back(i);
  }
  if (result.kept_faces.empty()) throw validation_error("target too small for lattice");

  double min_x = std::numeric_limits<double>::max(), min_y = min_x;
  double max_x = std::numeric_limits<double>::lowest(), max_y = max_x;
  for (const auto& node : graph.nodes) {
    min_x = std::min(min_x, node.position.x);
    max_x = std::max(max_x, node.position.x);
    min_y = std::min(min_y, node.position.y);
    max_y = std::max(max_y, node.position.y);
  }
  const double margin = graph.mean_edge_length > 0.0 ? graph.mean_edge_length
                                                     : graph.mean_knn_distance;
  result.rc = rc_in;
  result.rc.origin = {min_x - margin, min_y - margin};
  const Rect bounds{result.rc.origin, {max_x + margin, max_y + margin}};

  result.mask = detail::make_mask_for_bounds(result.rc, bounds);
  for (std::size_t idx : result.kept_faces) {
    Polygon cell;
    for (int id : result.faces.faces[idx]) cell.vertices.push_back(graph.node_position(id));
    detail::scanline_fill(cell, result.rc, result.mask);
  }
  return result;
}

namespace detail {

inline constexpr double kEdtInf = 1e30;

// 1D squared-distance lower envelope (Felzenszwalb & Huttenlocher).
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  d.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<int> v(static_cast<std::size_t>(n), 0);
  std::vector<double> z(static_cast<std::size_t>(n) + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -kEdtInf;
  z[1] = kEdtInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = kEdtInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
    const double dq = q - v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] = dq * dq + f[v[static_cast<std::size_t>(k)]];
  }
}

}  // namespace detail

// Exact squared Euclidean distance to the nearest set pixel center.
inline std::vector<double> squared_distance_transform(const BinaryMask& mask) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<double> dist(static_cast<std::size_t>(w) * h, detail::kEdtInf);

  std::vector<double> f(static_cast<std::size_t>(h)), d;
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = mask.test(x, y) ? 0.0 : detail::kEdtInf;
    detail::edt_1d(f, d);
    for (int y = 0; y < h; ++y) dist[static_cast<std::size_t>(y) * w + x] = d[static_cast<std::size_t>(y)];
  }
  std::vector<double> fr(static_cast<std::size_t>(w)), dr;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) fr[static_cast<std::size_t>(x)] = dist[static_cast<std::size_t>(y) * w + x];
    detail::edt_1d(fr, dr);
    for (int x = 0; x < w; ++x) dist[static_cast<std::size_t>(y) * w + x] = dr[static_cast<std::size_t>(x)];
  }
  return dist;
}

// Morphological dilation by a Euclidean disk: output pixel set iff its center
// lies within `radius` (mask pixel units) of a set input pixel center.
inline BinaryMask dilate(const BinaryMask& mask, double radius) {
  if (radius < 0.0) throw validation_error("dilation radius must be >= 0");
  const auto dist2 = squared_distance_transform(mask);
  BinaryMask out = BinaryMask::zeros(mask.width, mask.height);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < dist2.size(); ++i) out.bits[i] = dist2[i] <= r2 ? 1 : 0;
  return out;
}

namespace detail {

inline int count_components_8(const BinaryMask& mask) {
  std::vector<std::uint8_t> visited(mask.bits.size(), 0);
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int y0 = 0; y0 < mask.height; ++y0) {
    for (int x0 = 0; x0 < mask.width; ++x0) {
      const std::size_t idx0 = static_cast<std::size_t>(y0) * mask.width + x0;
      if (!mask.bits[idx0] || visited[idx0]) continue;
      ++components;
      visited[idx0] = 1;
      stack.assign(1, {x0, y0});
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * mask.width + nx;
            if (mask.bits[nidx] && !visited[nidx]) {
              visited[nidx] = 1;
              stack.push_back({nx, ny});
            }
          }
        }
      }
    }
  }
  return components;
}

}  // namespace detail

// Moore-neighbor boundary trace (clockwise in image orientation, y down)
// starting at the topmost-then-leftmost set pixel, with collinear runs
// compressed. Vertices are mask pixel centers.
inline Polygon trace_contour(const BinaryMask& mask) {
  if (mask.count() == 0) throw validation_error("cannot trace an empty mask");
  const int components = detail::count_components_8(mask);
  if (components != 1) {
    throw validation_error("mask has " + std::to_string(components) +
                           " connected components, expected 1");
  }

  int sx = -1, sy = -1;
  for (int y = 0; y < mask.height && sx < 0; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.test(x, y)) {
        sx = x;
        sy = y;
        break;
      }
    }
  }

  // Clockwise Moore neighborhood, y-down screen orientation.
  static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  auto is_set = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < mask.width && y < mask.height && mask.test(x, y);
  };

  std::vector<Point2> boundary;
  int cx = sx, cy = sy;
  int dir0 = 5;  // start is topmost-leftmost, so W..NE are clear; sweep from NW
  // Stop when the first (pixel, entry-direction) state is about to repeat.
  int first_px = -1, first_py = -1, first_dir = -1;
  const std::size_t guard = 4 * mask.bits.size() + 16;

  boundary.push_back({static_cast<double>(sx), static_cast<double>(sy)});
  while (boundary.size() < guard) {
    int found = -1;
    for (int step = 0; step < 8; ++step) {
      const int dir = (dir0 + step) % 8;
      if (is_set(cx + kDx[dir], cy + kDy[dir])) {
        found = dir;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const int nx = cx + kDx[found];
    const int ny = cy + kDy[found];
    if (nx == first_px && ny == first_py && found == first_dir) break;
    if (first_px < 0) {
      first_px = nx;
      first_py = ny;
      first_dir = found;
    }
    cx = nx;
    cy = ny;
    // Resume the sweep just past the backtrack (left of travel).
    dir0 = (found + 6) % 8;
    boundary.push_back({static_cast<double>(cx), static_cast<double>(cy)});
  }
  if (boundary.size() > 1 && boundary.back() == boundary.front()) boundary.pop_back();
  if (boundary.size() < 3) throw validation_error("contour below minimum area");

  // Compress collinear runs (and drop immediate backtracks of zero area).
  std::vector<Point2> compressed;
  const std::size_t m = boundary.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& prev = boundary[(i + m - 1) % m];
    const Point2& cur = boundary[i];
    const Point2& next = boundary[(i + 1) % m];
    if (cross(cur - prev, next - cur) != 0.0) compressed.push_back(cur);
  }
  if (compressed.size() < 3) throw validation_error("contour below minimum area");

  Polygon poly;
  poly.vertices = std::move(compressed);
  return poly;
}

// Absolute-coordinate SVG path for a closed contour, 3 decimal digits.
inline std::string contour_svg_path(const Polygon& poly) {
  std::ostringstream out;
  char buf[64];
  for (std::size_t i = 0; i < poly.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.3f %.3f", i == 0 ? "M " : " L ", poly[i].x, poly[i].y);
    out << buf;
  }
  out << " Z";
  return out.str();
}

}  // namespace hexcut
