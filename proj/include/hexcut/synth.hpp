#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hexcut/errors.hpp"
#include "hexcut/geometry.hpp"
#include "hexcut/heatmap.hpp"
#include "hexcut/json_write.hpp"
#include "hexcut/lattice_graph.hpp"

namespace hexcut {

// Deterministic 64-bit stream (splitmix64). Fixtures depend on the exact
// sequence, so the algorithm is pinned here rather than delegated to
// std::mt19937:
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
//   z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31
// u01() maps to [0,1) via the top 53 bits; gaussian_pair() is Box-Muller over
// one u01 pair with u1 shifted into (0,1].
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::pair<double, double> gaussian_pair() {
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    const double u2 = u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

private:
  std::uint64_t state_;
};

// Ideal honeycomb with known adjacency and faces; the oracle substrate that
// stands in for a photographed block.
struct GroundTruthLattice {
  std::vector<Point2> nodes;               // index == id
  std::vector<std::pair<int, int>> adjacency;  // canonical a < b
  std::vector<std::vector<int>> faces;     // 6-vertex cycles for clean lattices
  double edge_len = 0.0;

  std::vector<NodePoint> node_points() const {
    std::vector<NodePoint> out;
    out.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      out.push_back({static_cast<int>(i), nodes[i], 1.0});
    }
    return out;
  }
};

// Node-level defect model: detections only ever see node points, so profile
// deformation shows up as jitter, a wall dent as one large displacement, and
// a missed detection as dropout.
struct DefectSpec {
  double jitter_sigma = 0.0;
  int dent_count = 0;
  double dent_magnitude = 0.0;
  double dropout_prob = 0.0;
};

inline void validate_defect_spec(const DefectSpec& spec) {
  if (spec.jitter_sigma < 0.0 || spec.dent_magnitude < 0.0 || spec.dent_count < 0) {
    throw validation_error("defect magnitudes must be >= 0");
  }
  if (!(spec.dropout_prob >= 0.0 && spec.dropout_prob < 1.0)) {
    throw validation_error("dropout_prob must be in [0,1)");
  }
}

// rows x cols pointy-top hexagonal tiling with shared vertices deduplicated.
// Vertices land on the exact half-step grid (i*sqrt(3)/2*L, j*L/2), which
// makes deduplication and downstream golden tests exact. Ids are assigned in
// (y, x) order.
inline GroundTruthLattice generate_lattice(int rows, int cols, double edge_len,
                                           Point2 origin = {0.0, 0.0}) {
  if (rows < 1 || cols < 1) throw validation_error("rows and cols must be >= 1");
  if (!(edge_len > 0.0)) throw validation_error("edge_len must be > 0");

  const double half_w = std::sqrt(3.0) / 2.0 * edge_len;  // x step
  const double half_h = 0.5 * edge_len;                   // y step

  // Corner offsets around a cell center, in half-step units, starting at
  // angle 30 degrees and walking counter-clockwise.
  static constexpr int kCorner[6][2] = {{1, 1}, {0, 2}, {-1, 1}, {-1, -1}, {0, -2}, {1, -1}};

  std::map<std::pair<int, int>, int> vertex_ids;  // (j, i) -> provisional id
  std::vector<std::pair<int, int>> vertex_keys;
  std::vector<std::array<int, 6>> cell_corners;

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int ci = 2 * c + (r & 1);
      const int cj = 3 * r;
      std::array<int, 6> corners{};
      for (int k = 0; k < 6; ++k) {
        const std::pair<int, int> key{cj + kCorner[k][1], ci + kCorner[k][0]};  // (j, i)
        auto [it, inserted] = vertex_ids.try_emplace(key, static_cast<int>(vertex_keys.size()));
        if (inserted) vertex_keys.push_back(key);
        corners[static_cast<std::size_t>(k)] = it->second;
      }
      cell_corners.push_back(corners);
    }
  }

  // The ordered map key is (j, i) == (y, x) order, so renumber by map order.
  std::vector<int> remap(vertex_keys.size());
  {
    int next_id = 0;
    for (const auto& [key, prov] : vertex_ids) remap[static_cast<std::size_t>(prov)] = next_id++;
  }

  GroundTruthLattice lat;
  lat.edge_len = edge_len;
  lat.nodes.resize(vertex_keys.size());
  for (std::size_t prov = 0; prov < vertex_keys.size(); ++prov) {
    const auto [j, i] = vertex_keys[prov];
    lat.nodes[static_cast<std::size_t>(remap[prov])] = {origin.x + i * half_w,
                                                        origin.y + j * half_h};
  }

  std::map<std::pair<int, int>, bool> seen_edges;
  for (auto& corners : cell_corners) {
    std::vector<int> face;
    face.reserve(6);
    for (int k = 0; k < 6; ++k) {
      const int a = remap[static_cast<std::size_t>(corners[static_cast<std::size_t>(k)])];
      const int b = remap[static_cast<std::size_t>(corners[static_cast<std::size_t>((k + 1) % 6)])];
      face.push_back(a);
      seen_edges.emplace(std::pair<int, int>{std::min(a, b), std::max(a, b)}, true);
    }
    lat.faces.push_back(std::move(face));
  }
  lat.adjacency.reserve(seen_edges.size());
  for (const auto& [e, _] : seen_edges) lat.adjacency.push_back(e);

  return lat;
}

// Applies jitter, dents and dropout in a documented RNG order: one gaussian
// pair per node in id order, then dent_count (index, angle) draws, then one
// uniform per node for dropout. Surviving nodes are reindexed densely in
// their original order; faces touching a removed node are dropped.
inline GroundTruthLattice apply_defects(const GroundTruthLattice& lat, const DefectSpec& spec,
                                        std::uint64_t seed) {
  validate_defect_spec(spec);
  SplitMix64 rng(seed);
  const std::size_t n = lat.nodes.size();

  std::vector<Point2> moved = lat.nodes;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [gx, gy] = rng.gaussian_pair();
    moved[i].x += spec.jitter_sigma * gx;
    moved[i].y += spec.jitter_sigma * gy;
  }
  for (int d = 0; d < spec.dent_count && n > 0; ++d) {
    const std::size_t idx = static_cast<std::size_t>(rng.next() % n);
    const double angle = 2.0 * M_PI * rng.u01();
    moved[idx].x += spec.dent_magnitude * std::cos(angle);
    moved[idx].y += spec.dent_magnitude * std::sin(angle);
  }

  std::vector<int> new_id(n, -1);
  GroundTruthLattice out;
  out.edge_len = lat.edge_len;
  for (std::size_t i = 0; i < n; ++i) {
    const bool drop = rng.u01() < spec.dropout_prob;
    if (!drop) {
      new_id[i] = static_cast<int>(out.nodes.size());
      out.nodes.push_back(moved[i]);
    }
  }
  for (const auto& [a, b] : lat.adjacency) {
    const int na = new_id[static_cast<std::size_t>(a)];
    const int nb = new_id[static_cast<std::size_t>(b)];
    if (na >= 0 && nb >= 0) out.adjacency.emplace_back(std::min(na, nb), std::max(na, nb));
  }
  for (const auto& face : lat.faces) {
    std::vector<int> mapped;
    mapped.reserve(face.size());
    bool alive = true;
    for (int v : face) {
      const int nv = new_id[static_cast<std::size_t>(v)];
      if (nv < 0) {
        alive = false;
        break;
      }
      mapped.push_back(nv);
    }
    if (alive) out.faces.push_back(std::move(mapped));
  }
  return out;
}

// Sum-of-Gaussians node likelihood rendered at integer pixel samples and
// clamped to [0,1]. Contributions beyond 6 sigma are skipped; they are below
// 2e-8, two orders under the 8-bit quantization step.
inline Heatmap render_heatmap(const GroundTruthLattice& lat, double sigma, int width,
                              int height) {
  if (!(sigma > 0.0)) throw validation_error("sigma must be > 0");
  if (width < 1 || height < 1) throw validation_error("image dimensions must be >= 1");
  for (std::size_t i = 0; i < lat.nodes.size(); ++i) {
    const Point2& p = lat.nodes[i];
    if (p.x < 0.0 || p.y < 0.0 || p.x > width - 1 || p.y > height - 1) {
      throw validation_error("node " + std::to_string(i) + " outside image bounds");
    }
  }

  Heatmap hm;
  hm.width = width;
  hm.height = height;
  hm.values.assign(static_cast<std::size_t>(width) * height, 0.0);

  const double inv = 1.0 / (2.0 * sigma * sigma);
  const int reach = static_cast<int>(std::ceil(6.0 * sigma));
  for (const Point2& node : lat.nodes) {
    const int x0 = std::max(0, static_cast<int>(std::floor(node.x)) - reach);
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(node.x)) + reach);
    const int y0 = std::max(0, static_cast<int>(std::floor(node.y)) - reach);
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(node.y)) + reach);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - node.x;
        const double dy = y - node.y;
        hm.at(x, y) += std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  for (auto& v : hm.values) v = std::min(v, 1.0);
  return hm;
}

// Smallest image that keeps every blob fully inside, with margin pixels of
// clearance beyond the 3-sigma extent.
inline std::pair<int, int> suggest_image_size(const GroundTruthLattice& lat, double sigma,
                                              int margin = 8) {
  double max_x = 0.0, max_y = 0.0;
  for (const auto& p : lat.nodes) {
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const int pad = static_cast<int>(std::ceil(3.0 * sigma)) + margin;
  return {static_cast<int>(std::ceil(max_x)) + pad, static_cast<int>(std::ceil(max_y)) + pad};
}

// Same schema as graph_json plus the ground-truth "faces" array, so the plan
// command can consume either file.
inline std::string lattice_json(const GroundTruthLattice& lat) {
  const auto nodes = lat.node_points();
  std::ostringstream out;
  out << "{\"nodes\":" << nodes_json(nodes) << ",\"edges\":[";
  for (std::size_t i = 0; i < lat.adjacency.size(); ++i) {
    if (i) out << ",";
    out << "{\"a\":" << lat.adjacency[i].first << ",\"b\":" << lat.adjacency[i].second << "}";
  }
  out << "],\"faces\":[";
  for (std::size_t i = 0; i < lat.faces.size(); ++i) {
    if (i) out << ",";
    out << "[";
    for (std::size_t k = 0; k < lat.faces[i].size(); ++k) {
      if (k) out << ",";
      out << lat.faces[i][k];
    }
    out << "]";
  }
  out << "],\"edge_len\":" << detail::fmt6(lat.edge_len) << "}";
  return out.str();
}

}  // namespace hexcut
