#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hexcut/errors.hpp"
#include "hexcut/geometry.hpp"
#include "hexcut/heatmap.hpp"
#include "hexcut/json_write.hpp"

namespace hexcut {

// Undirected wall between two node points, kept in canonical a < b form.
struct Edge {
  int a = 0;
  int b = 0;
  double length = 0.0;
};

// Admissible neighbor distance window, as a ratio of the mean kNN distance.
struct NeighborBand {
  double lo = 0.5;
  double hi = 1.3;
};

inline void validate_band(const NeighborBand& band) {
  if (!(band.lo > 0.0 && band.lo < band.hi)) {
    throw validation_error("neighbor band requires 0 < lo < hi");
  }
}

struct LatticeGraph {
  std::vector<NodePoint> nodes;
  std::vector<Edge> edges;
  double mean_knn_distance = 0.0;
  double mean_edge_length = 0.0;

  const Point2& node_position(int id) const { return nodes[static_cast<std::size_t>(id)].position; }
  Segment edge_segment(const Edge& e) const { return {node_position(e.a), node_position(e.b)}; }
};

namespace detail {

inline void require_dense_ids(const std::vector<NodePoint>& nodes) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != static_cast<int>(i)) {
      throw validation_error("node ids must be dense 0..n-1 in input order");
    }
  }
}

// Uniform bucket grid over the node bounding box; queries walk outward in
// Chebyshev rings and stop once no unexplored cell can hold a closer point.
class PointGrid {
public:
  PointGrid(const std::vector<NodePoint>& nodes, double cell_size)
      : nodes_(nodes), cell_(std::max(cell_size, 1e-12)) {
    min_x_ = std::numeric_limits<double>::max();
    min_y_ = std::numeric_limits<double>::max();
    double max_x = std::numeric_limits<double>::lowest();
    double max_y = std::numeric_limits<double>::lowest();
    for (const auto& n : nodes) {
      min_x_ = std::min(min_x_, n.position.x);
      min_y_ = std::min(min_y_, n.position.y);
      max_x = std::max(max_x, n.position.x);
      max_y = std::max(max_y, n.position.y);
    }
    cells_x_ = nodes.empty() ? 1 : static_cast<int>(std::floor((max_x - min_x_) / cell_)) + 1;
    cells_y_ = nodes.empty() ? 1 : static_cast<int>(std::floor((max_y - min_y_) / cell_)) + 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      buckets_[key_of(nodes[i].position)].push_back(static_cast<int>(i));
    }
  }

  int cell_x(const Point2& p) const { return static_cast<int>(std::floor((p.x - min_x_) / cell_)); }
  int cell_y(const Point2& p) const { return static_cast<int>(std::floor((p.y - min_y_) / cell_)); }

  const std::vector<int>* bucket(int cx, int cy) const {
    auto it = buckets_.find(key(cx, cy));
    return it == buckets_.end() ? nullptr : &it->second;
  }

  // Exact distances from nodes[index] to its k nearest other nodes.
  std::vector<double> knn_distances(int index, int k) const {
    const Point2 p = nodes_[static_cast<std::size_t>(index)].position;
    const int cx = cell_x(p);
    const int cy = cell_y(p);
    const int ring_limit = std::max({cx, cells_x_ - 1 - cx, cy, cells_y_ - 1 - cy});
    std::vector<double> best;  // max-heap of the k smallest distances seen
    best.reserve(static_cast<std::size_t>(k) + 1);

    for (int ring = 0; ring <= ring_limit; ++ring) {
      // A point in a cell at Chebyshev ring r is at least (r-1)*cell away.
      if (best.size() == static_cast<std::size_t>(k) && ring >= 1 &&
          (ring - 1) * cell_ > best.front()) {
        break;
      }
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          const auto* ids = bucket(cx + dx, cy + dy);
          if (!ids) continue;
          for (int other : *ids) {
            if (other == index) continue;
            const double d = distance(p, nodes_[static_cast<std::size_t>(other)].position);
            if (best.size() < static_cast<std::size_t>(k)) {
              best.push_back(d);
              std::push_heap(best.begin(), best.end());
            } else if (d < best.front()) {
              std::pop_heap(best.begin(), best.end());
              best.back() = d;
              std::push_heap(best.begin(), best.end());
            }
          }
        }
      }
    }
    std::sort(best.begin(), best.end());
    return best;
  }

private:
  static long long key(int cx, int cy) {
    return (static_cast<long long>(cx) << 32) ^ static_cast<unsigned int>(cy);
  }
  long long key_of(const Point2& p) const { return key(cell_x(p), cell_y(p)); }

  const std::vector<NodePoint>& nodes_;
  double cell_;
  double min_x_ = 0.0, min_y_ = 0.0;
  int cells_x_ = 1, cells_y_ = 1;
  std::unordered_map<long long, std::vector<int>> buckets_;
};

inline double estimate_spacing(const std::vector<NodePoint>& nodes) {
  double min_x = std::numeric_limits<double>::max(), min_y = min_x;
  double max_x = std::numeric_limits<double>::lowest(), max_y = max_x;
  for (const auto& n : nodes) {
    min_x = std::min(min_x, n.position.x);
    max_x = std::max(max_x, n.position.x);
    min_y = std::min(min_y, n.position.y);
    max_y = std::max(max_y, n.position.y);
  }
  const double w = max_x - min_x;
  const double h = max_y - min_y;
  const double n = static_cast<double>(nodes.size());
  // Fallback keeps cells sane when the points are (nearly) collinear.
  return std::max({std::sqrt(std::max(w * h, 0.0) / n), (w + h) / (2.0 * n), 1e-9});
}

}  // namespace detail

// Mean over all nodes of the mean distance to each node's k nearest others.
// This is the reference length every later band and offset is relative to.
inline double mean_knn_distance(const std::vector<NodePoint>& nodes, int k = 3) {
  if (k < 1) throw validation_error("k must be >= 1");
  if (nodes.size() < static_cast<std::size_t>(k) + 1) {
    throw validation_error("mean_knn_distance requires at least " + std::to_string(k + 1) +
                           " nodes, got " + std::to_string(nodes.size()));
  }
  detail::require_dense_ids(nodes);
  detail::PointGrid grid(nodes, detail::estimate_spacing(nodes));
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto dists = grid.knn_distances(static_cast<int>(i), k);
    double per_node = 0.0;
    for (double d : dists) per_node += d;
    total += per_node / static_cast<double>(k);
  }
  return total / static_cast<double>(nodes.size());
}

// An edge joins every pair whose distance falls inside
// [lo*mean_dist, hi*mean_dist], endpoints inclusive. Pairs appear once, a < b,
// output sorted by (a, b).
inline std::vector<Edge> reconstruct_edges(const std::vector<NodePoint>& nodes, double mean_dist,
                                           const NeighborBand& band = {}) {
  if (!(mean_dist > 0.0)) throw validation_error("mean_dist must be > 0");
  validate_band(band);
  detail::require_dense_ids(nodes);

  const double d_lo = band.lo * mean_dist;
  const double d_hi = band.hi * mean_dist;
  detail::PointGrid grid(nodes, d_hi);

  std::vector<Edge> edges;
  for (const auto& n : nodes) {
    const int cx = grid.cell_x(n.position);
    const int cy = grid.cell_y(n.position);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const auto* ids = grid.bucket(cx + dx, cy + dy);
        if (!ids) continue;
        for (int other : *ids) {
          if (other <= n.id) continue;  // each unordered pair once
          const double d = distance(n.position, nodes[static_cast<std::size_t>(other)].position);
          if (d >= d_lo && d <= d_hi) {
            edges.push_back({n.id, other, d});
          }
        }
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });
  return edges;
}

// Runs the kNN statistic and band filter, caching both means on the graph.
inline LatticeGraph build_graph(const std::vector<NodePoint>& nodes, int k = 3,
                                const NeighborBand& band = {}) {
  if (nodes.size() < 4) {
    throw validation_error("build_graph requires at least 4 nodes, got " +
                           std::to_string(nodes.size()));
  }
  LatticeGraph g;
  g.nodes = nodes;
  g.mean_knn_distance = mean_knn_distance(nodes, k);
  g.edges = reconstruct_edges(nodes, g.mean_knn_distance, band);
  double total = 0.0;
  for (const auto& e : g.edges) total += e.length;
  g.mean_edge_length = g.edges.empty() ? 0.0 : total / static_cast<double>(g.edges.size());
  return g;
}

inline std::string nodes_json(const std::vector<NodePoint>& nodes) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (i) out << ",";
    out << "{\"id\":" << n.id << ",\"x\":" << detail::fmt6(n.position.x)
        << ",\"y\":" << detail::fmt6(n.position.y) << ",\"score\":" << detail::fmt6(n.score)
        << "}";
  }
  out << "]";
  return out.str();
}

inline std::string graph_json(const LatticeGraph& g) {
  std::ostringstream out;
  out << "{\"nodes\":" << nodes_json(g.nodes) << ",\"edges\":[";
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (i) out << ",";
    out << "{\"a\":" << g.edges[i].a << ",\"b\":" << g.edges[i].b << "}";
  }
  out << "],\"mean_knn_distance\":" << detail::fmt6(g.mean_knn_distance)
      << ",\"mean_edge_length\":" << detail::fmt6(g.mean_edge_length) << "}";
  return out.str();
}

inline void save_text_file(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << text << "\n";
  if (!out) throw io_error("cannot write '" + path + "'");
}

}  // namespace hexcut
