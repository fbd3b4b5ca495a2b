#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hexcut/errors.hpp"
#include "hexcut/geometry.hpp"
#include "hexcut/heatmap.hpp"
#include "hexcut/json_write.hpp"
#include "hexcut/lattice_graph.hpp"
#include "hexcut/mask_morphology.hpp"

namespace hexcut {

// All numeric knobs of the pipeline in one snapshot; the defaults are the
// working values: threshold 0.3, 3 nearest neighbors, band [0.5, 1.3] of the
// mean distance, cut offset 0.4 of the edge length.
struct PipelineConfig {
  double tau = 0.3;
  int k = 3;
  NeighborBand band{0.5, 1.3};
  double offset_coeff = 0.4;
  int supersample = 2;
  int min_blob_area = 2;
  std::uint64_t rng_seed = 0;
  bool reject_out_of_band = false;  // reject instead of clamping to the feasible band
};

inline void validate_pipeline_config(const PipelineConfig& cfg) {
  if (!(cfg.tau >= 0.0 && cfg.tau < 1.0)) throw validation_error("tau out of range [0,1)");
  if (cfg.k < 1) throw validation_error("k must be >= 1");
  validate_band(cfg.band);
  if (!(cfg.offset_coeff > 0.0 && cfg.offset_coeff < 0.5)) {
    throw validation_error("offset_coeff out of range (0,0.5)");
  }
  if (cfg.supersample < 1) throw validation_error("supersample must be >= 1");
  if (cfg.min_blob_area < 1) throw validation_error("min_blob_area must be >= 1");
}

// Raw crossing of a lattice edge with the cut contour, before the offset
// rule is applied. t runs from endpoint a toward b.
struct CutCandidate {
  int edge = 0;  // index into LatticeGraph::edges
  Point2 point;
  double t = 0.0;
};

struct CutPoint {
  int edge = 0;
  Point2 point;
  double t = 0.0;
  PlaneAngle angle;
  bool clamped = false;
};

struct PlanDiagnostics {
  int nodes = 0;
  int edges = 0;
  int faces_kept = 0;
  int candidates = 0;
  int clamped_count = 0;
  int multi_crossing_edges = 0;  // edges that crossed the contour more than once
};

struct CutPlan {
  std::vector<CutPoint> cuts;
  double travel_length = 0.0;
  PipelineConfig config_echo;
  PlanDiagnostics diagnostics;
};

// Full pipeline output: the plan plus the intermediates a caller needs to
// render or audit the run.
struct PlanOutcome {
  CutPlan plan;
  LatticeGraph graph;
  Polygon contour;  // dilated cut contour, image coordinates
};

// Crossings of every graph edge with every contour side. An edge crossing
// more than once keeps only its smallest-t crossing and is counted in the
// diagnostics.
inline std::vector<CutCandidate> intersect_edges_with_contour(const LatticeGraph& graph,
                                                              const Polygon& contour,
                                                              int* multi_crossing_edges = nullptr) {
  validate_polygon(contour);
  if (multi_crossing_edges) *multi_crossing_edges = 0;

  std::vector<CutCandidate> out;
  const std::size_t nv = contour.size();
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Segment seg = graph.edge_segment(graph.edges[e]);
    const Point2 dir = seg.b - seg.a;
    const double len2 = dot(dir, dir);
    std::vector<double> hits;
    for (std::size_t i = 0, j = nv - 1; i < nv; j = i++) {
      const Segment side{contour[j], contour[i]};
      if (auto p = segment_intersection(seg, side)) {
        const double t = std::clamp(dot(*p - seg.a, dir) / len2, 0.0, 1.0);
        bool duplicate = false;
        for (double h : hits) {
          if (std::abs(h - t) <= 1e-9) {
            duplicate = true;
            break;
          }
        }
        if (!duplicate) hits.push_back(t);
      }
    }
    if (hits.empty()) continue;
    if (hits.size() > 1 && multi_crossing_edges) ++(*multi_crossing_edges);
    const double t = *std::min_element(hits.begin(), hits.end());
    out.push_back({static_cast<int>(e), seg.a + dir * t, t});
  }
  return out;
}

// The blade must land at least offset_coeff of the edge length away from the
// nearer node, i.e. t in [offset_coeff, 1-offset_coeff]. Out-of-band
// crossings are clamped to the nearest bound (or rejected when requested)
// and the blade angle is set perpendicular to the wall.
inline std::optional<CutPoint> enforce_offset_constraint(const CutCandidate& c,
                                                         const LatticeGraph& graph,
                                                         double offset_coeff,
                                                         bool reject_out_of_band = false) {
  if (!(offset_coeff > 0.0 && offset_coeff < 0.5)) {
    throw validation_error("offset_coeff out of range (0,0.5)");
  }
  const Edge& edge = graph.edges[static_cast<std::size_t>(c.edge)];
  const Segment seg = graph.edge_segment(edge);
  if (!(seg.length() > 0.0)) return std::nullopt;  // invariant breach upstream

  const double lo = offset_coeff;
  const double hi = 1.0 - offset_coeff;
  const bool out_of_band = c.t < lo || c.t > hi;
  if (out_of_band && reject_out_of_band) return std::nullopt;

  CutPoint cut;
  cut.edge = c.edge;
  cut.t = std::clamp(c.t, lo, hi);
  cut.clamped = out_of_band;
  cut.point = seg.a + (seg.b - seg.a) * cut.t;
  cut.angle = perpendicular_angle(seg.direction_deg());
  return cut;
}

// Greedy nearest-neighbor chain to keep blade travel short: start at the
// minimal (y, x) point, repeatedly jump to the nearest unvisited point, ties
// broken toward smaller (y, x).
inline CutPlan order_cut_points(const std::vector<CutPoint>& points) {
  CutPlan plan;
  if (points.empty()) return plan;

  auto yx_less = [&](const CutPoint& a, const CutPoint& b) {
    if (a.point.y != b.point.y) return a.point.y < b.point.y;
    return a.point.x < b.point.x;
  };

  std::vector<bool> visited(points.size(), false);
  std::size_t current = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (yx_less(points[i], points[current])) current = i;
  }
  visited[current] = true;
  plan.cuts.push_back(points[current]);

  for (std::size_t step = 1; step < points.size(); ++step) {
    std::size_t best = points.size();
    double best_dist = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (visited[i]) continue;
      const double d = distance(points[current].point, points[i].point);
      if (d < best_dist ||
          (d == best_dist && best < points.size() && yx_less(points[i], points[best]))) {
        best = i;
        best_dist = d;
      }
    }
    plan.travel_length += best_dist;
    visited[best] = true;
    plan.cuts.push_back(points[best]);
    current = best;
  }
  return plan;
}

namespace detail {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const pipeline_error&) {
    throw;
  } catch (const std::exception& e) {
    throw pipeline_error(stage, e.what());
  }
}

}  // namespace detail

// End-to-end planner over already-detected node points: graph reconstruction,
// structure-aware mask, 0.4-edge dilation, contour trace, edge crossings,
// offset enforcement, greedy ordering.
inline PlanOutcome plan_cuts(const std::vector<NodePoint>& nodes, const Polygon& target,
                             const PipelineConfig& config) {
  validate_pipeline_config(config);
  if (!polygon_is_simple(target)) throw validation_error("target polygon is not simple");

  PlanOutcome outcome;
  outcome.graph = detail::run_stage("build_graph",
                                    [&] { return build_graph(nodes, config.k, config.band); });
  const LatticeGraph& graph = outcome.graph;

  StructureMaskResult sm = detail::run_stage("structure_mask", [&] {
    return structure_mask(graph, target, RasterConfig{config.supersample, {0.0, 0.0}});
  });

  const double radius_img = graph.mean_edge_length * config.offset_coeff;
  const BinaryMask dilated = detail::run_stage("dilate", [&] {
    return dilate(sm.mask, radius_img * config.supersample);
  });

  outcome.contour = detail::run_stage("trace_contour", [&] {
    return mask_polygon_to_image(sm.rc, trace_contour(dilated));
  });

  PlanDiagnostics diag;
  const auto candidates = detail::run_stage("intersect", [&] {
    return intersect_edges_with_contour(graph, outcome.contour, &diag.multi_crossing_edges);
  });

  std::vector<CutPoint> accepted = detail::run_stage("enforce", [&] {
    std::vector<CutPoint> pts;
    pts.reserve(candidates.size());
    for (const auto& c : candidates) {
      if (auto cut = enforce_offset_constraint(c, graph, config.offset_coeff,
                                               config.reject_out_of_band)) {
        pts.push_back(*cut);
      }
    }
    return pts;
  });

  outcome.plan = detail::run_stage("order", [&] { return order_cut_points(accepted); });

  diag.nodes = static_cast<int>(graph.nodes.size());
  diag.edges = static_cast<int>(graph.edges.size());
  diag.faces_kept = static_cast<int>(sm.kept_faces.size());
  diag.candidates = static_cast<int>(candidates.size());
  for (const auto& cut : outcome.plan.cuts) diag.clamped_count += cut.clamped ? 1 : 0;
  outcome.plan.diagnostics = diag;
  outcome.plan.config_echo = config;
  return outcome;
}

// Heatmap-input variant: runs detection first, then the node-point pipeline.
inline PlanOutcome plan_cuts(const Heatmap& hm, const Polygon& target,
                             const PipelineConfig& config) {
  validate_pipeline_config(config);
  const auto nodes = detail::run_stage("detect", [&] {
    return extract_centroids(threshold_points(hm, config.tau), hm, config.min_blob_area);
  });
  return plan_cuts(nodes, target, config);
}

inline std::string config_json(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "{\"tau\":" << detail::fmt6(cfg.tau) << ",\"k\":" << cfg.k << ",\"band\":["
      << detail::fmt6(cfg.band.lo) << "," << detail::fmt6(cfg.band.hi)
      << "],\"offset_coeff\":" << detail::fmt6(cfg.offset_coeff)
      << ",\"supersample\":" << cfg.supersample << ",\"min_blob_area\":" << cfg.min_blob_area
      << ",\"rng_seed\":" << cfg.rng_seed
      << ",\"reject_out_of_band\":" << (cfg.reject_out_of_band ? "true" : "false") << "}";
  return out.str();
}

inline std::string plan_json(const CutPlan& plan, const LatticeGraph& graph) {
  std::ostringstream out;
  out << "{\"config\":" << config_json(plan.config_echo) << ",\"cuts\":[";
  for (std::size_t i = 0; i < plan.cuts.size(); ++i) {
    const auto& c = plan.cuts[i];
    const Edge& e = graph.edges[static_cast<std::size_t>(c.edge)];
    if (i) out << ",";
    out << "{\"edge\":{\"a\":" << e.a << ",\"b\":" << e.b << "},\"x\":" << detail::fmt6(c.point.x)
        << ",\"y\":" << detail::fmt6(c.point.y) << ",\"t\":" << detail::fmt6(c.t)
        << ",\"angle_deg\":" << detail::fmt6(c.angle.degrees)
        << ",\"clamped\":" << (c.clamped ? "true" : "false") << "}";
  }
  const auto& d = plan.diagnostics;
  out << "],\"travel_length_px\":" << detail::fmt6(plan.travel_length)
      << ",\"diagnostics\":{\"nodes\":" << d.nodes << ",\"edges\":" << d.edges
      << ",\"faces_kept\":" << d.faces_kept << ",\"candidates\":" << d.candidates
      << ",\"clamped_count\":" << d.clamped_count << "}}";
  return out.str();
}

namespace detail {

inline std::string svg_poly_points(const Polygon& poly) {
  std::ostringstream out;
  char buf[64];
  for (std::size_t i = 0; i < poly.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", i ? " " : "", poly[i].x, poly[i].y);
    out << buf;
  }
  return out.str();
}

}  // namespace detail

// Cut-plan picture: lattice walls in gray, target outline in green, dilated
// cut contour in blue, each cut as a short red stroke along its blade plane.
inline std::string render_plan_svg(const PlanOutcome& outcome, const Polygon& target) {
  const LatticeGraph& graph = outcome.graph;
  double min_x = 1e30, min_y = 1e30, max_x = -1e30, max_y = -1e30;
  auto grow = [&](const Point2& p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  };
  for (const auto& n : graph.nodes) grow(n.position);
  for (const auto& v : target.vertices) grow(v);
  for (const auto& v : outcome.contour.vertices) grow(v);
  const double pad = std::max(10.0, graph.mean_edge_length);

  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
                "viewBox=\"%.3f %.3f %.3f %.3f\">\n",
                min_x - pad, min_y - pad, (max_x - min_x) + 2 * pad, (max_y - min_y) + 2 * pad);
  out << buf;

  out << "  <g stroke=\"#999999\" stroke-width=\"1\">\n";
  for (const auto& e : graph.edges) {
    const Segment s = graph.edge_segment(e);
    std::snprintf(buf, sizeof(buf), "    <line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n",
                  s.a.x, s.a.y, s.b.x, s.b.y);
    out << buf;
  }
  out << "  </g>\n";

  out << "  <polygon points=\"" << detail::svg_poly_points(target)
      << "\" fill=\"none\" stroke=\"green\" stroke-width=\"1.5\"/>\n";
  out << "  <polygon points=\"" << detail::svg_poly_points(outcome.contour)
      << "\" fill=\"none\" stroke=\"blue\" stroke-width=\"1\"/>\n";

  const double half = 0.2 * std::max(graph.mean_edge_length, 1.0);
  out << "  <g stroke=\"red\" stroke-width=\"2\">\n";
  for (const auto& c : outcome.plan.cuts) {
    const double rad = c.angle.degrees * M_PI / 180.0;
    const Point2 d{std::cos(rad) * half, std::sin(rad) * half};
    std::snprintf(buf, sizeof(buf), "    <line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n",
                  c.point.x - d.x, c.point.y - d.y, c.point.x + d.x, c.point.y + d.y);
    out << buf;
  }
  out << "  </g>\n</svg>\n";
  return out.str();
}

}  // namespace hexcut
