// hexcut: honeycomb block cut planning from detector heatmaps.
//
// Subcommands mirror the pipeline stages so any stage can be swapped for a
// real detector's output: synth -> detect -> graph -> plan/render, all
// communicating through PGM and JSON files.
// Exit codes: 0 ok, 2 usage/validation, 3 pipeline stage failure, 4 I/O.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hexcut/cut_planner.hpp"
#include "hexcut/errors.hpp"
#include "hexcut/geometry.hpp"
#include "hexcut/heatmap.hpp"
#include "hexcut/lattice_graph.hpp"
#include "hexcut/mask_morphology.hpp"
#include "hexcut/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitPipeline = 3;
constexpr int kExitIo = 4;

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hexcut::io_error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw hexcut::validation_error("malformed JSON in '" + path + "': " + e.what());
  }
}

std::vector<hexcut::NodePoint> load_nodes_json(const std::string& path) {
  const auto j = load_json_file(path);
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array()) {
    throw hexcut::validation_error("'" + path + "' has no \"nodes\" array");
  }
  std::vector<hexcut::NodePoint> nodes;
  nodes.reserve(j["nodes"].size());
  for (const auto& n : j["nodes"]) {
    hexcut::NodePoint np;
    np.id = n.at("id").get<int>();
    np.position = {n.at("x").get<double>(), n.at("y").get<double>()};
    np.score = n.value("score", 1.0);
    nodes.push_back(np);
  }
  return nodes;
}

hexcut::Polygon load_target_json(const std::string& path) {
  const auto j = load_json_file(path);
  if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array()) {
    throw hexcut::validation_error("'" + path + "' has no \"vertices\" array");
  }
  hexcut::Polygon poly;
  for (const auto& v : j["vertices"]) {
    if (!v.is_array() || v.size() != 2) {
      throw hexcut::validation_error("'" + path + "': vertices must be [x,y] pairs");
    }
    poly.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  hexcut::validate_polygon(poly);
  if (!hexcut::polygon_is_simple(poly)) {
    throw hexcut::validation_error("'" + path + "': target polygon is not simple");
  }
  return poly;
}

struct SynthArgs {
  int rows = 8;
  int cols = 8;
  double edge_len = 40.0;
  double sigma = 2.0;
  double jitter_sigma = 0.0;
  int dent_count = 0;
  double dent_magnitude = 0.0;
  double dropout_prob = 0.0;
  std::uint64_t seed = 0;
  std::string out_lattice = "lattice.json";
  std::string out_heatmap = "heatmap.pgm";
};

int run_synth(const SynthArgs& a) {
  const double pad = std::ceil(3.0 * a.sigma) + 8.0;
  auto lat = hexcut::generate_lattice(a.rows, a.cols, a.edge_len, {pad, pad});
  const hexcut::DefectSpec defects{a.jitter_sigma, a.dent_count, a.dent_magnitude,
                                   a.dropout_prob};
  lat = hexcut::apply_defects(lat, defects, a.seed);

  const auto [width, height] = hexcut::suggest_image_size(lat, a.sigma);
  const auto hm = hexcut::render_heatmap(lat, a.sigma, width, height);

  hexcut::save_text_file(hexcut::lattice_json(lat), a.out_lattice);
  hexcut::save_heatmap_pgm(hm, a.out_heatmap);
  std::cout << "lattice: " << lat.nodes.size() << " nodes, " << lat.adjacency.size()
            << " edges, " << lat.faces.size() << " faces\n"
            << "heatmap: " << width << "x" << height << " -> " << a.out_heatmap << "\n";
  return kExitOk;
}

int run_detect(const std::string& in, double tau, int min_blob_area, const std::string& out) {
  const auto hm = hexcut::load_heatmap(in);
  const auto mask = hexcut::threshold_points(hm, tau);
  const auto nodes = hexcut::extract_centroids(mask, hm, min_blob_area);
  hexcut::save_text_file("{\"nodes\":" + hexcut::nodes_json(nodes) + "}", out);
  std::cout << "detected " << nodes.size() << " node points -> " << out << "\n";
  return kExitOk;
}

int run_graph(const std::string& in, int k, double band_lo, double band_hi,
              const std::string& out) {
  const auto nodes = load_nodes_json(in);
  const auto graph = hexcut::build_graph(nodes, k, {band_lo, band_hi});
  hexcut::save_text_file(hexcut::graph_json(graph), out);
  std::cout << "graph: " << graph.nodes.size() << " nodes, " << graph.edges.size()
            << " edges, mean_knn_distance " << graph.mean_knn_distance << ", mean_edge_length "
            << graph.mean_edge_length << " -> " << out << "\n";
  return kExitOk;
}

struct PlanArgs {
  std::string nodes_path;
  std::string heatmap_path;
  std::string target_path;
  std::string out_plan;
  std::string out_svg;
  hexcut::PipelineConfig config;
};

hexcut::PlanOutcome run_pipeline(const PlanArgs& a, const hexcut::Polygon& target) {
  if (!a.heatmap_path.empty()) {
    return hexcut::plan_cuts(hexcut::load_heatmap(a.heatmap_path), target, a.config);
  }
  return hexcut::plan_cuts(load_nodes_json(a.nodes_path), target, a.config);
}

int run_plan(const PlanArgs& a) {
  const auto target = load_target_json(a.target_path);
  const auto outcome = run_pipeline(a, target);
  hexcut::save_text_file(hexcut::plan_json(outcome.plan, outcome.graph), a.out_plan);
  if (!a.out_svg.empty()) {
    hexcut::save_text_file(hexcut::render_plan_svg(outcome, target), a.out_svg);
  }
  std::cout << "plan: " << outcome.plan.cuts.size() << " cuts ("
            << outcome.plan.diagnostics.clamped_count << " clamped), travel "
            << outcome.plan.travel_length << " px -> " << a.out_plan << "\n";
  return kExitOk;
}

int run_render(const PlanArgs& a) {
  const auto target = load_target_json(a.target_path);
  const auto outcome = run_pipeline(a, target);
  hexcut::save_text_file(hexcut::render_plan_svg(outcome, target), a.out_svg);
  std::cout << "rendered " << outcome.plan.cuts.size() << " cuts -> " << a.out_svg << "\n";
  return kExitOk;
}

void add_config_flags(CLI::App* cmd, hexcut::PipelineConfig& cfg) {
  cmd->add_option("--tau", cfg.tau, "Detection threshold, strict")->capture_default_str();
  cmd->add_option("--k", cfg.k, "Nearest neighbors for the mean distance")
      ->capture_default_str();
  cmd->add_option("--band-lo", cfg.band.lo, "Neighbor band lower ratio")->capture_default_str();
  cmd->add_option("--band-hi", cfg.band.hi, "Neighbor band upper ratio")->capture_default_str();
  cmd->add_option("--offset-coeff", cfg.offset_coeff,
                  "Minimum cut offset as a fraction of edge length")
      ->capture_default_str();
  cmd->add_option("--supersample", cfg.supersample, "Mask pixels per image pixel")
      ->capture_default_str();
  cmd->add_option("--min-blob-area", cfg.min_blob_area, "Minimum blob area in pixels")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.rng_seed, "Seed echoed into the plan config")
      ->capture_default_str();
  cmd->add_flag("--reject-clamped", cfg.reject_out_of_band,
                "Reject out-of-band crossings instead of clamping");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hexcut: cut planning for hexagonal honeycomb blocks"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic lattice and heatmap");
  cmd_synth->add_option("--rows", synth.rows, "Cell rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_synth->add_option("--cols", synth.cols, "Cell columns")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_synth->add_option("--edge-len", synth.edge_len, "Edge length, px")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_synth->add_option("--sigma", synth.sigma, "Gaussian blob sigma, px")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_synth->add_option("--jitter-sigma", synth.jitter_sigma, "Node jitter sigma, px")
      ->capture_default_str();
  cmd_synth->add_option("--dent-count", synth.dent_count, "Number of dented nodes")
      ->capture_default_str();
  cmd_synth->add_option("--dent-magnitude", synth.dent_magnitude, "Dent displacement, px")
      ->capture_default_str();
  cmd_synth->add_option("--dropout-prob", synth.dropout_prob, "Node dropout probability")
      ->capture_default_str();
  cmd_synth->add_option("--seed", synth.seed, "Defect RNG seed")->capture_default_str();
  cmd_synth->add_option("--out-lattice", synth.out_lattice, "Lattice JSON path")
      ->capture_default_str();
  cmd_synth->add_option("--out-heatmap", synth.out_heatmap, "Heatmap PGM path")
      ->capture_default_str();

  std::string detect_in, detect_out = "nodes.json";
  double detect_tau = 0.3;
  int detect_min_blob = 2;
  auto* cmd_detect = app.add_subcommand("detect", "Extract node points from a heatmap PGM");
  cmd_detect->add_option("--in", detect_in, "Input heatmap PGM")->required();
  cmd_detect->add_option("--tau", detect_tau, "Detection threshold, strict")
      ->capture_default_str();
  cmd_detect->add_option("--min-blob-area", detect_min_blob, "Minimum blob area in pixels")
      ->capture_default_str();
  cmd_detect->add_option("--out", detect_out, "Output nodes JSON")->capture_default_str();

  std::string graph_in, graph_out = "graph.json";
  int graph_k = 3;
  double graph_lo = 0.5, graph_hi = 1.3;
  auto* cmd_graph = app.add_subcommand("graph", "Reconstruct lattice edges from node points");
  cmd_graph->add_option("--in", graph_in, "Input nodes JSON")->required();
  cmd_graph->add_option("--k", graph_k, "Nearest neighbors for the mean distance")
      ->capture_default_str();
  cmd_graph->add_option("--band-lo", graph_lo, "Neighbor band lower ratio")
      ->capture_default_str();
  cmd_graph->add_option("--band-hi", graph_hi, "Neighbor band upper ratio")
      ->capture_default_str();
  cmd_graph->add_option("--out", graph_out, "Output graph JSON")->capture_default_str();

  PlanArgs plan;
  plan.out_plan = "plan.json";
  auto* cmd_plan = app.add_subcommand("plan", "Compute the ordered cut plan");
  auto* plan_nodes = cmd_plan->add_option("--nodes", plan.nodes_path, "Input nodes JSON");
  auto* plan_hm = cmd_plan->add_option("--heatmap", plan.heatmap_path, "Input heatmap PGM");
  plan_nodes->excludes(plan_hm);
  cmd_plan->add_option("--target", plan.target_path, "Target polygon JSON")->required();
  cmd_plan->add_option("--out", plan.out_plan, "Output plan JSON")->capture_default_str();
  cmd_plan->add_option("--svg", plan.out_svg, "Optional SVG render path");
  add_config_flags(cmd_plan, plan.config);

  PlanArgs render;
  render.out_svg = "plan.svg";
  auto* cmd_render = app.add_subcommand("render", "Render the cut plan as SVG");
  auto* render_nodes = cmd_render->add_option("--nodes", render.nodes_path, "Input nodes JSON");
  auto* render_hm = cmd_render->add_option("--heatmap", render.heatmap_path, "Input heatmap PGM");
  render_nodes->excludes(render_hm);
  cmd_render->add_option("--target", render.target_path, "Target polygon JSON")->required();
  cmd_render->add_option("--out", render.out_svg, "Output SVG path")->capture_default_str();
  add_config_flags(cmd_render, render.config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cmd_synth->parsed()) return run_synth(synth);
    if (cmd_detect->parsed()) return run_detect(detect_in, detect_tau, detect_min_blob, detect_out);
    if (cmd_graph->parsed()) return run_graph(graph_in, graph_k, graph_lo, graph_hi, graph_out);
    if (cmd_plan->parsed()) {
      if (plan.nodes_path.empty() && plan.heatmap_path.empty()) {
        std::cerr << "error: plan requires --nodes or --heatmap\n";
        return kExitUsage;
      }
      return run_plan(plan);
    }
    if (cmd_render->parsed()) {
      if (render.nodes_path.empty() && render.heatmap_path.empty()) {
        std::cerr << "error: render requires --nodes or --heatmap\n";
        return kExitUsage;
      }
      return run_render(render);
    }
  } catch (const hexcut::pipeline_error& e) {
    std::cerr << "error at stage " << e.stage() << ": " << e.what() << "\n";
    return kExitPipeline;
  } catch (const hexcut::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const hexcut::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
