#pragma once

#include <cstdint>
#include <fstream>
#include <queue>
#include <string>
#include <vector>

#include "hexcut/errors.hpp"
#include "hexcut/geometry.hpp"

namespace hexcut {

// Detector-output image, one node-likelihood value per pixel in [0,1]. Pixel
// (c,r) samples the image plane at the point (c, r) exactly; the synthetic
// generator uses the identical convention so round trips are exact.
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1

  static BinaryMask zeros(int width, int height) {
    BinaryMask m;
    m.width = width;
    m.height = height;
    m.bits.assign(static_cast<std::size_t>(width) * height, 0);
    return m;
  }

  bool test(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
};

// A detected lattice node: dense id, sub-pixel position, peak blob score.
struct NodePoint {
  int id = 0;
  Point2 position;
  double score = 0.0;
};

namespace detail {

inline int pgm_read_token(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comment lines, then reads one decimal integer.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) {
    throw validation_error("malformed PGM header in '" + path + "'");
  }
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 30) throw validation_error("malformed PGM header in '" + path + "'");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return static_cast<int>(value);
}

}  // namespace detail

// Reads an 8-bit binary PGM (P5, maxval 255) and scales bytes to [0,1].
// This is the ingestion boundary standing in for the upstream detector.
inline Heatmap load_heatmap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw validation_error("unsupported format in '" + path + "': expected P5");
  }
  const int width = detail::pgm_read_token(in, path);
  const int height = detail::pgm_read_token(in, path);
  const int maxval = detail::pgm_read_token(in, path);
  if (width < 1 || height < 1) throw validation_error("malformed PGM header in '" + path + "'");
  if (maxval != 255) {
    throw validation_error("unsupported PGM maxval " + std::to_string(maxval) + " in '" + path +
                           "': expected 255");
  }
  in.get();  // single whitespace byte separating header from payload

  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw validation_error("truncated PGM payload in '" + path + "'");
  }

  Heatmap hm;
  hm.width = width;
  hm.height = height;
  hm.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) hm.values[i] = raw[i] / 255.0;
  return hm;
}

inline void save_heatmap_pgm(const Heatmap& hm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << "P5\n" << hm.width << " " << hm.height << "\n255\n";
  std::vector<std::uint8_t> raw(hm.values.size());
  for (std::size_t i = 0; i < hm.values.size(); ++i) {
    double v = hm.values[i];
    v = std::clamp(v, 0.0, 1.0);
    raw[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw io_error("cannot write '" + path + "'");
}

inline void save_mask_pgm(const BinaryMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  std::vector<std::uint8_t> raw(mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i) raw[i] = mask.bits[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw io_error("cannot write '" + path + "'");
}

// Keeps pixels whose brightness strictly exceeds tau (default 0.3), dropping
// low-confidence detections.
inline BinaryMask threshold_points(const Heatmap& hm, double tau = 0.3) {
  if (!(tau >= 0.0 && tau < 1.0)) throw validation_error("tau out of range [0,1)");
  BinaryMask mask = BinaryMask::zeros(hm.width, hm.height);
  for (std::size_t i = 0; i < hm.values.size(); ++i) {
    mask.bits[i] = hm.values[i] > tau ? 1 : 0;
  }
  return mask;
}

// One node per 8-connected blob: position is the centroid of the blob's pixel
// centers (intensity-weighted when requested), score the peak heatmap value.
// Blobs smaller than min_blob_area are treated as noise. Output is sorted by
// (y, x) and ids assigned in that order.
inline std::vector<NodePoint> extract_centroids(const BinaryMask& mask, const Heatmap& hm,
                                                int min_blob_area = 2,
                                                bool intensity_weighted = false) {
  if (mask.width != hm.width || mask.height != hm.height) {
    throw validation_error("mask and heatmap dimensions differ");
  }

  const int w = mask.width;
  const int h = mask.height;
  std::vector<std::uint8_t> visited(mask.bits.size(), 0);
  std::vector<NodePoint> nodes;

  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t idx0 = static_cast<std::size_t>(y0) * w + x0;
      if (!mask.bits[idx0] || visited[idx0]) continue;

      stack.clear();
      stack.emplace_back(x0, y0);
      visited[idx0] = 1;
      double sx = 0.0, sy = 0.0, sw = 0.0;
      double peak = 0.0;
      int area = 0;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        const double v = hm.at(x, y);
        const double wgt = intensity_weighted ? v : 1.0;
        sx += wgt * x;
        sy += wgt * y;
        sw += wgt;
        peak = std::max(peak, v);
        ++area;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
            if (mask.bits[nidx] && !visited[nidx]) {
              visited[nidx] = 1;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }

      if (area < min_blob_area || sw <= 0.0) continue;
      NodePoint np;
      np.position = {sx / sw, sy / sw};
      np.score = peak;
      nodes.push_back(np);
    }
  }

  std::sort(nodes.begin(), nodes.end(), [](const NodePoint& a, const NodePoint& b) {
    if (a.position.y != b.position.y) return a.position.y < b.position.y;
    return a.position.x < b.position.x;
  });
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].id = static_cast<int>(i);
  return nodes;
}

}  // namespace hexcut
