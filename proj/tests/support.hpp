#pragma once

// Independent oracles and random generators shared by the unit and acceptance
// suites. Nothing here calls the library routine it is used to check.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ooro/annotations.hpp"
#include "ooro/geometry.hpp"
#include "ooro/metrics.hpp"
#include "ooro/occlusion.hpp"

namespace ooro::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(OORO_FIXTURE_DIR) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ooro_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

using Grid = std::vector<std::vector<bool>>;  // [row][col]

/// Column-major alternating run lengths, zeros first.
inline std::vector<std::uint32_t> reference_rle_encode(const Grid& g, int height, int width) {
  std::vector<std::uint32_t> counts;
  bool current = false;
  std::uint32_t run = 0;
  for (int c = 0; c < width; ++c) {
    for (int r = 0; r < height; ++r) {
      if (g[r][c] != current) {
        counts.push_back(run);
        run = 0;
        current = !current;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

/// COCO compact string form of RLE counts.
inline std::string reference_rle_string(const std::vector<std::uint32_t>& counts) {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t x = counts[i];
    if (i > 2) x -= std::int64_t(counts[i - 2]);
    bool more = true;
    while (more) {
      std::int64_t c = x & 0x1f;
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      out.push_back(char(c + 48));
    }
  }
  return out;
}

/// Crossing-number test of a point against one polygon ring.
inline bool point_in_polygon(const std::vector<double>& xy, double px, double py) {
  const std::size_t n = xy.size() / 2;
  bool inside = false;
  for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
    double xa = xy[2 * a], ya = xy[2 * a + 1];
    double xb = xy[2 * b], yb = xy[2 * b + 1];
    if (yb < ya) {
      std::swap(xa, xb);
      std::swap(ya, yb);
    }
    if ((ya > py) != (yb > py)) {
      const double xc = xa + (py - ya) * (xb - xa) / (yb - ya);
      if (xc > px) inside = !inside;
    }
  }
  return inside;
}

inline Grid brute_force_raster(const std::vector<std::vector<double>>& parts, int height, int width) {
  Grid g(height, std::vector<bool>(width, false));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (const auto& part : parts) {
        if (point_in_polygon(part, c + 0.5, r + 0.5)) g[r][c] = true;
      }
    }
  }
  return g;
}

inline Grid decode_counts_by_hand(const std::vector<std::uint32_t>& counts, int height, int width) {
  Grid g(height, std::vector<bool>(width, false));
  std::size_t pos = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::uint32_t t = 0; t < counts[k]; ++t, ++pos) {
      if (k % 2 == 1) g[pos % height][pos / height] = true;
    }
  }
  return g;
}

inline Grid grid_of(const BinaryMask& m) {
  Grid g(m.rows(), std::vector<bool>(m.cols(), false));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) g[r][c] = m(r, c);
  return g;
}

/// Correct / total over ordered pairs, enumerated directly.
inline std::pair<std::size_t, std::size_t> brute_force_accuracy(const OcclusionRelations& pred,
                                                                const OcclusionRelations& gt,
                                                                PairMode mode) {
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < gt.n(); ++i) {
    for (std::size_t j = 0; j < gt.n(); ++j) {
      if (i == j) continue;
      if (mode == PairMode::GtOccluded && !gt.occludes(i, j) && !gt.occludes(j, i)) continue;
      ++total;
      if (pred.occludes(i, j) == gt.occludes(i, j)) ++correct;
    }
  }
  return {correct, total};
}

inline OcclusionRelations random_relations(std::mt19937& rng, std::size_t n, double density = 0.3) {
  std::bernoulli_distribution edge(density);
  OcclusionRelations r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && edge(rng)) r.set_occludes(i, j);
  return r;
}

inline Scene random_label_scene(std::mt19937& rng, std::size_t n) {
  static const std::vector<std::string> pool = {"person", "bottle", "traffic light", "cup",
                                                "dining table", "clock", "tv", "building"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<InstanceRef> instances(n);
  for (auto& inst : instances) inst.category = pool[pick(rng)];
  Scene scene;
  scene.instances = assign_display_names(std::move(instances));
  scene.ground_truth = OcclusionRelations(n);
  return scene;
}

/// Raw instance description used to build both a library Scene and the oracle's view of it.
struct SyntheticInstance {
  BBox bbox;
  bool has_mask{true};
  bool as_rle{false};
  std::vector<std::vector<double>> polygon;  // when !as_rle
  std::vector<std::uint32_t> counts;         // when as_rle
};

struct SyntheticScene {
  int height{0};
  int width{0};
  std::vector<SyntheticInstance> instances;
};

inline SyntheticScene random_synthetic_scene(std::mt19937& rng) {
  SyntheticScene s;
  std::uniform_int_distribution<int> dim(4, 32);
  s.height = dim(rng);
  s.width = dim(rng);
  std::uniform_int_distribution<int> count(2, 5);
  const int n = count(rng);
  std::uniform_real_distribution<double> ux(0, s.width), uy(0, s.height);
  std::uniform_int_distribution<int> coin(0, 3);
  for (int k = 0; k < n; ++k) {
    SyntheticInstance inst;
    inst.has_mask = coin(rng) != 0 || k == 0;
    if (coin(rng) == 0) {
      inst.as_rle = true;
      std::bernoulli_distribution bit(0.5);
      Grid g(s.height, std::vector<bool>(s.width));
      for (auto& row : g)
        for (auto&& b : row) b = bit(rng);
      inst.counts = reference_rle_encode(g, s.height, s.width);
    } else {
      std::uniform_int_distribution<int> verts(3, 6);
      std::vector<double> ring;
      for (int v = verts(rng); v > 0; --v) {
        ring.push_back(std::round(ux(rng) * 2) / 2);
        ring.push_back(std::round(uy(rng) * 2) / 2);
      }
      inst.polygon.push_back(ring);
      if (coin(rng) == 0) {
        inst.polygon.push_back({ux(rng), uy(rng), ux(rng), uy(rng), ux(rng), uy(rng)});
      }
    }
    // Integer boxes most of the time, fractional ones occasionally.
    double x0 = std::floor(ux(rng)), y0 = std::floor(uy(rng));
    double x1 = std::floor(ux(rng)), y1 = std::floor(uy(rng));
    if (coin(rng) == 0) {
      x0 = ux(rng);
      y0 = uy(rng);
    }
    inst.bbox = BBox{std::min(x0, x1), std::min(y0, y1), std::abs(x1 - x0) + 1, std::abs(y1 - y0) + 1};
    s.instances.push_back(std::move(inst));
  }
  return s;
}

inline Scene to_scene(const SyntheticScene& s) {
  Scene scene;
  scene.height = s.height;
  scene.width = s.width;
  for (const auto& si : s.instances) {
    InstanceRef inst;
    inst.category = "thing";
    inst.bbox = si.bbox;
    if (si.has_mask) {
      if (si.as_rle) {
        inst.segmentation = RleSegmentation{s.height, s.width, si.counts};
      } else {
        inst.segmentation = PolygonSegmentation{si.polygon};
      }
    }
    scene.instances.push_back(std::move(inst));
  }
  scene.instances = assign_display_names(std::move(scene.instances));
  scene.ground_truth = OcclusionRelations(scene.instances.size());
  return scene;
}

/// Rasterize every mask by brute force, count set pixels whose centers lie in
/// the boxes' overlap rectangle, and let the larger count occlude.
inline OcclusionRelations bbbd_oracle(const SyntheticScene& s) {
  const std::size_t n = s.instances.size();
  std::vector<Grid> grids;
  for (const auto& si : s.instances) {
    grids.push_back(si.as_rle ? decode_counts_by_hand(si.counts, s.height, s.width)
                              : brute_force_raster(si.polygon, s.height, s.width));
  }
  OcclusionRelations out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const BBox& a = s.instances[i].bbox;
      const BBox& b = s.instances[j].bbox;
      const double x0 = std::max(a.x, b.x), x1 = std::min(a.x + a.w, b.x + b.w);
      const double y0 = std::max(a.y, b.y), y1 = std::min(a.y + a.h, b.y + b.h);
      if (x1 <= x0 || y1 <= y0) continue;
      if (!s.instances[i].has_mask || !s.instances[j].has_mask) continue;
      long ci = 0, cj = 0;
      for (int r = 0; r < s.height; ++r) {
        for (int c = 0; c < s.width; ++c) {
          const double px = c + 0.5, py = r + 0.5;
          if (px < x0 || px >= x1 || py < y0 || py >= y1) continue;
          ci += grids[i][r][c];
          cj += grids[j][r][c];
        }
      }
      if (ci > cj) out.set_occludes(i, j);
      if (cj > ci) out.set_occludes(j, i);
    }
  }
  return out;
}

}  // namespace ooro::testing
