// Copyright 2026 The LiMA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lima/division.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "lima/errors.hpp"

namespace lima {

Division divide_grid(const RasterImage& image, std::size_t rows, std::size_t cols) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  if (rows < 1 || cols < 1 || rows * cols < 2) {
    throw InvalidArgument("grid division needs rows, cols >= 1 and at least two patches");
  }
  if (rows * cols > h * w || rows > h || cols > w) {
    throw InvalidArgument("grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " does not fit a " + std::to_string(h) + "x" + std::to_string(w) +
                          " image");
  }
  const std::size_t cell_h = h / rows;
  const std::size_t cell_w = w / cols;
  std::vector<RegionId> labels(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t r = std::min(y / cell_h, rows - 1);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t c = std::min(x / cell_w, cols - 1);
      labels[y * w + x] = static_cast<RegionId>(r * cols + c);
    }
  }
  return division_from_labels(h, w, labels, DivisionMethod::kGrid);
}

void rgb_to_lab(float r, float g, float b, double& l, double& a, double& bb) {
  auto linear = [](double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double rl = linear(r), gl = linear(g), bl = linear(b);
  double x = (0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl) / 0.950456;
  double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  double z = (0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl) / 1.088754;
  auto f = [](double t) {
    constexpr double eps = 0.008856;
    constexpr double kappa = 903.3;
    return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
  };
  const double fx = f(x), fy = f(y), fz = f(z);
  l = 116.0 * fy - 16.0;
  a = 500.0 * (fx - fy);
  bb = 200.0 * (fy - fz);
}

namespace {

constexpr int kSlicIterations = 10;

bool is_flat(const RasterImage& image) {
  const auto data = image.data();
  const std::size_t c = image.channels();
  for (std::size_t i = c; i < data.size(); ++i) {
    if (data[i] != data[i % c]) return false;
  }
  return true;
}

Division square_grid_fallback(const RasterImage& image, std::size_t target) {
  std::size_t side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(target))));
  std::size_t rows = std::max<std::size_t>(side, 1);
  std::size_t cols = rows;
  if (rows * cols < 2) cols = 2;
  rows = std::min(rows, image.height());
  cols = std::min(cols, image.width());
  auto grid = divide_grid(image, rows, cols);
  return Division(grid.height(), grid.width(), grid.regions(),
                  DivisionMethod::kSuperpixelGridFallback);
}

struct Cluster {
  double l, a, b, y, x;
};

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
};

// Splits the cluster map into 4-connected components and folds every orphan (any
// component but its cluster's largest) into its largest adjacent component,
// smallest first.
std::vector<RegionId> enforce_connectivity(const std::vector<int>& cluster_of, std::size_t h,
                                           std::size_t w) {
  const std::size_t n = h * w;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> comp(n, kNone);
  std::vector<std::size_t> comp_size;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] != kNone) continue;
    const std::size_t id = comp_size.size();
    comp_size.push_back(0);
    comp[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++comp_size[id];
      const std::size_t y = p / w, x = p % w;
      auto visit = [&](std::size_t q) {
        if (comp[q] == kNone && cluster_of[q] == cluster_of[p]) {
          comp[q] = id;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
  }

  const std::size_t m = comp_size.size();
  std::vector<bool> anchor(m, false);
  {
    std::vector<std::size_t> best_comp;
    for (std::size_t p = 0; p < n; ++p) {
      const auto k = static_cast<std::size_t>(cluster_of[p]);
      if (k >= best_comp.size()) best_comp.resize(k + 1, kNone);
      const std::size_t c = comp[p];
      if (best_comp[k] == kNone || comp_size[c] > comp_size[best_comp[k]]) best_comp[k] = c;
    }
    for (std::size_t c : best_comp) {
      if (c != kNone) anchor[c] = true;
    }
  }
  std::vector<std::vector<std::size_t>> adjacent(m);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t x = p % w;
    if (x + 1 < w && comp[p] != comp[p + 1]) {
      adjacent[comp[p]].push_back(comp[p + 1]);
      adjacent[comp[p + 1]].push_back(comp[p]);
    }
    if (p + w < n && comp[p] != comp[p + w]) {
      adjacent[comp[p]].push_back(comp[p + w]);
      adjacent[comp[p + w]].push_back(comp[p]);
    }
  }

  std::vector<std::size_t> by_size(m);
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(),
                   [&](std::size_t a, std::size_t b) { return comp_size[a] < comp_size[b]; });

  UnionFind uf(m);
  std::vector<std::size_t> size = comp_size;
  std::vector<std::vector<std::size_t>> members(m);
  for (std::size_t i = 0; i < m; ++i) members[i] = {i};
  for (std::size_t c : by_size) {
    const std::size_t root = uf.find(c);
    if (root != c || anchor[c]) continue;
    std::size_t best = kNone;
    for (std::size_t member : members[root]) {
      for (std::size_t nb : adjacent[member]) {
        const std::size_t r = uf.find(nb);
        if (r == root) continue;
        if (best == kNone || size[r] > size[best] || (size[r] == size[best] && r < best)) {
          best = r;
        }
      }
    }
    if (best == kNone) continue;  // the whole image is one component
    uf.parent[root] = best;
    size[best] += size[root];
    members[best].insert(members[best].end(), members[root].begin(), members[root].end());
    members[root].clear();
  }

  // Relabel in raster order of first appearance.
  std::vector<RegionId> labels(n);
  std::vector<std::size_t> remap(m, kNone);
  RegionId next = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t r = uf.find(comp[p]);
    if (remap[r] == kNone) remap[r] = next++;
    labels[p] = static_cast<RegionId>(remap[r]);
  }
  return labels;
}

}  // namespace

Division divide_superpixel(const RasterImage& image, std::size_t target_regions,
                           std::uint64_t seed) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const std::size_t n = h * w;
  if (target_regions < 2 || target_regions > n / 4) {
    throw InvalidArgument("superpixel target must lie in [2, pixels/4], got " +
                          std::to_string(target_regions));
  }
  if (is_flat(image)) return square_grid_fallback(image, target_regions);

  std::vector<double> lab(n * 3);
  for (std::size_t p = 0; p < n; ++p) {
    float r, g, b;
    if (image.channels() == 3) {
      r = image.data()[p * 3];
      g = image.data()[p * 3 + 1];
      b = image.data()[p * 3 + 2];
    } else {
      r = g = b = image.data()[p];
    }
    rgb_to_lab(r, g, b, lab[p * 3], lab[p * 3 + 1], lab[p * 3 + 2]);
  }

  // Seed grid: rows near h/S, columns making rows x cols closest to the target.
  const double ideal = std::sqrt(static_cast<double>(n) / static_cast<double>(target_regions));
  std::size_t grid_rows = 1;
  std::size_t grid_cols = target_regions;
  {
    const double rows_f = static_cast<double>(h) / ideal;
    std::size_t best_gap = std::numeric_limits<std::size_t>::max();
    for (auto rows : {static_cast<std::size_t>(std::floor(rows_f)),
                      static_cast<std::size_t>(std::ceil(rows_f))}) {
      rows = std::clamp<std::size_t>(rows, 1, h);
      const std::size_t cols = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::lround(static_cast<double>(target_regions) / rows)), 1, w);
      const std::size_t count = rows * cols;
      const std::size_t gap = count > target_regions ? count - target_regions : target_regions - count;
      if (gap < best_gap) {
        best_gap = gap;
        grid_rows = rows;
        grid_cols = cols;
      }
    }
  }
  const double step = std::sqrt(static_cast<double>(n) / static_cast<double>(grid_rows * grid_cols));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.25 * step, 0.25 * step);
  std::vector<Cluster> clusters;
  clusters.reserve(grid_rows * grid_cols);
  for (std::size_t r = 0; r < grid_rows; ++r) {
    for (std::size_t c = 0; c < grid_cols; ++c) {
      double cy = (r + 0.5) * static_cast<double>(h) / grid_rows;
      double cx = (c + 0.5) * static_cast<double>(w) / grid_cols;
      if (seed != 0) {
        cy += jitter(rng);
        cx += jitter(rng);
      }
      const auto py = static_cast<std::size_t>(std::clamp(cy, 0.0, h - 1.0));
      const auto px = static_cast<std::size_t>(std::clamp(cx, 0.0, w - 1.0));
      const std::size_t p = py * w + px;
      clusters.push_back({lab[p * 3], lab[p * 3 + 1], lab[p * 3 + 2], cy, cx});
    }
  }

  const std::size_t k = clusters.size();
  const double inv_xy = 1.0 / (step * step);
  std::vector<double> max_lab(k, 100.0);
  std::vector<int> cluster_of(n, -1);
  std::vector<double> best(n);
  std::vector<double> dist_lab(n);
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(step));

  for (int iter = 0; iter < kSlicIterations; ++iter) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    std::fill(cluster_of.begin(), cluster_of.end(), -1);
    for (std::size_t j = 0; j < k; ++j) {
      const auto& cl = clusters[j];
      const auto cy = static_cast<std::ptrdiff_t>(std::lround(cl.y));
      const auto cx = static_cast<std::ptrdiff_t>(std::lround(cl.x));
      const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, cy - radius);
      const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(h - 1, cy + radius);
      const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, cx - radius);
      const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(w - 1, cx + radius);
      for (std::ptrdiff_t y = y0; y <= y1; ++y) {
        for (std::ptrdiff_t x = x0; x <= x1; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
          const double dl = lab[p * 3] - cl.l;
          const double da = lab[p * 3 + 1] - cl.a;
          const double db = lab[p * 3 + 2] - cl.b;
          const double dy = y - cl.y;
          const double dx = x - cl.x;
          const double dc = dl * dl + da * da + db * db;
          const double d = dc / max_lab[j] + (dy * dy + dx * dx) * inv_xy;
          if (d < best[p]) {
            best[p] = d;
            cluster_of[p] = static_cast<int>(j);
            dist_lab[p] = dc;
          }
        }
      }
    }

    // Pixels outside every search window go to the spatially nearest center.
    for (std::size_t p = 0; p < n; ++p) {
      if (cluster_of[p] >= 0) continue;
      const double y = static_cast<double>(p / w), x = static_cast<double>(p % w);
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = (y - clusters[j].y) * (y - clusters[j].y) +
                         (x - clusters[j].x) * (x - clusters[j].x);
        if (d < nearest) {
          nearest = d;
          cluster_of[p] = static_cast<int>(j);
        }
      }
      const auto& cl = clusters[cluster_of[p]];
      const double dl = lab[p * 3] - cl.l, da = lab[p * 3 + 1] - cl.a, db = lab[p * 3 + 2] - cl.b;
      dist_lab[p] = dl * dl + da * da + db * db;
    }

    // SLICO: each cluster normalizes color distance by its own largest one.
    std::vector<double> next_max(k, 0.0);
    std::vector<Cluster> sum(k, Cluster{0, 0, 0, 0, 0});
    std::vector<std::size_t> count(k, 0);
    for (std::size_t p = 0; p < n; ++p) {
      const auto j = static_cast<std::size_t>(cluster_of[p]);
      next_max[j] = std::max(next_max[j], dist_lab[p]);
      sum[j].l += lab[p * 3];
      sum[j].a += lab[p * 3 + 1];
      sum[j].b += lab[p * 3 + 2];
      sum[j].y += static_cast<double>(p / w);
      sum[j].x += static_cast<double>(p % w);
      ++count[j];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (count[j] == 0) continue;
      const double inv = 1.0 / static_cast<double>(count[j]);
      clusters[j] = {sum[j].l * inv, sum[j].a * inv, sum[j].b * inv, sum[j].y * inv,
                     sum[j].x * inv};
      max_lab[j] = std::max(next_max[j], 1e-12);
    }
  }

  auto labels = enforce_connectivity(cluster_of, h, w);
  const RegionId count = *std::max_element(labels.begin(), labels.end()) + 1;
  if (count < 2) return square_grid_fallback(image, target_regions);
  return division_from_labels(h, w, labels, DivisionMethod::kSuperpixel);
}

Division resolve_imported_masks(std::size_t height, std::size_t width,
                                std::span<const RegionMask> masks, double delete_threshold) {
  if (!(delete_threshold >= 0.0 && delete_threshold < 0.5)) {
    throw InvalidArgument("delete threshold must lie in [0, 0.5)");
  }
  const std::size_t n = height * width;
  std::vector<std::vector<std::uint8_t>> bits;
  std::vector<std::size_t> area;
  bits.reserve(masks.size());
  for (const auto& m : masks) {
    if (m.height() != height || m.width() != width) {
      throw InvalidArgument("imported mask dimensions do not match the image");
    }
    bits.push_back(m.bits());
    area.push_back(m.area());
  }

  for (std::size_t i = 0; i + 1 < bits.size(); ++i) {
    for (std::size_t j = i + 1; j < bits.size(); ++j) {
      std::vector<std::uint32_t> inter;
      for (std::size_t p = 0; p < n; ++p) {
        if (bits[i][p] != 0 && bits[j][p] != 0) inter.push_back(static_cast<std::uint32_t>(p));
      }
      if (inter.empty()) continue;
      const std::size_t target = area[i] > area[j] ? i : j;
      for (auto p : inter) bits[target][p] = 0;
      area[target] -= inter.size();
    }
  }

  std::vector<RegionMask> kept;
  std::vector<std::uint8_t> covered(n, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const double coverage = static_cast<double>(area[i]) / static_cast<double>(n);
    if (coverage <= delete_threshold) continue;
    for (std::size_t p = 0; p < n; ++p) covered[p] |= bits[i][p];
    kept.emplace_back(static_cast<RegionId>(kept.size()), height, width, bits[i]);
  }
  if (kept.empty()) {
    throw InvalidArgument("every imported mask fell below the delete threshold; lower it");
  }

  std::vector<std::uint8_t> residual(n);
  for (std::size_t p = 0; p < n; ++p) residual[p] = covered[p] == 0 ? 1 : 0;
  RegionMask rest(static_cast<RegionId>(kept.size()), height, width, residual);
  if (rest.area() > 0) kept.push_back(std::move(rest));
  return Division(height, width, std::move(kept), DivisionMethod::kImported);
}

Division divide(const RasterImage& image, const DivisionConfig& config) {
  switch (config.method) {
    case DivisionMethod::kGrid:
      return divide_grid(image, config.grid_rows, config.grid_cols);
    case DivisionMethod::kSuperpixel:
    case DivisionMethod::kSuperpixelGridFallback:
      return divide_superpixel(image, config.target_regions, config.seed);
    case DivisionMethod::kImported:
      break;
  }
  throw InvalidArgument("imported divisions need masks; use resolve_imported_masks");
}

}  // namespace lima
