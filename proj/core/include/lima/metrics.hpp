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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lima/image.hpp"
#include "lima/oracle.hpp"

namespace lima {

// Pixel counts T_0 = 0 < T_1 < ... < T_n = pixel total.
class RevealSchedule {
 public:
  RevealSchedule() = default;
  // Throws InvalidArgument unless strictly increasing from 0 with at least two steps.
  explicit RevealSchedule(std::vector<std::size_t> steps);
  // One step per region in `order`, each jumping by that region's area.
  static RevealSchedule by_regions(const Division& division, std::span<const RegionId> order);

  std::span<const std::size_t> steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_.size(); }
  std::size_t total() const { return steps_.back(); }

 private:
  std::vector<std::size_t> steps_;
};

enum class CurveMode { kInsertion, kDeletion };

struct FaithfulnessCurve {
  RevealSchedule schedule;
  // Target-class probability at each schedule step.
  std::vector<double> values;
  CurveMode mode = CurveMode::kInsertion;
};

// sum_i (f_i + f_{i-1}) (T_i - T_{i-1}) / (2 T_n)
double curve_auc(const FaithfulnessCurve& curve);
// Both check the curve mode and throw InvalidArgument on a mismatch.
double deletion_auc(const FaithfulnessCurve& curve);
double insertion_auc(const FaithfulnessCurve& curve);

// Largest value over steps with T_i <= limit_fraction * T_n; 0 < limit_fraction <= 1.
double highest_confidence(const FaithfulnessCurve& curve, double limit_fraction);

// Reveals (insertion) or zeroes (deletion) regions in `order`, one region per
// step, and records probs()[target_class] at every step in a single batch.
FaithfulnessCurve build_curve(ModelOracle& oracle, const RasterImage& image,
                              const Division& division, std::span<const RegionId> order,
                              std::size_t target_class, CurveMode mode);

struct MuFidelityConfig {
  // 0 selects max(1, floor(0.2 |V|)).
  std::size_t subset_size = 0;
  std::size_t samples = 200;
  std::uint64_t seed = 0;
};

struct FidelityResult {
  double value = 0.0;
  // Set when one side had zero variance; value is then 0.
  bool degenerate = false;
};

// Pearson correlation; degenerate (value 0) when either input has zero variance.
FidelityResult pearson_correlation(std::span<const double> x, std::span<const double> y);

std::size_t default_fidelity_subset_size(std::size_t ground_set);

// Correlation between the attribution mass of random fixed-size region subsets
// and the drop in the target probability when those regions are zeroed.
FidelityResult mu_fidelity(std::span<const double> region_scores, ModelOracle& oracle,
                           const RasterImage& image, const Division& division,
                           std::size_t target_class, const MuFidelityConfig& config = {});

// Uniformly random `size`-subset of 0..n-1 (sorted), drawn by partial Fisher-Yates.
template <typename Rng>
std::vector<RegionId> sample_subset(std::size_t n, std::size_t size, Rng& rng);

}  // namespace lima

#include <algorithm>
#include <numeric>
#include <random>

namespace lima {

template <typename Rng>
std::vector<RegionId> sample_subset(std::size_t n, std::size_t size, Rng& rng) {
  std::vector<RegionId> pool(n);
  std::iota(pool.begin(), pool.end(), RegionId{0});
  for (std::size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(size);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace lima
