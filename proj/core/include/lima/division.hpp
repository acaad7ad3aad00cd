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
#include <span>
#include <vector>

#include "lima/image.hpp"

namespace lima {

inline constexpr double kDefaultDeleteThreshold = 0.0005;

struct DivisionConfig {
  DivisionMethod method = DivisionMethod::kGrid;
  std::size_t grid_rows = 7;
  std::size_t grid_cols = 7;
  std::size_t target_regions = 49;
  std::uint64_t seed = 0;
  // Fraction of the image area a resolved imported mask must exceed to be kept.
  double delete_threshold = kDefaultDeleteThreshold;
};

// rows x cols axis-aligned patches; the last row and column absorb any remainder.
Division divide_grid(const RasterImage& image, std::size_t rows, std::size_t cols);

// SLICO-style superpixels: k-means over (L, a, b, x, y) with per-cluster adaptive
// color normalization, 10 iterations from a regular seed grid, then a 4-connectivity
// pass that folds orphan fragments into their largest neighbor. A non-zero
// seed jitters the initial grid. Flat images fall back to a square grid.
Division divide_superpixel(const RasterImage& image, std::size_t target_regions,
                           std::uint64_t seed = 0);

// Turns possibly-overlapping masks (e.g. from a segmentation model) into a
// partition: for every overlapping pair (i < j, index order) the intersection is
// removed from the larger mask (from mask j on equal areas); masks whose coverage
// is <= delete_threshold are dropped; uncovered pixels form a trailing residual region.
Division resolve_imported_masks(std::size_t height, std::size_t width,
                                std::span<const RegionMask> masks, double delete_threshold);

// Dispatch on config.method for the methods that need only the image.
Division divide(const RasterImage& image, const DivisionConfig& config);

// sRGB in [0,1] to CIE L*a*b* (D65).
void rgb_to_lab(float r, float g, float b, double& l, double& a, double& bb);

}  // namespace lima
