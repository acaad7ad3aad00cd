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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lima/image.hpp"
#include "lima/submodular.hpp"

namespace lima {

inline constexpr double kDefaultBaselineScore = 1.0;

enum class ScoringMode {
  // a_1 = b, a_i = a_{i-1} - |c_i - c_{i-1}| with c_i = cons + colla of the i-th prefix.
  kMarginal,
  // a_i = b - (i - 1): equal unit gaps between consecutive regions.
  kUniformGap,
};

struct OrderedAttribution {
  std::vector<RegionId> order;
  // F of each prefix of `order`.
  std::vector<double> step_values;
  // Consistency + collaboration of each prefix of `order`.
  std::vector<double> step_cons_colla;
  // Indexed by region id.
  std::vector<double> scores;
  double baseline = kDefaultBaselineScore;
};

// Scores along the order from prefix (consistency + collaboration) sums.
std::vector<double> assign_scores(std::span<const double> step_cons_colla, double baseline);
// Same, scattered to region ids. Throws InvalidArgument when the lengths differ.
std::vector<double> assign_scores(std::span<const RegionId> order,
                                  std::span<const double> step_cons_colla, double baseline);
std::vector<double> assign_uniform_scores(std::size_t count, double baseline);

// Evaluates every prefix of `order` (hits the memo for prefixes the search already
// scored) and assigns per-region scores.
OrderedAttribution attribute(SubmodularFunction& objective, std::span<const RegionId> order,
                             double baseline = kDefaultBaselineScore,
                             ScoringMode mode = ScoringMode::kMarginal);

struct SaliencyMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
};

// Paints each region's score over its pixels; `scores` is aligned with `order`.
SaliencyMap render_saliency(const Division& division, std::span<const RegionId> order,
                            std::span<const double> scores);

// Min-max normalizes to [0,255] (a constant map becomes all 255) and applies a
// fixed blue-cyan-yellow-red ramp. Returns row-major RGB bytes.
std::vector<std::uint8_t> colorize(const SaliencyMap& map);
std::array<std::uint8_t, 3> colormap(std::uint8_t level);

void write_saliency_png(const std::filesystem::path& path, const SaliencyMap& map);

// alpha * heat + (1 - alpha) * image, for quick visual checks.
RasterImage overlay(const RasterImage& image, const SaliencyMap& map, float alpha = 0.5f);

}  // namespace lima
