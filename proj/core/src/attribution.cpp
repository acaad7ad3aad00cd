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

#include "lima/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lima/errors.hpp"
#include "lima/image_io.hpp"

namespace lima {

std::vector<double> assign_scores(std::span<const double> step_cons_colla, double baseline) {
  std::vector<double> scores(step_cons_colla.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = i == 0 ? baseline
                       : scores[i - 1] - std::abs(step_cons_colla[i] - step_cons_colla[i - 1]);
  }
  return scores;
}

std::vector<double> assign_scores(std::span<const RegionId> order,
                                  std::span<const double> step_cons_colla, double baseline) {
  if (order.size() != step_cons_colla.size()) {
    throw InvalidArgument("need one prefix value per ordered region: got " +
                          std::to_string(step_cons_colla.size()) + " for " +
                          std::to_string(order.size()));
  }
  const auto along = assign_scores(step_cons_colla, baseline);
  std::vector<double> scores(order.size(), 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] >= order.size()) throw InvalidArgument("order is not a permutation");
    scores[order[i]] = along[i];
  }
  return scores;
}

std::vector<double> assign_uniform_scores(std::size_t count, double baseline) {
  std::vector<double> scores(count);
  for (std::size_t i = 0; i < count; ++i) scores[i] = baseline - static_cast<double>(i);
  return scores;
}

OrderedAttribution attribute(SubmodularFunction& objective, std::span<const RegionId> order,
                             double baseline, ScoringMode mode) {
  const std::size_t n = objective.ground_set_size();
  if (order.size() != n) {
    throw InvalidArgument("order has " + std::to_string(order.size()) + " regions, expected " +
                          std::to_string(n));
  }
  validate_subset(objective.division(), order);

  std::vector<std::vector<RegionId>> prefixes;
  prefixes.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) prefixes.emplace_back(order.begin(), order.begin() + i);
  const auto breakdowns = objective.evaluate_batch(prefixes);

  OrderedAttribution out;
  out.order.assign(order.begin(), order.end());
  out.baseline = baseline;
  for (const auto& b : breakdowns) {
    out.step_values.push_back(b.total);
    out.step_cons_colla.push_back(b.consistency + b.collaboration);
  }
  const auto along = mode == ScoringMode::kMarginal ? assign_scores(out.step_cons_colla, baseline)
                                                    : assign_uniform_scores(n, baseline);
  out.scores.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.scores[order[i]] = along[i];
  return out;
}

SaliencyMap render_saliency(const Division& division, std::span<const RegionId> order,
                            std::span<const double> scores) {
  if (order.size() != scores.size()) {
    throw InvalidArgument("scores must be aligned with the order");
  }
  validate_subset(division, order);
  if (order.size() != division.size()) throw InvalidArgument("order must cover every region");
  std::vector<double> by_region(division.size());
  for (std::size_t i = 0; i < order.size(); ++i) by_region[order[i]] = scores[i];
  SaliencyMap map{division.height(), division.width(), {}};
  map.values.resize(map.height * map.width);
  const auto labels = division.labels();
  for (std::size_t p = 0; p < labels.size(); ++p) map.values[p] = by_region[labels[p]];
  return map;
}

std::array<std::uint8_t, 3> colormap(std::uint8_t level) {
  // Piecewise-linear ramp through blue, cyan, yellow, red.
  constexpr std::array<std::array<double, 3>, 4> stops{{
      {0.0, 0.0, 255.0},
      {0.0, 255.0, 255.0},
      {255.0, 255.0, 0.0},
      {255.0, 0.0, 0.0},
  }};
  const double t = level / 255.0 * 3.0;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), 2);
  const double f = t - static_cast<double>(k);
  std::array<std::uint8_t, 3> rgb{};
  for (std::size_t c = 0; c < 3; ++c) {
    rgb[c] = static_cast<std::uint8_t>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
  }
  return rgb;
}

namespace {

std::vector<std::uint8_t> normalized_levels(const SaliencyMap& map) {
  std::vector<std::uint8_t> levels(map.values.size(), 255);
  if (map.values.empty()) return levels;
  const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return levels;
  for (std::size_t p = 0; p < levels.size(); ++p) {
    levels[p] = static_cast<std::uint8_t>(std::lround((map.values[p] - *lo) / range * 255.0));
  }
  return levels;
}

}  // namespace

std::vector<std::uint8_t> colorize(const SaliencyMap& map) {
  const auto levels = normalized_levels(map);
  std::vector<std::uint8_t> rgb(levels.size() * 3);
  for (std::size_t p = 0; p < levels.size(); ++p) {
    const auto c = colormap(levels[p]);
    std::copy(c.begin(), c.end(), rgb.begin() + p * 3);
  }
  return rgb;
}

void write_saliency_png(const std::filesystem::path& path, const SaliencyMap& map) {
  write_png(path, map.height, map.width, 3, colorize(map));
}

RasterImage overlay(const RasterImage& image, const SaliencyMap& map, float alpha) {
  if (image.height() != map.height || image.width() != map.width) {
    throw InvalidArgument("saliency map and image differ in size");
  }
  const auto heat = colorize(map);
  std::vector<float> out(image.pixel_count() * 3);
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      const float base = image.channels() == 3 ? image.data()[p * 3 + c] : image.data()[p];
      out[p * 3 + c] = std::clamp(alpha * heat[p * 3 + c] / 255.0f + (1.0f - alpha) * base, 0.0f, 1.0f);
    }
  }
  return RasterImage(image.height(), image.width(), 3, std::move(out));
}

}  // namespace lima
