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

#include "lima/metrics.hpp"

#include <cmath>
#include <string>

#include "lima/errors.hpp"

namespace lima {

RevealSchedule::RevealSchedule(std::vector<std::size_t> steps) : steps_(std::move(steps)) {
  if (steps_.size() < 2 || steps_.front() != 0) {
    throw InvalidArgument("a reveal schedule starts at 0 and has at least two steps");
  }
  for (std::size_t i = 1; i < steps_.size(); ++i) {
    if (steps_[i] <= steps_[i - 1]) {
      throw InvalidArgument("reveal schedule must be strictly increasing");
    }
  }
}

RevealSchedule RevealSchedule::by_regions(const Division& division,
                                          std::span<const RegionId> order) {
  validate_subset(division, order);
  if (order.size() != division.size()) {
    throw InvalidArgument("reveal order must cover every region");
  }
  std::vector<std::size_t> steps{0};
  for (auto id : order) steps.push_back(steps.back() + division.region(id).area());
  return RevealSchedule(std::move(steps));
}

double curve_auc(const FaithfulnessCurve& curve) {
  const auto t = curve.schedule.steps();
  if (curve.values.size() != t.size()) {
    throw InvalidArgument("curve has " + std::to_string(curve.values.size()) +
                          " values for a schedule of " + std::to_string(t.size()));
  }
  double area = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    area += (curve.values[i] + curve.values[i - 1]) * static_cast<double>(t[i] - t[i - 1]);
  }
  return area / (2.0 * static_cast<double>(t.back()));
}

double deletion_auc(const FaithfulnessCurve& curve) {
  if (curve.mode != CurveMode::kDeletion) throw InvalidArgument("expected a deletion curve");
  return curve_auc(curve);
}

double insertion_auc(const FaithfulnessCurve& curve) {
  if (curve.mode != CurveMode::kInsertion) throw InvalidArgument("expected an insertion curve");
  return curve_auc(curve);
}

double highest_confidence(const FaithfulnessCurve& curve, double limit_fraction) {
  if (!(limit_fraction > 0.0 && limit_fraction <= 1.0)) {
    throw InvalidArgument("limit fraction must lie in (0, 1]");
  }
  const auto t = curve.schedule.steps();
  if (curve.values.size() != t.size()) throw InvalidArgument("curve and schedule differ in length");
  const double limit = limit_fraction * static_cast<double>(t.back());
  double best = curve.values.front();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (static_cast<double>(t[i]) <= limit) best = std::max(best, curve.values[i]);
  }
  return best;
}

FaithfulnessCurve build_curve(ModelOracle& oracle, const RasterImage& image,
                              const Division& division, std::span<const RegionId> order,
                              std::size_t target_class, CurveMode mode) {
  if (target_class >= oracle.num_classes()) throw InvalidArgument("target class out of range");
  FaithfulnessCurve curve;
  curve.schedule = RevealSchedule::by_regions(division, order);
  curve.mode = mode;
  std::vector<RasterImage> images;
  images.reserve(order.size() + 1);
  for (std::size_t i = 0; i <= order.size(); ++i) {
    const auto prefix = order.first(i);
    images.push_back(mode == CurveMode::kInsertion ? composite(image, division, prefix)
                                                   : complement_composite(image, division, prefix));
  }
  const Matrix p = oracle.probs(images);
  curve.values.resize(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) curve.values[i] = p(i, target_class);
  return curve;
}

FidelityResult pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw InvalidArgument("correlation needs two equally long non-empty samples");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  // Relative guard: sums of identical values can leave rounding residue.
  const double scale_x = std::max(1.0, mx * mx) * n;
  const double scale_y = std::max(1.0, my * my) * n;
  if (sxx <= 1e-24 * scale_x || syy <= 1e-24 * scale_y) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

std::size_t default_fidelity_subset_size(std::size_t ground_set) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(0.2 * ground_set)));
}

FidelityResult mu_fidelity(std::span<const double> region_scores, ModelOracle& oracle,
                           const RasterImage& image, const Division& division,
                           std::size_t target_class, const MuFidelityConfig& config) {
  const std::size_t n = division.size();
  if (region_scores.size() != n) throw InvalidArgument("need one score per region");
  const std::size_t size =
      config.subset_size == 0 ? default_fidelity_subset_size(n) : config.subset_size;
  if (size < 1 || size > n) throw InvalidArgument("fidelity subset size must lie in [1, |V|]");
  if (config.samples < 2) throw InvalidArgument("fidelity needs at least two samples");
  if (target_class >= oracle.num_classes()) throw InvalidArgument("target class out of range");

  std::mt19937_64 rng(config.seed);
  std::vector<RasterImage> images{image};
  std::vector<double> mass;
  images.reserve(config.samples + 1);
  for (std::size_t s = 0; s < config.samples; ++s) {
    const auto subset = sample_subset(n, size, rng);
    double m = 0.0;
    for (auto id : subset) m += region_scores[id];
    mass.push_back(m);
    images.push_back(complement_composite(image, division, subset));
  }
  const Matrix p = oracle.probs(images);
  std::vector<double> drop(config.samples);
  for (std::size_t s = 0; s < config.samples; ++s) drop[s] = p(0, target_class) - p(s + 1, target_class);
  return pearson_correlation(mass, drop);
}

}  // namespace lima
