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

#include "lima/synthetic_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lima/errors.hpp"
#include "lima/submodular.hpp"

namespace lima {
namespace {

void check_dims(const RasterImage& image, std::size_t h, std::size_t w) {
  if (image.height() != h || image.width() != w) {
    throw InvalidArgument("oracle expects " + std::to_string(h) + "x" + std::to_string(w) +
                          " images, got " + std::to_string(image.height()) + "x" +
                          std::to_string(image.width()));
  }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double peak = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

IdentityOracle::IdentityOracle(std::size_t height, std::size_t width, std::size_t channels,
                               std::size_t num_classes)
    : height_(height), width_(width), channels_(channels), num_classes_(num_classes) {
  if (num_classes < 1) throw InvalidArgument("identity oracle needs at least one class");
}

Matrix IdentityOracle::do_embed(std::span<const RasterImage> images) {
  Matrix out(images.size(), embed_dim());
  for (std::size_t i = 0; i < images.size(); ++i) {
    check_dims(images[i], height_, width_);
    if (images[i].channels() != channels_) throw InvalidArgument("channel count mismatch");
    std::copy(images[i].data().begin(), images[i].data().end(), out.row(i).begin());
  }
  return out;
}

Matrix IdentityOracle::do_probs(std::span<const RasterImage> images) {
  Matrix out(images.size(), num_classes_);
  std::fill(out.values.begin(), out.values.end(), 1.0 / static_cast<double>(num_classes_));
  return out;
}

LinearPrototypeOracle::LinearPrototypeOracle(Matrix projection,
                                             std::vector<RasterImage> prototypes,
                                             double temperature)
    : projection_(std::move(projection)),
      prototypes_(std::move(prototypes)),
      temperature_(temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (prototypes_.size() < 2) throw InvalidArgument("need at least two class prototypes");
  for (const auto& p : prototypes_) {
    if (p.data().size() != projection_.cols) {
      throw InvalidArgument("prototype size does not match the projection width");
    }
    rows_.push_back(project(p));
  }
}

std::unique_ptr<LinearPrototypeOracle> LinearPrototypeOracle::random(
    std::size_t height, std::size_t width, std::size_t channels, std::size_t num_classes,
    std::size_t embed_dim, std::uint64_t seed, double temperature) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t inputs = height * width * channels;
  Matrix projection(embed_dim, inputs);
  for (double& v : projection.values) {
    v = unit(rng) < 0.3 ? unit(rng) : 0.0;
  }
  std::vector<RasterImage> prototypes;
  for (std::size_t k = 0; k < num_classes; ++k) {
    std::vector<float> data(inputs);
    for (float& v : data) v = static_cast<float>(unit(rng));
    prototypes.emplace_back(height, width, channels, std::move(data));
  }
  return std::make_unique<LinearPrototypeOracle>(std::move(projection), std::move(prototypes),
                                                 temperature);
}

std::vector<double> LinearPrototypeOracle::project(const RasterImage& image) const {
  if (image.data().size() != projection_.cols) {
    throw InvalidArgument("image size does not match the projection width");
  }
  std::vector<double> out(projection_.rows, 0.0);
  const auto x = image.data();
  for (std::size_t r = 0; r < projection_.rows; ++r) {
    const auto w = projection_.row(r);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i];
    out[r] = acc;
  }
  return out;
}

std::optional<std::vector<double>> LinearPrototypeOracle::class_row(std::size_t k) const {
  if (k >= rows_.size()) return std::nullopt;
  return rows_[k];
}

std::vector<double> LinearPrototypeOracle::logits(const RasterImage& image) const {
  const auto e = project(image);
  std::vector<double> out(rows_.size());
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    out[k] = cosine_similarity(e, rows_[k]) / temperature_;
  }
  return out;
}

Matrix LinearPrototypeOracle::do_embed(std::span<const RasterImage> images) {
  Matrix out(images.size(), embed_dim());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto e = project(images[i]);
    std::copy(e.begin(), e.end(), out.row(i).begin());
  }
  return out;
}

Matrix LinearPrototypeOracle::do_probs(std::span<const RasterImage> images) {
  Matrix out(images.size(), num_classes());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto p = softmax(logits(images[i]));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

PlantedRegionOracle::PlantedRegionOracle(const RasterImage& reference,
                                         std::vector<double> pixel_weights,
                                         PlantedOracleOptions options)
    : height_(reference.height()),
      width_(reference.width()),
      weights_(std::move(pixel_weights)),
      options_(options) {
  if (weights_.size() != reference.pixel_count()) {
    throw InvalidArgument("planted weight map does not match the reference image");
  }
  if (options_.num_classes < 2) throw InvalidArgument("planted oracle needs two classes");
  if (!(options_.p_empty >= 0.0 && options_.p_full <= 1.0 && options_.p_empty <= options_.p_full)) {
    throw InvalidArgument("planted oracle needs 0 <= p_empty <= p_full <= 1");
  }
  normalizer_ = 0.0;
  for (std::size_t p = 0; p < weights_.size(); ++p) {
    if (weights_[p] < 0.0 || !std::isfinite(weights_[p])) {
      throw InvalidArgument("planted weights must be finite and non-negative");
    }
    normalizer_ += weights_[p] * reference.channel_mean(p);
  }
  if (!(normalizer_ > 0.0)) {
    throw InvalidArgument("planted region carries no evidence in the reference image");
  }
}

std::unique_ptr<PlantedRegionOracle> PlantedRegionOracle::from_mask(
    const RasterImage& reference, const RegionMask& planted, PlantedOracleOptions options) {
  std::vector<double> weights(reference.pixel_count(), 0.0);
  for (auto p : planted.pixels()) weights.at(p) = 1.0;
  return std::make_unique<PlantedRegionOracle>(reference, std::move(weights), options);
}

std::unique_ptr<PlantedRegionOracle> PlantedRegionOracle::from_region_weights(
    const RasterImage& reference, const Division& division,
    std::span<const double> region_weights, PlantedOracleOptions options) {
  if (region_weights.size() != division.size()) {
    throw InvalidArgument("need one planted weight per region");
  }
  std::vector<double> weights(reference.pixel_count(), 0.0);
  for (const auto& r : division.regions()) {
    const double per_pixel = region_weights[r.id()] / static_cast<double>(r.area());
    for (auto p : r.pixels()) weights.at(p) = per_pixel;
  }
  return std::make_unique<PlantedRegionOracle>(reference, std::move(weights), options);
}

double PlantedRegionOracle::planted_fraction(const RasterImage& image) const {
  check_dims(image, height_, width_);
  double acc = 0.0;
  for (std::size_t p = 0; p < weights_.size(); ++p) {
    if (weights_[p] != 0.0) acc += weights_[p] * image.channel_mean(p);
  }
  return acc / normalizer_;
}

std::optional<std::vector<double>> PlantedRegionOracle::class_row(std::size_t k) const {
  if (k >= options_.num_classes) return std::nullopt;
  if (k == 0) return std::vector<double>{1.0, options_.bias};
  return std::vector<double>{0.0, 1.0};
}

Matrix PlantedRegionOracle::do_embed(std::span<const RasterImage> images) {
  Matrix out(images.size(), 2);
  for (std::size_t i = 0; i < images.size(); ++i) {
    out(i, 0) = planted_fraction(images[i]);
    out(i, 1) = options_.bias;
  }
  return out;
}

Matrix PlantedRegionOracle::do_probs(std::span<const RasterImage> images) {
  const std::size_t c = options_.num_classes;
  Matrix out(images.size(), c);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const double p = std::clamp(target_probability(planted_fraction(images[i])), 0.0, 1.0);
    out(i, 0) = p;
    for (std::size_t k = 1; k < c; ++k) out(i, k) = (1.0 - p) / static_cast<double>(c - 1);
  }
  return out;
}

}  // namespace lima
