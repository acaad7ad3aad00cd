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
#include <memory>
#include <span>
#include <vector>

#include "lima/image.hpp"
#include "lima/oracle.hpp"

namespace lima {

// Embeds an image as its flattened pixel vector; class probabilities are uniform.
class IdentityOracle final : public ModelOracle {
 public:
  IdentityOracle(std::size_t height, std::size_t width, std::size_t channels,
                 std::size_t num_classes = 2);

  std::size_t embed_dim() const override { return height_ * width_ * channels_; }
  std::size_t num_classes() const override { return num_classes_; }

 protected:
  Matrix do_embed(std::span<const RasterImage> images) override;
  Matrix do_probs(std::span<const RasterImage> images) override;

 private:
  std::size_t height_, width_, channels_, num_classes_;
};

// Linear feature extractor embed(x) = W x with one prototype image per class.
// Class rows are the prototype embeddings; probabilities are a softmax over the
// cosine similarity to each row divided by the temperature.
class LinearPrototypeOracle final : public ModelOracle {
 public:
  LinearPrototypeOracle(Matrix projection, std::vector<RasterImage> prototypes,
                        double temperature);

  // Non-negative sparse projection and uniform-noise prototypes drawn from `seed`.
  static std::unique_ptr<LinearPrototypeOracle> random(std::size_t height, std::size_t width,
                                                       std::size_t channels,
                                                       std::size_t num_classes,
                                                       std::size_t embed_dim,
                                                       std::uint64_t seed,
                                                       double temperature = 0.1);

  std::size_t embed_dim() const override { return projection_.rows; }
  std::size_t num_classes() const override { return rows_.size(); }
  std::optional<std::vector<double>> class_row(std::size_t k) const override;

  const RasterImage& prototype(std::size_t k) const { return prototypes_.at(k); }
  double temperature() const noexcept { return temperature_; }
  // Class logits before the softmax: cosine to each class row over temperature.
  std::vector<double> logits(const RasterImage& image) const;

 protected:
  Matrix do_embed(std::span<const RasterImage> images) override;
  Matrix do_probs(std::span<const RasterImage> images) override;

 private:
  std::vector<double> project(const RasterImage& image) const;

  Matrix projection_;
  std::vector<RasterImage> prototypes_;
  std::vector<std::vector<double>> rows_;
  double temperature_;
};

struct PlantedOracleOptions {
  // Second embedding coordinate; keeps every embedding away from the origin.
  double bias = 1.0;
  // Target-class probability with none / all of the planted evidence present.
  double p_empty = 0.5;
  double p_full = 0.9;
  std::size_t num_classes = 2;
};

// Scores an image by the weighted fraction of planted evidence it still shows:
//   m(x) = sum_p w_p mean_c(x_p) / sum_p w_p mean_c(ref_p)
// m is additive over disjoint regions of the reference image. embed(x) = (m, bias);
// class 0 gets probability p_empty + (p_full - p_empty) m, other classes share the rest.
class PlantedRegionOracle final : public ModelOracle {
 public:
  PlantedRegionOracle(const RasterImage& reference, std::vector<double> pixel_weights,
                      PlantedOracleOptions options = {});

  // Unit weight on every pixel of `planted`.
  static std::unique_ptr<PlantedRegionOracle> from_mask(const RasterImage& reference,
                                                        const RegionMask& planted,
                                                        PlantedOracleOptions options = {});
  // Region r contributes region_weights[r] spread evenly over its pixels.
  static std::unique_ptr<PlantedRegionOracle> from_region_weights(
      const RasterImage& reference, const Division& division,
      std::span<const double> region_weights, PlantedOracleOptions options = {});

  std::size_t embed_dim() const override { return 2; }
  std::size_t num_classes() const override { return options_.num_classes; }
  std::optional<std::vector<double>> class_row(std::size_t k) const override;

  double planted_fraction(const RasterImage& image) const;
  double target_probability(double fraction) const {
    return options_.p_empty + (options_.p_full - options_.p_empty) * fraction;
  }
  const PlantedOracleOptions& options() const noexcept { return options_; }

 protected:
  Matrix do_embed(std::span<const RasterImage> images) override;
  Matrix do_probs(std::span<const RasterImage> images) override;

 private:
  std::size_t height_, width_;
  std::vector<double> weights_;
  double normalizer_;
  PlantedOracleOptions options_;
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace lima
