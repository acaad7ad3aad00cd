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

#include "lima/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lima/errors.hpp"

namespace lima {

RasterImage::RasterImage(std::size_t height, std::size_t width, std::size_t channels)
    : RasterImage(height, width, channels, std::vector<float>(height * width * channels, 0.0f)) {}

RasterImage::RasterImage(std::size_t height, std::size_t width, std::size_t channels,
                         std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (channels != 1 && channels != 3) {
    throw InvalidArgument("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
  if (data_.size() != height * width * channels) {
    throw InvalidArgument("image data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(height) + "x" +
                          std::to_string(width) + "x" + std::to_string(channels));
  }
  for (float v : data_) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw InvalidArgument("image values must be finite and within [0,1]");
    }
  }
}

float RasterImage::channel_mean(std::size_t index) const {
  const float* p = data_.data() + index * channels_;
  if (channels_ == 1) return p[0];
  return (p[0] + p[1] + p[2]) / 3.0f;
}

RegionMask::RegionMask(RegionId id, std::size_t height, std::size_t width,
                       std::span<const std::uint8_t> bits)
    : id_(id), height_(height), width_(width) {
  if (bits.size() != height * width) {
    throw InvalidArgument("mask bitmap size does not match its dimensions");
  }
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0) pixels_.push_back(static_cast<std::uint32_t>(i));
  }
}

RegionMask RegionMask::from_pixels(RegionId id, std::size_t height, std::size_t width,
                                   std::vector<std::uint32_t> pixels) {
  std::sort(pixels.begin(), pixels.end());
  if (std::adjacent_find(pixels.begin(), pixels.end()) != pixels.end()) {
    throw InvalidArgument("mask pixel list contains duplicates");
  }
  if (!pixels.empty() && pixels.back() >= height * width) {
    throw InvalidArgument("mask pixel index out of range");
  }
  RegionMask mask;
  mask.id_ = id;
  mask.height_ = height;
  mask.width_ = width;
  mask.pixels_ = std::move(pixels);
  return mask;
}

bool RegionMask::contains(std::size_t index) const {
  return std::binary_search(pixels_.begin(), pixels_.end(), static_cast<std::uint32_t>(index));
}

std::vector<std::uint8_t> RegionMask::bits() const {
  std::vector<std::uint8_t> out(height_ * width_, 0);
  for (auto p : pixels_) out[p] = 1;
  return out;
}

std::string_view to_string(DivisionMethod method) {
  switch (method) {
    case DivisionMethod::kGrid:
      return "grid";
    case DivisionMethod::kSuperpixel:
      return "superpixel";
    case DivisionMethod::kSuperpixelGridFallback:
      return "superpixel_grid_fallback";
    case DivisionMethod::kImported:
      return "imported";
  }
  return "unknown";
}

DivisionMethod division_method_from_string(std::string_view name) {
  for (auto m : {DivisionMethod::kGrid, DivisionMethod::kSuperpixel,
                 DivisionMethod::kSuperpixelGridFallback, DivisionMethod::kImported}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown division method '" + std::string(name) + "'");
}

Division::Division(std::size_t height, std::size_t width, std::vector<RegionMask> regions,
                   DivisionMethod method, std::string image_ref)
    : height_(height), width_(width), method_(method), image_ref_(std::move(image_ref)) {
  if (regions.size() < 2) {
    throw InvalidArgument("a division needs at least two regions, got " +
                          std::to_string(regions.size()));
  }
  constexpr RegionId kUnset = std::numeric_limits<RegionId>::max();
  labels_.assign(height * width, kUnset);
  regions_.reserve(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    if (r.height() != height || r.width() != width) {
      throw InvalidArgument("region " + std::to_string(i) + " has mismatched dimensions");
    }
    if (r.area() == 0) {
      throw InvalidArgument("region " + std::to_string(i) + " is empty");
    }
    for (auto p : r.pixels()) {
      if (labels_[p] != kUnset) {
        throw InvalidArgument("regions " + std::to_string(labels_[p]) + " and " +
                              std::to_string(i) + " overlap");
      }
      labels_[p] = static_cast<RegionId>(i);
    }
    regions_.push_back(r.with_id(static_cast<RegionId>(i)));
  }
  if (std::find(labels_.begin(), labels_.end(), kUnset) != labels_.end()) {
    throw InvalidArgument("regions do not cover every pixel");
  }
}

Division division_from_labels(std::size_t height, std::size_t width,
                              std::span<const RegionId> labels, DivisionMethod method) {
  if (labels.size() != height * width) {
    throw InvalidArgument("label map size does not match dimensions");
  }
  RegionId max_label = 0;
  for (auto l : labels) max_label = std::max(max_label, l);
  std::vector<std::vector<std::uint32_t>> pixels(labels.empty() ? 0 : max_label + 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    pixels[labels[i]].push_back(static_cast<std::uint32_t>(i));
  }
  std::vector<RegionMask> regions;
  regions.reserve(pixels.size());
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    regions.push_back(
        RegionMask::from_pixels(static_cast<RegionId>(k), height, width, std::move(pixels[k])));
  }
  return Division(height, width, std::move(regions), method);
}

void validate_subset(const Division& division, std::span<const RegionId> subset) {
  std::vector<bool> seen(division.size(), false);
  for (auto id : subset) {
    if (id >= division.size()) {
      throw InvalidArgument("region id " + std::to_string(id) + " out of range [0, " +
                            std::to_string(division.size()) + ")");
    }
    if (seen[id]) throw InvalidArgument("region id " + std::to_string(id) + " repeated");
    seen[id] = true;
  }
}

namespace {

void check_shape(const RasterImage& image, const Division& division) {
  if (image.height() != division.height() || image.width() != division.width()) {
    throw InvalidArgument("division dimensions do not match the image");
  }
}

}  // namespace

RasterImage composite(const RasterImage& image, const Division& division,
                      std::span<const RegionId> subset) {
  check_shape(image, division);
  validate_subset(division, subset);
  const std::size_t c = image.channels();
  std::vector<float> out(image.data().size(), 0.0f);
  const auto src = image.data();
  for (auto id : subset) {
    for (auto p : division.region(id).pixels()) {
      for (std::size_t k = 0; k < c; ++k) out[p * c + k] = src[p * c + k];
    }
  }
  return RasterImage(image.height(), image.width(), c, std::move(out));
}

RasterImage complement_composite(const RasterImage& image, const Division& division,
                                 std::span<const RegionId> subset) {
  check_shape(image, division);
  validate_subset(division, subset);
  const std::size_t c = image.channels();
  std::vector<float> out(image.data().begin(), image.data().end());
  for (auto id : subset) {
    for (auto p : division.region(id).pixels()) {
      for (std::size_t k = 0; k < c; ++k) out[p * c + k] = 0.0f;
    }
  }
  return RasterImage(image.height(), image.width(), c, std::move(out));
}

}  // namespace lima
