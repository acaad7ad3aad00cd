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
#include <string>
#include <string_view>
#include <vector>

namespace lima {

using RegionId = std::uint32_t;

// Dense H x W x C image, row-major with interleaved channels, values in [0,1].
// Immutable once constructed.
class RasterImage {
 public:
  RasterImage() = default;
  // Zero-filled image.
  RasterImage(std::size_t height, std::size_t width, std::size_t channels);
  // Throws InvalidArgument when the size does not match or a value is outside [0,1].
  RasterImage(std::size_t height, std::size_t width, std::size_t channels,
              std::vector<float> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return height_ * width_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  float at(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return data_[(y * width_ + x) * channels_ + c];
  }
  // Mean over channels of pixel `index` (row-major pixel index).
  float channel_mean(std::size_t index) const;

  bool same_shape(const RasterImage& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 1;
  std::vector<float> data_;
};

// One sub-region: the set of pixels it owns, stored as sorted row-major indices.
class RegionMask {
 public:
  RegionMask() = default;
  // From a per-pixel bitmap (non-zero = inside).
  RegionMask(RegionId id, std::size_t height, std::size_t width,
             std::span<const std::uint8_t> bits);
  // From pixel indices; duplicates and out-of-range indices are rejected.
  static RegionMask from_pixels(RegionId id, std::size_t height, std::size_t width,
                                std::vector<std::uint32_t> pixels);

  RegionId id() const noexcept { return id_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t area() const noexcept { return pixels_.size(); }
  std::span<const std::uint32_t> pixels() const noexcept { return pixels_; }
  bool contains(std::size_t index) const;
  std::vector<std::uint8_t> bits() const;

  RegionMask with_id(RegionId id) const {
    RegionMask copy = *this;
    copy.id_ = id;
    return copy;
  }

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  RegionId id_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint32_t> pixels_;
};

enum class DivisionMethod {
  kGrid,
  kSuperpixel,
  // Superpixel request on a flat image, answered with a square grid.
  kSuperpixelGridFallback,
  kImported,
};

std::string_view to_string(DivisionMethod method);
DivisionMethod division_method_from_string(std::string_view name);

// The ground set: pairwise-disjoint masks covering every pixel. Region i has id i.
class Division {
 public:
  Division() = default;
  // Re-numbers masks by position and validates the partition; throws InvalidArgument
  // on overlap, a hole, an empty mask, a dimension mismatch or fewer than two regions.
  Division(std::size_t height, std::size_t width, std::vector<RegionMask> regions,
           DivisionMethod method, std::string image_ref = {});

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return regions_.size(); }
  DivisionMethod method() const noexcept { return method_; }
  const std::string& image_ref() const noexcept { return image_ref_; }
  const std::vector<RegionMask>& regions() const noexcept { return regions_; }
  const RegionMask& region(RegionId id) const { return regions_.at(id); }
  // Region id of every pixel, row-major.
  std::span<const RegionId> labels() const noexcept { return labels_; }

  friend bool operator==(const Division& a, const Division& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.method_ == b.method_ &&
           a.regions_ == b.regions_;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  DivisionMethod method_ = DivisionMethod::kGrid;
  std::string image_ref_;
  std::vector<RegionMask> regions_;
  std::vector<RegionId> labels_;
};

// Per-region pixel labels to Division (labels must be 0..n-1, each used).
Division division_from_labels(std::size_t height, std::size_t width,
                              std::span<const RegionId> labels, DivisionMethod method);

// Throws InvalidArgument unless every id is < division.size() and ids are distinct.
void validate_subset(const Division& division, std::span<const RegionId> subset);

// Pixels of the listed regions keep their values; every other pixel is 0.
RasterImage composite(const RasterImage& image, const Division& division,
                      std::span<const RegionId> subset);

// The image with the listed regions set to 0.
RasterImage complement_composite(const RasterImage& image, const Division& division,
                                 std::span<const RegionId> subset);

}  // namespace lima
