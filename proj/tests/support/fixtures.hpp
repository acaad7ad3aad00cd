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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "lima/image.hpp"
#include "lima/synthetic_oracles.hpp"

namespace lima::testing {

// Uniform values in [lo, hi].
RasterImage random_image(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed,
                         float lo = 0.0f, float hi = 1.0f);
RasterImage constant_image(std::size_t h, std::size_t w, std::size_t c, float value);
// Smooth gradients with a few flat disks; a stand-in for a natural photo.
RasterImage blob_image(std::size_t h, std::size_t w, std::uint64_t seed);

// A grid division over a constant image with an oracle that plants
// `weights[r]` on region r, so the target probability is linear in the regions kept.
struct PlantedFixture {
  RasterImage image;
  Division division;
  std::unique_ptr<PlantedRegionOracle> oracle;
  std::vector<double> weights;
};
PlantedFixture make_planted_fixture(std::size_t rows, std::size_t cols,
                                    std::vector<double> weights, std::size_t cell = 4);

// Every subset of {0..n-1}, as sorted id lists, in bitmask order.
std::vector<std::vector<RegionId>> all_subsets(std::size_t n);

// Creates a fresh directory and removes it on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace lima::testing
