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

#include "fixtures.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include "lima/division.hpp"

namespace lima::testing {

RasterImage random_image(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed,
                         float lo, float hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> data(h * w * c);
  for (auto& v : data) v = std::clamp(u(rng), lo, hi);
  return RasterImage(h, w, c, std::move(data));
}

RasterImage constant_image(std::size_t h, std::size_t w, std::size_t c, float value) {
  return RasterImage(h, w, c, std::vector<float>(h * w * c, value));
}

RasterImage blob_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<float> data(h * w * 3);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / static_cast<double>(w);
      const double fy = static_cast<double>(y) / static_cast<double>(h);
      float* px = &data[(y * w + x) * 3];
      px[0] = static_cast<float>(fx);
      px[1] = static_cast<float>(fy);
      px[2] = static_cast<float>(0.5 + 0.5 * std::sin(9.0 * fx + 7.0 * fy));
    }
  }
  for (int disk = 0; disk < 5; ++disk) {
    const double cy = u(rng) * static_cast<double>(h);
    const double cx = u(rng) * static_cast<double>(w);
    const double r = (0.1 + 0.15 * u(rng)) * static_cast<double>(std::min(h, w));
    const float color[3] = {static_cast<float>(u(rng)), static_cast<float>(u(rng)),
                            static_cast<float>(u(rng))};
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double dy = static_cast<double>(y) - cy;
        const double dx = static_cast<double>(x) - cx;
        if (dy * dy + dx * dx < r * r) std::copy(color, color + 3, &data[(y * w + x) * 3]);
      }
    }
  }
  return RasterImage(h, w, 3, std::move(data));
}

PlantedFixture make_planted_fixture(std::size_t rows, std::size_t cols,
                                    std::vector<double> weights, std::size_t cell) {
  PlantedFixture f;
  f.image = constant_image(rows * cell, cols * cell, 3, 0.6f);
  f.division = divide_grid(f.image, rows, cols);
  f.weights = std::move(weights);
  f.oracle = PlantedRegionOracle::from_region_weights(f.image, f.division, f.weights);
  return f;
}

std::vector<std::vector<RegionId>> all_subsets(std::size_t n) {
  std::vector<std::vector<RegionId>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<RegionId> s;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) s.push_back(static_cast<RegionId>(i));
    }
    out.push_back(std::move(s));
  }
  return out;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("lima-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace lima::testing
