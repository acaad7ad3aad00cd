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

#include "lima/rle.hpp"

#include <string>

#include "lima/errors.hpp"

namespace lima {

std::vector<std::uint32_t> rle_encode(std::span<const std::uint8_t> bits) {
  std::vector<std::uint32_t> counts;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (auto b : bits) {
    const std::uint8_t v = b != 0 ? 1 : 0;
    if (v != current) {
      counts.push_back(run);
      run = 0;
      current = v;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

std::vector<std::uint8_t> rle_decode(std::span<const std::uint32_t> counts,
                                     std::size_t pixel_count) {
  std::vector<std::uint8_t> bits;
  bits.reserve(pixel_count);
  std::uint8_t value = 0;
  for (auto run : counts) {
    if (bits.size() + run > pixel_count) break;
    bits.insert(bits.end(), run, value);
    value ^= 1;
  }
  std::size_t total = 0;
  for (auto run : counts) total += run;
  if (total != pixel_count) {
    throw InvalidArgument("run-length counts sum to " + std::to_string(total) + ", expected " +
                          std::to_string(pixel_count));
  }
  return bits;
}

}  // namespace lima
