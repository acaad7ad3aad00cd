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
#include <span>
#include <vector>

namespace lima {

// Uncompressed run-length encoding of a row-major bitmap. Runs alternate
// starting with a run of zeros (possibly of length 0); counts sum to the pixel
// count.
std::vector<std::uint32_t> rle_encode(std::span<const std::uint8_t> bits);

// Throws InvalidArgument when the counts do not sum to `pixel_count`.
std::vector<std::uint8_t> rle_decode(std::span<const std::uint32_t> counts,
                                     std::size_t pixel_count);

}  // namespace lima
