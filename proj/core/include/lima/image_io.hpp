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
#include <span>
#include <vector>

#include "lima/image.hpp"

namespace lima {

// Reads an 8- or 16-bit PNG into [0,1] floats. Grayscale (with or without alpha)
// yields one channel, everything else three; alpha is discarded.
RasterImage read_png(const std::filesystem::path& path);

// Non-zero pixels of a single-channel (or RGB, any channel non-zero) PNG.
std::vector<std::uint8_t> read_mask_png(const std::filesystem::path& path, std::size_t& height,
                                        std::size_t& width);

// 8-bit PNG writer; `pixels` is row-major interleaved with 1 or 3 channels.
void write_png(const std::filesystem::path& path, std::size_t height, std::size_t width,
               std::size_t channels, std::span<const std::uint8_t> pixels);

// Quantizes to 8 bits (round to nearest).
void write_png(const std::filesystem::path& path, const RasterImage& image);

}  // namespace lima
