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

// Newline-delimited JSON protocol spoken with external oracle processes.
//
//   request:   {"id": u64, "op": "embed"|"probs",
//               "images": [{"h": int, "w": int, "c": int, "data": "<base64>"}]}
//   response:  {"id": u64, "ok": true, "vectors": [[f64, ...], ...]}
//              {"id": u64, "ok": false, "error": "msg"}
//   handshake: {"op": "hello"} -> {"embed_dim": int, "num_classes": int, "max_batch": int}
//
// Image data is little-endian float32, row-major with interleaved channels.
// One JSON object per line; responses may arrive out of order.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lima/image.hpp"
#include "lima/oracle.hpp"

namespace lima::wire {

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws InvalidArgument on characters outside the standard alphabet or bad padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Little-endian float32 bytes of the image data, base64-encoded.
std::string encode_pixels(const RasterImage& image);
RasterImage decode_pixels(std::size_t height, std::size_t width, std::size_t channels,
                          std::string_view base64);

struct Hello {
  std::size_t embed_dim = 0;
  std::size_t num_classes = 0;
  // 0 = unbounded.
  std::size_t max_batch = 0;
};

enum class Op { kEmbed, kProbs };

struct Request {
  std::uint64_t id = 0;
  Op op = Op::kEmbed;
  std::vector<RasterImage> images;
};

struct Response {
  std::uint64_t id = 0;
  bool ok = true;
  Matrix vectors;
  std::string error;
};

std::string encode_hello_request();
bool is_hello_request(std::string_view line);
std::string encode_hello(const Hello& hello);
Hello decode_hello(std::string_view line);

std::string encode_request(const Request& request);
// Throws InvalidArgument on malformed JSON, a missing field or a bad payload.
Request decode_request(std::string_view line);

std::string encode_response(const Response& response);
Response decode_response(std::string_view line);

// Best-effort id extraction from a line that failed to decode.
std::optional<std::uint64_t> peek_request_id(std::string_view line);

}  // namespace lima::wire
