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

#include "lima/wire_protocol.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <string>

#include "json.hpp"
#include "lima/errors.hpp"

namespace lima::wire {
namespace {

using nlohmann::json;

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

json parse_line(std::string_view line) {
  try {
    auto j = json::parse(line);
    if (!j.is_object()) throw InvalidArgument("protocol line is not a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed protocol line: ") + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw InvalidArgument(std::string("protocol line lacks '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad protocol field '") + name + "': " + e.what());
  }
}

std::size_t count_field(const json& j, const char* name) {
  if (j.contains(name) && !j.at(name).is_number_unsigned()) {
    throw InvalidArgument(std::string("protocol field '") + name + "' must be a non-negative integer");
  }
  return field<std::size_t>(j, name);
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (std::size_t i = 0; i < kAlphabet.size(); ++i) {
      t[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
    }
    return t;
  }();
  if (text.size() % 4 != 0) throw InvalidArgument("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char ch = text[i + k];
      if (ch == '=' && last && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) throw InvalidArgument("base64 padding in the middle of a quantum");
      const int d = table[static_cast<unsigned char>(ch)];
      if (d < 0) throw InvalidArgument("invalid base64 character");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::string encode_pixels(const RasterImage& image) {
  const auto data = image.data();
  std::vector<std::uint8_t> bytes(data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(data[i]);
    for (std::size_t b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

RasterImage decode_pixels(std::size_t height, std::size_t width, std::size_t channels,
                          std::string_view base64) {
  const auto bytes = base64_decode(base64);
  if (bytes.size() != height * width * channels * 4) {
    throw InvalidArgument("image payload has " + std::to_string(bytes.size()) +
                          " bytes, expected " + std::to_string(height * width * channels * 4));
  }
  std::vector<float> data(bytes.size() / 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    data[i] = std::bit_cast<float>(bits);
  }
  return RasterImage(height, width, channels, std::move(data));
}

std::string encode_hello_request() { return R"({"op":"hello"})"; }

bool is_hello_request(std::string_view line) {
  try {
    const auto j = json::parse(line);
    return j.is_object() && j.value("op", "") == "hello";
  } catch (const json::exception&) {
    return false;
  }
}

std::string encode_hello(const Hello& hello) {
  return json{{"embed_dim", hello.embed_dim},
              {"num_classes", hello.num_classes},
              {"max_batch", hello.max_batch}}
      .dump();
}

Hello decode_hello(std::string_view line) {
  const auto j = parse_line(line);
  Hello h;
  h.embed_dim = count_field(j, "embed_dim");
  h.num_classes = count_field(j, "num_classes");
  h.max_batch = count_field(j, "max_batch");
  return h;
}

std::string encode_request(const Request& request) {
  json images = json::array();
  for (const auto& img : request.images) {
    images.push_back({{"h", img.height()},
                      {"w", img.width()},
                      {"c", img.channels()},
                      {"data", encode_pixels(img)}});
  }
  return json{{"id", request.id},
              {"op", request.op == Op::kEmbed ? "embed" : "probs"},
              {"images", std::move(images)}}
      .dump();
}

Request decode_request(std::string_view line) {
  const auto j = parse_line(line);
  Request r;
  r.id = field<std::uint64_t>(j, "id");
  const auto op = field<std::string>(j, "op");
  if (op == "embed") {
    r.op = Op::kEmbed;
  } else if (op == "probs") {
    r.op = Op::kProbs;
  } else {
    throw InvalidArgument("unknown op '" + op + "'");
  }
  const auto images = field<json>(j, "images");
  if (!images.is_array()) throw InvalidArgument("'images' must be an array");
  for (const auto& img : images) {
    r.images.push_back(decode_pixels(count_field(img, "h"), count_field(img, "w"),
                                     count_field(img, "c"),
                                     field<std::string>(img, "data")));
  }
  return r;
}

std::string encode_response(const Response& response) {
  if (!response.ok) {
    return json{{"id", response.id}, {"ok", false}, {"error", response.error}}.dump();
  }
  json vectors = json::array();
  for (std::size_t i = 0; i < response.vectors.rows; ++i) {
    const auto row = response.vectors.row(i);
    vectors.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return json{{"id", response.id}, {"ok", true}, {"vectors", std::move(vectors)}}.dump();
}

Response decode_response(std::string_view line) {
  const auto j = parse_line(line);
  Response r;
  r.id = field<std::uint64_t>(j, "id");
  r.ok = field<bool>(j, "ok");
  if (!r.ok) {
    r.error = j.value("error", std::string("unspecified oracle error"));
    return r;
  }
  const auto rows = field<std::vector<std::vector<double>>>(j, "vectors");
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  r.vectors = Matrix(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw InvalidArgument("ragged 'vectors' in response");
    std::copy(rows[i].begin(), rows[i].end(), r.vectors.row(i).begin());
  }
  return r;
}

std::optional<std::uint64_t> peek_request_id(std::string_view line) {
  try {
    const auto j = json::parse(line);
    if (j.is_object() && j.contains("id") && j["id"].is_number_unsigned()) {
      return j["id"].get<std::uint64_t>();
    }
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

}  // namespace lima::wire
