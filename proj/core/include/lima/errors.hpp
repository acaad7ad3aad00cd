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
#include <optional>
#include <stdexcept>
#include <string>

namespace lima {

// Precondition violations on caller-supplied data (bad ids, malformed masks,
// inconsistent dimensions).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failures talking to an external oracle process: timeouts, broken pipes,
// malformed or error responses.
class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& what,
                          std::optional<std::uint64_t> request_id = std::nullopt)
      : std::runtime_error(request_id ? what + " (request id " + std::to_string(*request_id) + ")"
                                      : what),
        request_id_(request_id) {}

  std::optional<std::uint64_t> request_id() const noexcept { return request_id_; }

 private:
  std::optional<std::uint64_t> request_id_;
};

// Failure to read or write an on-disk artifact (PNG, JSON, RLE).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lima
