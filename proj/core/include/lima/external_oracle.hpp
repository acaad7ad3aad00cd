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

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lima/oracle.hpp"
#include "lima/wire_protocol.hpp"

namespace lima {

// A bidirectional line-oriented byte stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  // Appends the newline.
  virtual void write_line(std::string_view line) = 0;
  // nullopt on timeout; throws TransportError when the peer has gone away.
  virtual std::optional<std::string> read_line(std::chrono::milliseconds timeout) = 0;
};

// Spawns argv[0] with stdin/stdout piped; the child's stderr is inherited.
std::unique_ptr<LineChannel> spawn_process_channel(const std::vector<std::string>& argv);
std::unique_ptr<LineChannel> connect_tcp_channel(const std::string& host, std::uint16_t port);

struct ExternalOracleOptions {
  std::chrono::milliseconds timeout{30000};
};

// Client side of the wire protocol. Batches are split to honor the server's
// max_batch. Requests are single-flight per connection.
class ExternalOracle final : public ModelOracle {
 public:
  // Performs the hello handshake; throws TransportError when it fails.
  explicit ExternalOracle(std::unique_ptr<LineChannel> channel,
                          ExternalOracleOptions options = {});

  std::size_t embed_dim() const override { return hello_.embed_dim; }
  std::size_t num_classes() const override { return hello_.num_classes; }
  bool concurrent_batches() const override { return false; }
  std::size_t max_batch() const noexcept { return hello_.max_batch; }

 protected:
  Matrix do_embed(std::span<const RasterImage> images) override;
  Matrix do_probs(std::span<const RasterImage> images) override;

 private:
  Matrix query(wire::Op op, std::span<const RasterImage> images, std::size_t cols);
  wire::Response await(std::uint64_t id);

  std::unique_ptr<LineChannel> channel_;
  ExternalOracleOptions options_;
  wire::Hello hello_;
  std::uint64_t next_id_ = 1;
  std::map<std::uint64_t, wire::Response> early_;
};

// "cmd:<program> [args...]" (whitespace-separated) or "tcp:<host>:<port>".
std::unique_ptr<ExternalOracle> open_external_oracle(std::string_view spec,
                                                     ExternalOracleOptions options = {});

}  // namespace lima
