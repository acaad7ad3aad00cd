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

#include "lima/external_oracle.hpp"

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <sstream>

#include "lima/errors.hpp"

namespace lima {
namespace {

// Buffered line reader/writer over a pair of file descriptors.
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}

  void write_line(std::string_view line) override {
    std::string buf(line);
    buf += '\n';
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = write_some(buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("oracle write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("oracle poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) return std::nullopt;
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("oracle read failed: ") + std::strerror(errno));
      }
      if (n == 0) throw TransportError("oracle closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  virtual ssize_t write_some(const char* data, std::size_t size) {
    return ::write(write_fd_, data, size);
  }

  int read_fd_;
  int write_fd_;
  std::string buffer_;
};

class ProcessChannel final : public FdChannel {
 public:
  ProcessChannel(int read_fd, int write_fd, pid_t pid) : FdChannel(read_fd, write_fd), pid_(pid) {}
  ~ProcessChannel() override {
    ::close(write_fd_);
    // Give the child a moment to exit on end-of-input before forcing it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        ::close(read_fd_);
        return;
      }
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    ::close(read_fd_);
  }

 private:
  pid_t pid_;
};

class SocketChannel final : public FdChannel {
 public:
  explicit SocketChannel(int fd) : FdChannel(fd, fd) {}
  ~SocketChannel() override { ::close(read_fd_); }

 protected:
  ssize_t write_some(const char* data, std::size_t size) override {
    return ::send(write_fd_, data, size, MSG_NOSIGNAL);
  }
};

}  // namespace

std::unique_ptr<LineChannel> spawn_process_channel(const std::vector<std::string>& argv) {
  if (argv.empty()) throw InvalidArgument("oracle command is empty");
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw TransportError("pipe() failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError("pipe() failed");
  }
  // A dead child must surface as a write error, not kill the engine.
  ::signal(SIGPIPE, SIG_IGN);
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError("fork() failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<ProcessChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineChannel> connect_tcp_channel(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (auto* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw TransportError("cannot connect to " + host + ":" + service);
  return std::make_unique<SocketChannel>(fd);
}

ExternalOracle::ExternalOracle(std::unique_ptr<LineChannel> channel, ExternalOracleOptions options)
    : channel_(std::move(channel)), options_(options) {
  channel_->write_line(wire::encode_hello_request());
  auto line = channel_->read_line(options_.timeout);
  if (!line) throw TransportError("oracle handshake timed out");
  try {
    hello_ = wire::decode_hello(*line);
  } catch (const InvalidArgument& e) {
    throw TransportError(std::string("bad oracle handshake: ") + e.what());
  }
  if (hello_.embed_dim == 0 || hello_.num_classes == 0) {
    throw TransportError("oracle handshake advertises an empty embedding or class set");
  }
}

wire::Response ExternalOracle::await(std::uint64_t id) {
  if (auto it = early_.find(id); it != early_.end()) {
    auto r = std::move(it->second);
    early_.erase(it);
    return r;
  }
  while (true) {
    auto line = channel_->read_line(options_.timeout);
    if (!line) throw TransportError("oracle timed out", id);
    wire::Response r;
    try {
      r = wire::decode_response(*line);
    } catch (const InvalidArgument& e) {
      throw TransportError(std::string("protocol violation: ") + e.what(), id);
    }
    if (r.id == id) return r;
    early_.emplace(r.id, std::move(r));
  }
}

Matrix ExternalOracle::query(wire::Op op, std::span<const RasterImage> images, std::size_t cols) {
  Matrix out(images.size(), cols);
  const std::size_t chunk = hello_.max_batch == 0 ? std::max<std::size_t>(images.size(), 1)
                                                  : hello_.max_batch;
  for (std::size_t start = 0; start < images.size(); start += chunk) {
    const std::size_t count = std::min(chunk, images.size() - start);
    wire::Request request;
    request.id = next_id_++;
    request.op = op;
    request.images.assign(images.begin() + start, images.begin() + start + count);
    channel_->write_line(wire::encode_request(request));
    const auto response = await(request.id);
    if (!response.ok) throw TransportError("oracle error: " + response.error, request.id);
    if (response.vectors.rows != count || response.vectors.cols != cols) {
      throw TransportError("oracle answered with a " + std::to_string(response.vectors.rows) +
                               "x" + std::to_string(response.vectors.cols) + " matrix, expected " +
                               std::to_string(count) + "x" + std::to_string(cols),
                           request.id);
    }
    std::copy(response.vectors.values.begin(), response.vectors.values.end(),
              out.values.begin() + start * cols);
  }
  return out;
}

Matrix ExternalOracle::do_embed(std::span<const RasterImage> images) {
  return query(wire::Op::kEmbed, images, hello_.embed_dim);
}

Matrix ExternalOracle::do_probs(std::span<const RasterImage> images) {
  return query(wire::Op::kProbs, images, hello_.num_classes);
}

std::unique_ptr<ExternalOracle> open_external_oracle(std::string_view spec,
                                                     ExternalOracleOptions options) {
  if (spec.starts_with("cmd:")) {
    std::istringstream in{std::string(spec.substr(4))};
    std::vector<std::string> argv;
    for (std::string tok; in >> tok;) argv.push_back(tok);
    return std::make_unique<ExternalOracle>(spawn_process_channel(argv), options);
  }
  if (spec.starts_with("tcp:")) {
    const std::string rest(spec.substr(4));
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw InvalidArgument("expected tcp:<host>:<port>");
    const int port = std::stoi(rest.substr(colon + 1));
    if (port <= 0 || port > 65535) throw InvalidArgument("tcp port out of range");
    return std::make_unique<ExternalOracle>(
        connect_tcp_channel(rest.substr(0, colon), static_cast<std::uint16_t>(port)), options);
  }
  throw InvalidArgument("external oracle spec must start with cmd: or tcp:");
}

}  // namespace lima
