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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "lima/image.hpp"

namespace lima {

// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// Number of images sent through each query kind.
struct OracleCallLog {
  std::uint64_t embed_calls = 0;
  std::uint64_t prob_calls = 0;
};

// The model under explanation. Every score the engine computes goes through
// embed() and probs(); both count one unit per image.
class ModelOracle {
 public:
  virtual ~ModelOracle() = default;

  virtual std::size_t embed_dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  // False means callers may not overlap batches; the base class then serializes them.
  virtual bool concurrent_batches() const { return true; }
  // Classifier weight row for class k, when the model exposes one.
  virtual std::optional<std::vector<double>> class_row(std::size_t /*k*/) const {
    return std::nullopt;
  }

  // One finite row of length embed_dim() per image.
  Matrix embed(std::span<const RasterImage> images);
  // One probability row of length num_classes() per image.
  Matrix probs(std::span<const RasterImage> images);

  OracleCallLog call_log() const {
    return {embed_calls_.load(), prob_calls_.load()};
  }

 protected:
  virtual Matrix do_embed(std::span<const RasterImage> images) = 0;
  virtual Matrix do_probs(std::span<const RasterImage> images) = 0;

 private:
  std::atomic<std::uint64_t> embed_calls_{0};
  std::atomic<std::uint64_t> prob_calls_{0};
  std::mutex single_flight_;
};

enum class TargetSource { kFullImageEmbedding, kClassifierRow, kUserSupplied };

// Unit-norm direction the search pulls the composite embedding towards.
struct SemanticTarget {
  std::vector<double> vector;
  TargetSource source = TargetSource::kUserSupplied;
};

struct TargetFromImage {
  RasterImage image;
};
struct TargetClassRow {
  std::size_t class_index = 0;
};
struct TargetVector {
  std::vector<double> values;
};
using TargetSpec = std::variant<TargetFromImage, TargetClassRow, TargetVector>;

// Throws InvalidArgument on a zero-norm source, an oracle without classifier rows,
// or a length that differs from embed_dim().
SemanticTarget make_semantic_target(ModelOracle& oracle, const TargetSpec& spec);

// Index of the largest probability of probs(image); ties go to the lowest class.
std::size_t predicted_class(ModelOracle& oracle, const RasterImage& image);

}  // namespace lima
