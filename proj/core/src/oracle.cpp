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

#include "lima/oracle.hpp"

#include <cmath>
#include <string>

#include "lima/errors.hpp"

namespace lima {
namespace {

constexpr double kSimplexTolerance = 1e-6;

void check_embedding(const Matrix& m, std::size_t batch, std::size_t dim) {
  if (m.rows != batch || m.cols != dim) {
    throw TransportError("oracle returned a " + std::to_string(m.rows) + "x" +
                         std::to_string(m.cols) + " embedding matrix, expected " +
                         std::to_string(batch) + "x" + std::to_string(dim));
  }
  for (double v : m.values) {
    if (!std::isfinite(v)) throw TransportError("oracle returned a non-finite embedding");
  }
}

void check_probabilities(const Matrix& m, std::size_t batch, std::size_t classes) {
  if (m.rows != batch || m.cols != classes) {
    throw TransportError("oracle returned a " + std::to_string(m.rows) + "x" +
                         std::to_string(m.cols) + " probability matrix, expected " +
                         std::to_string(batch) + "x" + std::to_string(classes));
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    double sum = 0.0;
    for (double p : m.row(i)) {
      if (!std::isfinite(p) || p < 0.0) {
        throw TransportError("oracle returned a negative or non-finite probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw TransportError("oracle probability row " + std::to_string(i) + " sums to " +
                           std::to_string(sum));
    }
  }
}

std::vector<double> normalized(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidArgument("semantic target source vector has zero norm");
  }
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

Matrix ModelOracle::embed(std::span<const RasterImage> images) {
  std::unique_lock<std::mutex> lock(single_flight_, std::defer_lock);
  if (!concurrent_batches()) lock.lock();
  Matrix out = do_embed(images);
  check_embedding(out, images.size(), embed_dim());
  embed_calls_ += images.size();
  return out;
}

Matrix ModelOracle::probs(std::span<const RasterImage> images) {
  std::unique_lock<std::mutex> lock(single_flight_, std::defer_lock);
  if (!concurrent_batches()) lock.lock();
  Matrix out = do_probs(images);
  check_probabilities(out, images.size(), num_classes());
  prob_calls_ += images.size();
  return out;
}

SemanticTarget make_semantic_target(ModelOracle& oracle, const TargetSpec& spec) {
  SemanticTarget target;
  if (const auto* from_image = std::get_if<TargetFromImage>(&spec)) {
    const Matrix e = oracle.embed(std::span<const RasterImage>(&from_image->image, 1));
    target.vector = normalized({e.row(0).begin(), e.row(0).end()});
    target.source = TargetSource::kFullImageEmbedding;
  } else if (const auto* class_row = std::get_if<TargetClassRow>(&spec)) {
    if (class_row->class_index >= oracle.num_classes()) {
      throw InvalidArgument("class index " + std::to_string(class_row->class_index) +
                            " out of range");
    }
    auto row = oracle.class_row(class_row->class_index);
    if (!row) throw InvalidArgument("oracle does not expose classifier rows");
    target.vector = normalized(std::move(*row));
    target.source = TargetSource::kClassifierRow;
  } else {
    target.vector = normalized(std::get<TargetVector>(spec).values);
    target.source = TargetSource::kUserSupplied;
  }
  if (target.vector.size() != oracle.embed_dim()) {
    throw InvalidArgument("semantic target has length " + std::to_string(target.vector.size()) +
                          " but the oracle embeds into " + std::to_string(oracle.embed_dim()));
  }
  return target;
}

std::size_t predicted_class(ModelOracle& oracle, const RasterImage& image) {
  const Matrix p = oracle.probs(std::span<const RasterImage>(&image, 1));
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.cols; ++k) {
    if (p(0, k) > p(0, best)) best = k;
  }
  return best;
}

}  // namespace lima
