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

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "lima/image.hpp"
#include "lima/oracle.hpp"

namespace lima {

// Weights of the four score terms.
struct Lambdas {
  double consistency = 20.0;
  double collaboration = 5.0;
  double confidence = 0.05;
  double effectiveness = 0.01;

  // Throws InvalidArgument unless all four are finite and non-negative.
  void validate() const;
  friend bool operator==(const Lambdas&, const Lambdas&) = default;
};

struct ScoreBreakdown {
  double total = 0.0;
  double consistency = 0.0;
  double collaboration = 0.0;
  double confidence = 0.0;
  double effectiveness = 0.0;

  friend bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

inline constexpr double kZeroNormGuard = 1e-12;

// Cosine similarity; 0 when either vector has norm below kZeroNormGuard.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// 1 + sum p log p / log C with 0 log 0 = 0. Throws InvalidArgument for C < 2 or a
// row that does not sum to 1 within 1e-6.
double confidence_score(std::span<const double> prob_row);

// Sum over members of the smallest cosine distance (1 - cosine) to any other
// member. Singletons and the empty set score 0.
double effectiveness_score(std::span<const std::span<const double>> embeddings);

// Canonical (order-independent) key of a region subset.
class SubsetKey {
 public:
  SubsetKey(std::size_t universe, std::span<const RegionId> subset);
  friend bool operator==(const SubsetKey&, const SubsetKey&) = default;
  std::size_t hash() const noexcept;

 private:
  std::vector<std::uint64_t> words_;
};

struct SubsetKeyHash {
  std::size_t operator()(const SubsetKey& k) const noexcept { return k.hash(); }
};

// The combined set function
//   F(S) = l1 cons(S) + l2 colla(S) + l3 conf(composite(S)) + l4 eff(S)
// over the regions of one division, evaluated through the oracle. A fresh
// evaluation costs two embed images (composite and complement) and one probs
// image; results are memoized by subset. Single-region embeddings used by the
// effectiveness term are fetched once (one embed image per region).
class SubmodularFunction {
 public:
  SubmodularFunction(RasterImage image, Division division, ModelOracle& oracle,
                     SemanticTarget target, Lambdas lambdas = {});

  const RasterImage& image() const noexcept { return image_; }
  const Division& division() const noexcept { return division_; }
  ModelOracle& oracle() const noexcept { return *oracle_; }
  const SemanticTarget& target() const noexcept { return target_; }
  const Lambdas& lambdas() const noexcept { return lambdas_; }
  std::size_t ground_set_size() const noexcept { return division_.size(); }

  ScoreBreakdown evaluate(std::span<const RegionId> subset);
  // All uncached subsets go to the oracle as one embed batch and one probs batch.
  std::vector<ScoreBreakdown> evaluate_batch(std::span<const std::vector<RegionId>> subsets);

  double value(std::span<const RegionId> subset) { return evaluate(subset).total; }
  double consistency_score(std::span<const RegionId> subset) {
    return evaluate(subset).consistency;
  }
  double collaboration_score(std::span<const RegionId> subset) {
    return evaluate(subset).collaboration;
  }
  // Requires a non-empty subset.
  double effectiveness_score(std::span<const RegionId> subset);

  // Single-region embeddings, fetched on first use.
  const Matrix& region_embeddings();

  // Oracle-backed subset evaluations so far (memo misses).
  std::size_t evaluations() const;
  // Subset lookups so far, cached or not.
  std::size_t lookups() const;
  // Regions embedded for the effectiveness cache (0 or |V|).
  std::size_t region_embedding_count() const;

  // Disabling memoization makes every lookup hit the oracle.
  void set_memoization(bool enabled) { memoize_ = enabled; }
  void clear_cache();

 private:
  ScoreBreakdown combine(std::span<const RegionId> subset, std::span<const double> composite_embedding,
                         std::span<const double> complement_embedding,
                         std::span<const double> prob_row);

  RasterImage image_;
  Division division_;
  ModelOracle* oracle_;
  SemanticTarget target_;
  Lambdas lambdas_;
  bool memoize_ = true;

  mutable std::mutex mutex_;
  std::unordered_map<SubsetKey, ScoreBreakdown, SubsetKeyHash> memo_;
  std::size_t evaluations_ = 0;
  std::size_t lookups_ = 0;

  std::once_flag region_once_;
  Matrix region_embeddings_;
  bool region_ready_ = false;
};

}  // namespace lima
