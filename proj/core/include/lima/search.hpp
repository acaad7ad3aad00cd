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
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lima/image.hpp"
#include "lima/submodular.hpp"

namespace lima {

enum class SearchAlgorithm { kNaive, kBidirectional };

std::string_view to_string(SearchAlgorithm algorithm);
SearchAlgorithm search_algorithm_from_string(std::string_view name);

struct SearchConfig {
  SearchAlgorithm algorithm = SearchAlgorithm::kBidirectional;
  // Pending negative samples per bidirectional step; 1 <= n_p <= |V|-1.
  std::size_t pending_negatives = 8;
  // Reserved: both searches are deterministic (ties go to the lowest region id).
  std::uint64_t seed = 0;
};

struct SearchStep {
  enum class Direction { kForward, kReverse };
  Direction direction = Direction::kForward;
  RegionId chosen = 0;
  // Forward: F(S_forward + chosen). Reverse: F({chosen} + S_reverse).
  double value = 0.0;
  // Forward: value minus the previous forward value (F of the empty set taken as 0).
  // Reverse: value minus the previous reverse value.
  double gain = 0.0;
  // Candidates scored in this batch.
  std::size_t candidates = 0;
  // Of those, how many went to the oracle (memo misses).
  std::size_t evaluations = 0;
};

struct SearchTrace {
  std::vector<SearchStep> steps;
  // Oracle-backed subset evaluations performed by the search.
  std::size_t evaluations = 0;
  // Subset values requested by the search, cached or not.
  std::size_t lookups = 0;
};

struct SearchResult {
  // Most to least important.
  std::vector<RegionId> order;
  SearchTrace trace;
};

// Thrown when the oracle fails mid-search; carries the steps completed so far.
class SearchAborted : public std::runtime_error {
 public:
  SearchAborted(const std::string& what, SearchResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SearchResult& partial() const noexcept { return partial_; }

 private:
  SearchResult partial_;
};

// Full greedy sort: step i picks the argmax of F(S + a) over remaining regions.
// Performs exactly |V|(|V|+1)/2 subset evaluations on a cold cache.
SearchResult greedy_rank(SubmodularFunction& objective);

// Bidirectional greedy: grows the most-important prefix and, from the n_p
// smallest-gain candidates of each step, the least-important suffix.
SearchResult bidirectional_rank(SubmodularFunction& objective, std::size_t pending_negatives);

SearchResult rank_regions(SubmodularFunction& objective, const SearchConfig& config);

// Closed-form evaluation counts.
double naive_full_sort_evaluations(std::size_t ground_set);
double naive_prefix_evaluations(std::size_t ground_set, std::size_t k);
double bidirectional_evaluations_estimate(std::size_t ground_set, std::size_t pending_negatives);

struct BoundReport {
  double achieved = 0.0;
  double optimum = 0.0;
  double ratio = 0.0;
};

// F(first k of order) against the best size-k subset found by exhaustive
// enumeration; requires |V| <= 15.
BoundReport verify_bound(SubmodularFunction& objective, std::size_t k,
                         std::span<const RegionId> order);

}  // namespace lima
