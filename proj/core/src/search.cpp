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

#include "lima/search.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <deque>
#include <limits>
#include <string>

#include "lima/errors.hpp"

namespace lima {

std::string_view to_string(SearchAlgorithm algorithm) {
  return algorithm == SearchAlgorithm::kNaive ? "naive" : "bidirectional";
}

SearchAlgorithm search_algorithm_from_string(std::string_view name) {
  if (name == "naive") return SearchAlgorithm::kNaive;
  if (name == "bi" || name == "bidirectional") return SearchAlgorithm::kBidirectional;
  throw InvalidArgument("unknown search algorithm '" + std::string(name) + "'");
}

double naive_full_sort_evaluations(std::size_t ground_set) {
  const double v = static_cast<double>(ground_set);
  return 0.5 * v * v + 0.5 * v;
}

double naive_prefix_evaluations(std::size_t ground_set, std::size_t k) {
  const double v = static_cast<double>(ground_set);
  const double kk = static_cast<double>(k);
  return kk * v - 0.5 * kk * (kk - 1.0);
}

double bidirectional_evaluations_estimate(std::size_t ground_set, std::size_t pending_negatives) {
  const double v = static_cast<double>(ground_set);
  const double np = static_cast<double>(pending_negatives);
  return 0.25 * v * v + 0.5 * v * np - 0.5 * np * np + 0.5 * np;
}

namespace {

// Tracks counters and the partial order so an oracle failure can report progress.
class SearchRun {
 public:
  explicit SearchRun(SubmodularFunction& objective)
      : objective_(objective),
        evaluations_at_start_(objective.evaluations()),
        lookups_at_start_(objective.lookups()) {}

  std::vector<double> score(const std::vector<std::vector<RegionId>>& subsets,
                            std::size_t& fresh) {
    const std::size_t before = objective_.evaluations();
    std::vector<ScoreBreakdown> scores;
    try {
      scores = objective_.evaluate_batch(subsets);
    } catch (const TransportError& e) {
      throw SearchAborted(std::string("oracle failure during search: ") + e.what(), finish());
    }
    fresh = objective_.evaluations() - before;
    std::vector<double> values(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) values[i] = scores[i].total;
    return values;
  }

  SearchResult finish() const {
    SearchResult result;
    result.order = forward_;
    result.order.insert(result.order.end(), reverse_.begin(), reverse_.end());
    result.trace = trace_;
    result.trace.evaluations = objective_.evaluations() - evaluations_at_start_;
    result.trace.lookups = objective_.lookups() - lookups_at_start_;
    return result;
  }

  std::vector<RegionId> forward_;
  std::deque<RegionId> reverse_;
  SearchTrace trace_;

 private:
  SubmodularFunction& objective_;
  std::size_t evaluations_at_start_;
  std::size_t lookups_at_start_;
};

std::vector<RegionId> remaining_ids(std::size_t n, const std::vector<bool>& used) {
  std::vector<RegionId> out;
  for (RegionId id = 0; id < n; ++id) {
    if (!used[id]) out.push_back(id);
  }
  return out;
}

// Index of the largest value; earlier (lower id) candidates win ties.
std::size_t argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t argmin(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

// One forward step over `candidates`: scores S_forward + a for each, appends the best.
// Returns the candidate values (aligned with `candidates`).
std::vector<double> forward_step(SearchRun& run, const std::vector<RegionId>& candidates,
                                 std::vector<bool>& used, double& previous_value,
                                 std::size_t& chosen_index) {
  std::vector<std::vector<RegionId>> subsets;
  subsets.reserve(candidates.size());
  for (auto a : candidates) {
    auto s = run.forward_;
    s.push_back(a);
    subsets.push_back(std::move(s));
  }
  std::size_t fresh = 0;
  auto values = run.score(subsets, fresh);
  chosen_index = argmax(values);
  const RegionId chosen = candidates[chosen_index];
  run.forward_.push_back(chosen);
  used[chosen] = true;
  run.trace_.steps.push_back({SearchStep::Direction::kForward, chosen, values[chosen_index],
                              values[chosen_index] - previous_value, candidates.size(), fresh});
  previous_value = values[chosen_index];
  return values;
}

}  // namespace

SearchResult greedy_rank(SubmodularFunction& objective) {
  const std::size_t n = objective.ground_set_size();
  SearchRun run(objective);
  std::vector<bool> used(n, false);
  double previous = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    const auto candidates = remaining_ids(n, used);
    std::size_t chosen = 0;
    forward_step(run, candidates, used, previous, chosen);
  }
  return run.finish();
}

SearchResult bidirectional_rank(SubmodularFunction& objective, std::size_t pending_negatives) {
  const std::size_t n = objective.ground_set_size();
  if (pending_negatives < 1 || pending_negatives + 1 > n) {
    throw InvalidArgument("pending negatives n_p must lie in [1, |V|-1], got " +
                          std::to_string(pending_negatives));
  }
  // ceil(|V|/2 + n_p/2)
  const std::size_t iterations = (n + pending_negatives + 1) / 2;

  SearchRun run(objective);
  std::vector<bool> used(n, false);
  double previous_forward = 0.0;
  double previous_reverse = 0.0;
  for (std::size_t i = 0; i < iterations; ++i) {
    auto candidates = remaining_ids(n, used);
    if (candidates.empty()) break;

    std::size_t chosen = 0;
    const auto values = forward_step(run, candidates, used, previous_forward, chosen);

    if (candidates.size() - 1 <= pending_negatives) continue;

    // The n_p candidates with the smallest forward values, reusing this step's scores.
    std::vector<std::size_t> rest;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (c != chosen) rest.push_back(c);
    }
    std::stable_sort(rest.begin(), rest.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    rest.resize(pending_negatives);
    std::sort(rest.begin(), rest.end());

    std::vector<RegionId> pending;
    std::vector<std::vector<RegionId>> subsets;
    for (auto c : rest) {
      pending.push_back(candidates[c]);
      std::vector<RegionId> s{candidates[c]};
      s.insert(s.end(), run.reverse_.begin(), run.reverse_.end());
      subsets.push_back(std::move(s));
    }
    std::size_t fresh = 0;
    const auto reverse_values = run.score(subsets, fresh);
    const std::size_t pick = argmin(reverse_values);
    run.reverse_.push_front(pending[pick]);
    used[pending[pick]] = true;
    run.trace_.steps.push_back({SearchStep::Direction::kReverse, pending[pick],
                                reverse_values[pick], reverse_values[pick] - previous_reverse,
                                pending.size(), fresh});
    previous_reverse = reverse_values[pick];
  }

  // The iteration bound always exhausts V; this only guards the invariant.
  for (auto candidates = remaining_ids(n, used); !candidates.empty();
       candidates = remaining_ids(n, used)) {
    std::size_t chosen = 0;
    forward_step(run, candidates, used, previous_forward, chosen);
  }
  return run.finish();
}

SearchResult rank_regions(SubmodularFunction& objective, const SearchConfig& config) {
  if (config.algorithm == SearchAlgorithm::kNaive) return greedy_rank(objective);
  return bidirectional_rank(objective, config.pending_negatives);
}

BoundReport verify_bound(SubmodularFunction& objective, std::size_t k,
                         std::span<const RegionId> order) {
  const std::size_t n = objective.ground_set_size();
  if (n > 15) throw InvalidArgument("exhaustive bound check needs |V| <= 15");
  if (k < 1 || k > n || order.size() < k) {
    throw InvalidArgument("bound check needs 1 <= k <= |V| and an order of at least k regions");
  }
  std::vector<std::vector<RegionId>> subsets;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    std::vector<RegionId> s;
    for (RegionId id = 0; id < n; ++id) {
      if (mask & (1u << id)) s.push_back(id);
    }
    subsets.push_back(std::move(s));
  }
  const auto scores = objective.evaluate_batch(subsets);
  BoundReport report;
  report.optimum = -std::numeric_limits<double>::infinity();
  for (const auto& s : scores) report.optimum = std::max(report.optimum, s.total);
  report.achieved = objective.value(order.first(k));
  report.ratio = report.optimum != 0.0 ? report.achieved / report.optimum : 1.0;
  return report;
}

}  // namespace lima
