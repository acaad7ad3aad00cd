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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "lima/division.hpp"
#include "lima/errors.hpp"
#include "lima/search.hpp"
#include "lima/synthetic_oracles.hpp"

namespace lima {
namespace {

using testing::make_planted_fixture;
using testing::random_image;

bool is_permutation_of_v(const std::vector<RegionId>& order, std::size_t n) {
  std::vector<RegionId> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<RegionId> ids(n);
  std::iota(ids.begin(), ids.end(), 0u);
  return sorted == ids;
}

struct PrototypeSetup {
  std::unique_ptr<LinearPrototypeOracle> oracle;
  RasterImage image;
  Division division;
  SemanticTarget target;
};

PrototypeSetup prototype_setup(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  PrototypeSetup s;
  s.image = random_image(rows * 2, cols * 2, 1, seed);
  s.oracle = LinearPrototypeOracle::random(rows * 2, cols * 2, 1, 3, 16, seed + 1000);
  s.division = divide_grid(s.image, rows, cols);
  s.target = make_semantic_target(*s.oracle, TargetFromImage{s.image});
  return s;
}

// Fails every request once `budget` images have been answered.
class FlakyOracle final : public ModelOracle {
 public:
  FlakyOracle(ModelOracle& inner, std::size_t budget) : inner_(inner), budget_(budget) {}
  std::size_t embed_dim() const override { return inner_.embed_dim(); }
  std::size_t num_classes() const override { return inner_.num_classes(); }
  std::optional<std::vector<double>> class_row(std::size_t k) const override {
    return inner_.class_row(k);
  }

 protected:
  Matrix do_embed(std::span<const RasterImage> images) override {
    spend(images.size());
    return inner_.embed(images);
  }
  Matrix do_probs(std::span<const RasterImage> images) override {
    spend(images.size());
    return inner_.probs(images);
  }

 private:
  void spend(std::size_t n) {
    if (used_ + n > budget_) throw TransportError("injected failure", 77);
    used_ += n;
  }
  ModelOracle& inner_;
  std::size_t budget_;
  std::size_t used_ = 0;
};

TEST(ClosedFormTest, Counts) {
  EXPECT_EQ(naive_full_sort_evaluations(6), 21.0);
  EXPECT_EQ(naive_full_sort_evaluations(49), 1225.0);
  EXPECT_EQ(naive_prefix_evaluations(10, 3), 27.0);
  EXPECT_EQ(naive_prefix_evaluations(6, 6), 21.0);
  EXPECT_EQ(bidirectional_evaluations_estimate(6, 1), 12.0);
  EXPECT_EQ(bidirectional_evaluations_estimate(49, 8), 768.25);
}

TEST(SearchAlgorithmTest, Names) {
  EXPECT_EQ(search_algorithm_from_string("naive"), SearchAlgorithm::kNaive);
  EXPECT_EQ(search_algorithm_from_string("bi"), SearchAlgorithm::kBidirectional);
  EXPECT_EQ(to_string(SearchAlgorithm::kBidirectional), "bidirectional");
  EXPECT_THROW(search_algorithm_from_string("lazy"), InvalidArgument);
}

TEST(GreedyRankTest, ModularOracleSortsByWeight) {
  auto fx = make_planted_fixture(2, 2, {1.0, 5.0, 0.0, 3.0});
  SubmodularFunction f(fx.image, fx.division, *fx.oracle,
                       make_semantic_target(*fx.oracle, TargetClassRow{0}));
  const auto r = greedy_rank(f);
  EXPECT_EQ(r.order, (std::vector<RegionId>{1, 3, 0, 2}));
}

TEST(GreedyRankTest, ExactEvaluationCounts) {
  for (std::size_t cols : {3u, 5u}) {
    auto s = prototype_setup(2, cols, cols);
    SubmodularFunction f(s.image, s.division, *s.oracle, s.target);
    const auto r = greedy_rank(f);
    const std::size_t n = 2 * cols;
    EXPECT_EQ(r.trace.evaluations, n * (n + 1) / 2);
    EXPECT_EQ(f.evaluations(), n * (n + 1) / 2);
    EXPECT_TRUE(is_permutation_of_v(r.order, n));
    EXPECT_EQ(r.trace.steps.size(), n);
  }
}

TEST(GreedyRankTest, TraceReconcilesWithOracleLog) {
  auto s = prototype_setup(2, 4, 3);
  SubmodularFunction f(s.image, s.division, *s.oracle, s.target);
  const auto before = s.oracle->call_log();
  const auto r = greedy_rank(f);
  const auto after = s.oracle->call_log();
  EXPECT_EQ(after.embed_calls - before.embed_calls, 2 * r.trace.evaluations + 8);
  EXPECT_EQ(after.prob_calls - before.prob_calls, r.trace.evaluations);
  std::size_t per_step = 0;
  for (const auto& step : r.trace.steps) per_step += step.evaluations;
  EXPECT_EQ(per_step, r.trace.evaluations);
}

TEST(GreedyRankTest, PrefixMeetsTheGreedyBound) {
  auto s = prototype_setup(2, 5, 12);
  SubmodularFunction f(s.image, s.division, *s.oracle, s.target, Lambdas{1, 0, 0, 0});
  const auto r = greedy_rank(f);
  const auto bound = verify_bound(f, 3, r.order);
  EXPECT_GE(bound.ratio, 1.0 - 1.0 / std::exp(1.0));
  EXPECT_LE(bound.achieved, bound.optimum + 1e-12);
}

TEST(GreedyRankTest, TiesGoToLowestId) {
  auto fx = make_planted_fixture(1, 4, {1.0, 1.0, 1.0, 1.0});
  SubmodularFunction f(fx.image, fx.division, *fx.oracle,
                       make_semantic_target(*fx.oracle, TargetClassRow{0}));
  EXPECT_EQ(greedy_rank(f).order, (std::vector<RegionId>{0, 1, 2, 3}));
}

TEST(BidirectionalRankTest, SixRegionsOnePending) {
  auto s = prototype_setup(2, 3, 5);
  SubmodularFunction f(s.image, s.division, *s.oracle, s.target);
  const auto r = bidirectional_rank(f, 1);
  EXPECT_TRUE(is_permutation_of_v(r.order, 6));
  EXPECT_NEAR(static_cast<double>(r.trace.evaluations), bidirectional_evaluations_estimate(6, 1),
              6.0);
}

TEST(BidirectionalRankTest, FortyNineRegionsEightPending) {
  auto fx = make_planted_fixture(7, 7, std::vector<double>(49, 1.0), 2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (auto& w : fx.weights) w = u(rng);
  fx.oracle = PlantedRegionOracle::from_region_weights(fx.image, fx.division, fx.weights);
  SubmodularFunction f(fx.image, fx.division, *fx.oracle,
                       make_semantic_target(*fx.oracle, TargetClassRow{0}));
  const auto r = bidirectional_rank(f, 8);
  EXPECT_TRUE(is_permutation_of_v(r.order, 49));
  const double formula = bidirectional_evaluations_estimate(49, 8);
  EXPECT_NEAR(static_cast<double>(r.trace.evaluations), formula, 49.0);
  EXPECT_NEAR(static_cast<double>(r.trace.evaluations) / 1225.0, 768.0 / 1225.0, 0.03);
}

TEST(BidirectionalRankTest, PermutationForEveryPendingCount) {
  for (std::size_t cols : {2u, 3u, 4u, 5u}) {
    const std::size_t n = 2 * cols;
    for (std::size_t np = 1; np < n; ++np) {
      auto s = prototype_setup(2, cols, 40 + np);
      SubmodularFunction f(s.image, s.division, *s.oracle, s.target);
      const auto r = bidirectional_rank(f, np);
      EXPECT_TRUE(is_permutation_of_v(r.order, n)) << "n=" << n << " np=" << np;
    }
  }
}

TEST(BidirectionalRankTest, RejectsBadPendingCounts) {
  auto s = prototype_setup(2, 2, 1);
  SubmodularFunction f(s.image, s.division, *s.oracle, s.target);
  EXPECT_THROW(bidirectional_rank(f, 0), InvalidArgument);
  EXPECT_THROW(bidirectional_rank(f, 4), InvalidArgument);
  EXPECT_NO_THROW(bidirectional_rank(f, 3));
}

TEST(BidirectionalRankTest, ForwardPrefixMatchesGreedyOnModularOracle) {
  auto fx = make_planted_fixture(2, 4, {0.3, 2.0, 0.9, 1.4, 0.1, 0.6, 1.1, 0.05});
  const auto target = make_semantic_target(*fx.oracle, TargetClassRow{0});
  SubmodularFunction g(fx.image, fx.division, *fx.oracle, target);
  SubmodularFunction b(fx.image, fx.division, *fx.oracle, target);
  const auto greedy = greedy_rank(g);
  const auto bi = bidirectional_rank(b, 2);
  std::size_t forward = 0;
  for (const auto& step : bi.trace.steps) {
    if (step.direction == SearchStep::Direction::kForward) ++forward;
  }
  ASSERT_GT(forward, 0u);
  for (std::size_t i = 0; i < forward; ++i) EXPECT_EQ(bi.order[i], greedy.order[i]);
}

TEST(BidirectionalRankTest, Deterministic) {
  auto s = prototype_setup(3, 3, 8);
  SubmodularFunction a(s.image, s.division, *s.oracle, s.target);
  SubmodularFunction b(s.image, s.division, *s.oracle, s.target);
  const auto ra = bidirectional_rank(a, 3);
  const auto rb = bidirectional_rank(b, 3);
  EXPECT_EQ(ra.order, rb.order);
  ASSERT_EQ(ra.trace.steps.size(), rb.trace.steps.size());
  for (std::size_t i = 0; i < ra.trace.steps.size(); ++i) {
    EXPECT_EQ(ra.trace.steps[i].chosen, rb.trace.steps[i].chosen);
    EXPECT_EQ(ra.trace.steps[i].value, rb.trace.steps[i].value);
  }
  EXPECT_EQ(ra.trace.evaluations, rb.trace.evaluations);
}

TEST(SearchPropertyTest, StepValuesRiseWhileGainsArePositive) {
  auto fx = make_planted_fixture(2, 3, {6, 5, 4, 3, 2, 1});
  SubmodularFunction f(fx.image, fx.division, *fx.oracle,
                       make_semantic_target(*fx.oracle, TargetClassRow{0}));
  const auto r = greedy_rank(f);
  double previous = -1e300;
  for (const auto& step : r.trace.steps) {
    if (step.gain <= 0.0) break;
    EXPECT_GE(step.value, previous - 1e-9);
    previous = step.value;
  }
}

TEST(SearchFailureTest, OracleFailureAbortsWithPartialTrace) {
  auto s = prototype_setup(2, 3, 6);
  FlakyOracle flaky(*s.oracle, 40);
  SubmodularFunction f(s.image, s.division, flaky, s.target);
  try {
    greedy_rank(f);
    FAIL() << "expected SearchAborted";
  } catch (const SearchAborted& e) {
    EXPECT_FALSE(e.partial().trace.steps.empty());
    EXPECT_LT(e.partial().order.size(), 6u);
  }
}

TEST(VerifyBoundTest, ModularAndFullSet) {
  auto fx = make_planted_fixture(2, 3, {0.5, 3, 1, 2, 0.2, 4});
  SubmodularFunction f(fx.image, fx.division, *fx.oracle,
                       make_semantic_target(*fx.oracle, TargetClassRow{0}));
  const auto r = greedy_rank(f);
  EXPECT_DOUBLE_EQ(verify_bound(f, 2, r.order).ratio, 1.0);
  EXPECT_DOUBLE_EQ(verify_bound(f, 6, r.order).ratio, 1.0);
}

TEST(VerifyBoundTest, ConsistencyOnlyEightRegions) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = prototype_setup(2, 4, 200 + seed);
    SubmodularFunction f(s.image, s.division, *s.oracle, s.target, Lambdas{1, 0, 0, 0});
    const auto r = greedy_rank(f);
    EXPECT_GE(verify_bound(f, 3, r.order).ratio, 1.0 - 1.0 / std::exp(1.0));
  }
}

TEST(VerifyBoundTest, Limits) {
  auto s = prototype_setup(4, 4, 1);
  SubmodularFunction f(s.image, s.division, *s.oracle, s.target);
  std::vector<RegionId> order(16);
  std::iota(order.begin(), order.end(), 0u);
  EXPECT_THROW(verify_bound(f, 3, order), InvalidArgument);
  auto small = prototype_setup(2, 2, 1);
  SubmodularFunction g(small.image, small.division, *small.oracle, small.target);
  const std::vector<RegionId> four{0, 1, 2, 3};
  EXPECT_THROW(verify_bound(g, 0, four), InvalidArgument);
  EXPECT_THROW(verify_bound(g, 5, four), InvalidArgument);
}

}  // namespace
}  // namespace lima
