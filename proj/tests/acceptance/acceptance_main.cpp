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

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
// Uses builtin oracles only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lima/attribution.hpp"
#include "lima/division.hpp"
#include "lima/metrics.hpp"
#include "lima/result_io.hpp"
#include "lima/search.hpp"
#include "lima/submodular.hpp"
#include "lima/synthetic_oracles.hpp"

namespace lima {
namespace {

using Clock = std::chrono::steady_clock;
using testing::make_planted_fixture;
using testing::random_image;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SubmodularFunction planted_objective(testing::PlantedFixture& fx, Lambdas lambdas = {}) {
  return SubmodularFunction(fx.image, fx.division, *fx.oracle,
                            make_semantic_target(*fx.oracle, TargetClassRow{0}), lambdas);
}

Outcome naive_call_counts() {
  Outcome o;
  const auto start = Clock::now();
  for (std::size_t n : {6u, 10u, 49u}) {
    const std::size_t side = n == 49 ? 7 : 2;
    auto fx = make_planted_fixture(side, n / side, std::vector<double>(n, 1.0), 2);
    auto f = planted_objective(fx);
    const auto r = greedy_rank(f);
    const auto expected = static_cast<std::size_t>(naive_full_sort_evaluations(n));
    o.detail << " |V|=" << n << ":" << r.trace.evaluations << "/" << expected;
    o.check(r.trace.evaluations == expected, "count at |V|=" + std::to_string(n));
    o.check(f.evaluations() == expected, "objective count at |V|=" + std::to_string(n));
  }
  o.check(naive_full_sort_evaluations(49) == 1225.0, "closed form at 49");
  const double t = seconds_since(start);
  o.detail << " time=" << t << "s";
  o.check(t < 1.0, "runtime");
  return o;
}

Outcome bidirectional_savings() {
  Outcome o;
  auto fx = make_planted_fixture(7, 7, std::vector<double>(49, 1.0), 2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(49);
  for (auto& x : w) x = u(rng);
  fx.oracle = PlantedRegionOracle::from_region_weights(fx.image, fx.division, w);
  auto f = planted_objective(fx);
  const auto r = bidirectional_rank(f, 8);
  const double evals = static_cast<double>(r.trace.evaluations);
  const double formula = bidirectional_evaluations_estimate(49, 8);
  const double ratio = evals / naive_full_sort_evaluations(49);
  o.detail << " evaluations=" << evals << " formula=" << formula << " ratio=" << ratio;
  o.check(std::abs(evals - formula) <= 49.0, "within 49 of the formula");
  o.check(std::abs(ratio - 0.627) <= 0.03, "ratio");
  return o;
}

Outcome optimality_bound() {
  Outcome o;
  const auto start = Clock::now();
  const double bound = 1.0 - 1.0 / std::exp(1.0);
  int greedy_ok = 0, bi_ok = 0;
  const int trials = 50;
  for (int seed = 0; seed < trials; ++seed) {
    const auto image = random_image(4, 10, 1, 500 + seed);
    auto oracle = LinearPrototypeOracle::random(4, 10, 1, 3, 16, 900 + seed);
    const auto division = divide_grid(image, 2, 5);
    const auto target = make_semantic_target(*oracle, TargetFromImage{image});
    SubmodularFunction f(image, division, *oracle, target, Lambdas{1, 0, 0, 0});
    if (verify_bound(f, 3, greedy_rank(f).order).ratio >= bound) ++greedy_ok;
    if (verify_bound(f, 3, bidirectional_rank(f, 4).order).ratio >= bound - 0.05) ++bi_ok;
  }
  const double t = seconds_since(start);
  o.detail << " greedy=" << greedy_ok << "/" << trials << " bidirectional=" << bi_ok << "/"
           << trials << " time=" << t << "s";
  o.check(greedy_ok == trials, "greedy in every trial");
  o.check(bi_ok >= 48, "bidirectional in 95% of trials");
  o.check(t < 30.0, "runtime");
  return o;
}

Outcome submodularity_checks() {
  Outcome o;
  const auto start = Clock::now();
  auto fx = make_planted_fixture(2, 3, {6, 5, 4, 3, 2, 1});
  auto f = planted_objective(fx);
  const auto subsets = testing::all_subsets(6);
  std::vector<double> value(subsets.size());
  for (std::size_t m = 0; m < subsets.size(); ++m) value[m] = f.value(subsets[m]);
  std::size_t chains = 0, dr_fail = 0, mono_fail = 0;
  for (std::size_t b = 0; b < subsets.size(); ++b) {
    for (std::size_t a = b;; a = (a - 1) & b) {
      for (std::size_t alpha = 0; alpha < 6; ++alpha) {
        const std::size_t bit = std::size_t{1} << alpha;
        if (b & bit) continue;
        const double gain_a = value[a | bit] - value[a];
        const double gain_b = value[b | bit] - value[b];
        if (value[a | bit] < value[a] - 1e-9) ++mono_fail;
        if (gain_a > 0.0 && gain_a < gain_b - 1e-9) ++dr_fail;
        ++chains;
      }
      if (a == 0) break;
    }
  }
  const double t = seconds_since(start);
  o.detail << " chains=" << chains << " diminishing_returns_violations=" << dr_fail
           << " monotonicity_violations=" << mono_fail << " time=" << t << "s";
  o.check(dr_fail == 0, "diminishing returns");
  o.check(mono_fail == 0, "monotonicity");
  o.check(t < 5.0, "runtime");
  return o;
}

FaithfulnessCurve curve(std::vector<std::size_t> t, std::vector<double> v) {
  return {RevealSchedule(std::move(t)), std::move(v), CurveMode::kInsertion};
}

Outcome metric_oracles() {
  Outcome o;
  struct Fixture {
    std::vector<std::size_t> t;
    std::vector<double> v;
    double expected;
  };
  const std::vector<Fixture> fixtures{{{0, 1, 2}, {1, 1, 1}, 1.0},
                                      {{0, 1, 2, 3, 4}, {0, 0.25, 0.5, 0.75, 1}, 0.5},
                                      {{0, 1, 2}, {1, 0, 0}, 0.25},
                                      {{0, 1, 2}, {0, 1, 1}, 0.75},
                                      {{0, 2, 3}, {0, 0, 0}, 0.0},
                                      {{0, 1, 4}, {0, 1, 1}, 0.875}};
  double worst = 0.0;
  for (const auto& fx : fixtures) {
    worst = std::max(worst, std::abs(curve_auc(curve(fx.t, fx.v)) - fx.expected));
  }
  o.detail << " max_auc_error=" << worst;
  o.check(worst <= 1e-12, "trapezoid fixtures");

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double mirror = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> t{0};
    std::vector<double> v{u(rng)}, m{1.0 - v[0]};
    for (int i = 0; i < 12; ++i) {
      t.push_back(t.back() + 1 + rng() % 5);
      v.push_back(u(rng));
      m.push_back(1.0 - v.back());
    }
    mirror = std::max(mirror, std::abs(curve_auc(curve(t, v)) + curve_auc(curve(t, m)) - 1.0));
  }
  o.detail << " mirror_error=" << mirror;
  o.check(mirror <= 1e-12, "mirror identity");

  // Values on a 1/64 lattice over a power-of-two span: every operation is exact.
  bool mirror_exact = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> t(17);
    std::iota(t.begin(), t.end(), 0u);
    std::vector<double> v(17), m(17);
    for (std::size_t i = 0; i < 17; ++i) {
      v[i] = static_cast<double>(rng() % 65) / 64.0;
      m[i] = 1.0 - v[i];
    }
    mirror_exact = mirror_exact && curve_auc(curve(t, v)) + curve_auc(curve(t, m)) == 1.0;
  }
  o.detail << " mirror_lattice=" << (mirror_exact ? "exact" : "inexact");
  o.check(mirror_exact, "exact mirror identity");

  const std::vector<double> w{6, 5, 4, 3, 2, 1, 0.5, 7};
  auto fx = make_planted_fixture(2, 4, w);
  MuFidelityConfig config;
  config.subset_size = 3;
  const auto fid = mu_fidelity(w, *fx.oracle, fx.image, fx.division, 0, config);
  o.detail << " mufidelity=" << fid.value;
  o.check(std::abs(fid.value - 1.0) <= 1e-9 && !fid.degenerate, "mufidelity on a linear oracle");
  return o;
}

Outcome end_to_end_separation() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  int ins_wins = 0, del_wins = 0;
  for (int instance = 0; instance < 20; ++instance) {
    std::vector<double> w(16);
    for (auto& x : w) x = weight(rng);
    auto fx = make_planted_fixture(4, 4, w);
    auto f = planted_objective(fx);
    const auto engine = bidirectional_rank(f, 8).order;
    auto auc = [&](std::span<const RegionId> order, CurveMode mode) {
      return curve_auc(build_curve(*fx.oracle, fx.image, fx.division, order, 0, mode));
    };
    double random_ins = 0.0, random_del = 0.0;
    std::vector<RegionId> shuffled(16);
    std::iota(shuffled.begin(), shuffled.end(), 0u);
    for (int draw = 0; draw < 20; ++draw) {
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      random_ins += auc(shuffled, CurveMode::kInsertion) / 20.0;
      random_del += auc(shuffled, CurveMode::kDeletion) / 20.0;
    }
    if (auc(engine, CurveMode::kInsertion) > random_ins) ++ins_wins;
    if (auc(engine, CurveMode::kDeletion) < random_del) ++del_wins;
  }
  o.detail << " insertion_wins=" << ins_wins << "/20 deletion_wins=" << del_wins << "/20";
  o.check(ins_wins >= 18, "insertion");
  o.check(del_wins >= 18, "deletion");
  return o;
}

Outcome score_assignment() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> step(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> sums(1 + rng() % 64);
    double acc = 0.0;
    for (auto& s : sums) s = acc += step(rng);
    const auto a = assign_scores(sums, 1.0);
    for (std::size_t i = 1; i < a.size(); ++i) violations += a[i] > a[i - 1];
  }
  o.detail << " monotonicity_violations=" << violations;
  o.check(violations == 0, "monotone");
  const std::vector<double> sums{0.2, 0.5, 0.6, 0.55};
  const auto a = assign_scores(sums, 1.0);
  const bool exact = a == std::vector<double>{1.0, 0.7, 0.6, 0.55};
  o.detail << " worked_example=" << (exact ? "exact" : "mismatch");
  o.check(exact, "worked example");
  return o;
}

bool is_partition(const Division& d) {
  const std::size_t n = d.height() * d.width();
  std::vector<int> owner(n, -1);
  for (const auto& r : d.regions()) {
    if (r.area() == 0) return false;
    const auto bits = r.bits();
    for (std::size_t p = 0; p < n; ++p) {
      if (!bits[p]) continue;
      if (owner[p] != -1) return false;
      owner[p] = static_cast<int>(r.id());
    }
  }
  return std::find(owner.begin(), owner.end(), -1) == owner.end();
}

RegionMask rect(RegionId id, std::size_t h, std::size_t w, std::size_t y0, std::size_t x0,
                std::size_t rh, std::size_t rw) {
  std::vector<std::uint32_t> px;
  for (std::size_t y = y0; y < y0 + rh; ++y) {
    for (std::size_t x = x0; x < x0 + rw; ++x) px.push_back(static_cast<std::uint32_t>(y * w + x));
  }
  return RegionMask::from_pixels(id, h, w, std::move(px));
}

Outcome division_checks() {
  Outcome o;
  const std::vector<RegionMask> masks{rect(0, 20, 20, 0, 0, 10, 10), rect(1, 20, 20, 0, 8, 5, 6)};
  const auto resolved = resolve_imported_masks(20, 20, masks, kDefaultDeleteThreshold);
  const bool fixture = resolved.size() == 3 && resolved.region(0).area() == 90 &&
                       resolved.region(1).area() == 30 && resolved.region(2).area() == 280;
  o.detail << " imported_fixture=" << (fixture ? "A'=90,B'=30,residual=280" : "mismatch");
  o.check(fixture, "imported mask fixture");

  std::vector<Division> all{resolved};
  const auto blobs = testing::blob_image(60, 80, 11);
  const auto noise = random_image(48, 48, 3, 12);
  all.push_back(divide_grid(blobs, 7, 7));
  all.push_back(divide_grid(random_image(225, 225, 3, 1), 7, 7));
  for (std::size_t k : {2u, 16u, 49u}) {
    all.push_back(divide_superpixel(blobs, k));
    all.push_back(divide_superpixel(noise, k, 5));
  }
  std::size_t bad = 0;
  for (const auto& d : all) bad += !is_partition(d);
  o.detail << " partitions=" << all.size() - bad << "/" << all.size();
  o.check(bad == 0, "partition invariants");

  bool deterministic = true;
  for (std::uint64_t seed : {0u, 3u}) {
    deterministic = deterministic && division_to_json(divide_superpixel(blobs, 30, seed)) ==
                                         division_to_json(divide_superpixel(blobs, 30, seed));
  }
  o.detail << " superpixel_determinism=" << (deterministic ? "byte-exact" : "differs");
  o.check(deterministic, "superpixel determinism");
  return o;
}

}  // namespace
}  // namespace lima

int main() {
  using namespace lima;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"naive ranking call counts", naive_call_counts},
      {"bidirectional savings", bidirectional_savings},
      {"greedy optimality bound", optimality_bound},
      {"diminishing returns and monotonicity", submodularity_checks},
      {"metric oracles", metric_oracles},
      {"end-to-end separation from random orders", end_to_end_separation},
      {"score assignment", score_assignment},
      {"division", division_checks},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("%s %zu %s:%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str());
  }
  return failures == 0 ? 0 : 1;
}
