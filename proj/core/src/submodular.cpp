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

#include "lima/submodular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lima/errors.hpp"

namespace lima {

void Lambdas::validate() const {
  for (double v : {consistency, collaboration, confidence, effectiveness}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("lambda weights must be finite and non-negative");
    }
  }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("cosine of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kZeroNormGuard || nb < kZeroNormGuard) return 0.0;
  return dot / (na * nb);
}

double confidence_score(std::span<const double> prob_row) {
  const std::size_t c = prob_row.size();
  if (c < 2) throw InvalidArgument("confidence score needs at least two classes");
  double sum = 0.0;
  double neg_entropy = 0.0;
  for (double p : prob_row) {
    sum += p;
    if (p > 0.0) neg_entropy += p * std::log(p);
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw InvalidArgument("probability row sums to " + std::to_string(sum));
  }
  return 1.0 + neg_entropy / std::log(static_cast<double>(c));
}

double effectiveness_score(std::span<const std::span<const double>> embeddings) {
  if (embeddings.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < embeddings.size(); ++j) {
      if (i == j) continue;
      nearest = std::min(nearest, 1.0 - cosine_similarity(embeddings[i], embeddings[j]));
    }
    total += nearest;
  }
  return total;
}

SubsetKey::SubsetKey(std::size_t universe, std::span<const RegionId> subset)
    : words_((universe + 63) / 64, 0) {
  for (auto id : subset) words_[id / 64] |= std::uint64_t{1} << (id % 64);
}

std::size_t SubsetKey::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto w : words_) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

SubmodularFunction::SubmodularFunction(RasterImage image, Division division, ModelOracle& oracle,
                                       SemanticTarget target, Lambdas lambdas)
    : image_(std::move(image)),
      division_(std::move(division)),
      oracle_(&oracle),
      target_(std::move(target)),
      lambdas_(lambdas) {
  lambdas_.validate();
  if (image_.height() != division_.height() || image_.width() != division_.width()) {
    throw InvalidArgument("division dimensions do not match the image");
  }
  if (target_.vector.size() != oracle.embed_dim()) {
    throw InvalidArgument("semantic target length differs from the oracle embedding size");
  }
}

const Matrix& SubmodularFunction::region_embeddings() {
  std::call_once(region_once_, [this] {
    std::vector<RasterImage> singles;
    singles.reserve(division_.size());
    for (RegionId id = 0; id < division_.size(); ++id) {
      singles.push_back(composite(image_, division_, std::span<const RegionId>(&id, 1)));
    }
    region_embeddings_ = oracle_->embed(singles);
    std::lock_guard lock(mutex_);
    region_ready_ = true;
  });
  return region_embeddings_;
}

std::size_t SubmodularFunction::region_embedding_count() const {
  std::lock_guard lock(mutex_);
  return region_ready_ ? division_.size() : 0;
}

double SubmodularFunction::effectiveness_score(std::span<const RegionId> subset) {
  if (subset.empty()) throw InvalidArgument("effectiveness score of an empty subset");
  validate_subset(division_, subset);
  if (subset.size() < 2) return 0.0;
  const Matrix& e = region_embeddings();
  // Summing in id order makes the value independent of how the subset is listed.
  std::vector<RegionId> ids(subset.begin(), subset.end());
  std::sort(ids.begin(), ids.end());
  std::vector<std::span<const double>> rows;
  rows.reserve(ids.size());
  for (auto id : ids) rows.push_back(e.row(id));
  return lima::effectiveness_score(rows);
}

ScoreBreakdown SubmodularFunction::combine(std::span<const RegionId> subset,
                                           std::span<const double> composite_embedding,
                                           std::span<const double> complement_embedding,
                                           std::span<const double> prob_row) {
  ScoreBreakdown s;
  s.consistency = cosine_similarity(composite_embedding, target_.vector);
  s.collaboration = 1.0 - cosine_similarity(complement_embedding, target_.vector);
  s.confidence = confidence_score(prob_row);
  s.effectiveness = subset.size() < 2 ? 0.0 : effectiveness_score(subset);
  s.total = lambdas_.consistency * s.consistency + lambdas_.collaboration * s.collaboration +
            lambdas_.confidence * s.confidence + lambdas_.effectiveness * s.effectiveness;
  return s;
}

ScoreBreakdown SubmodularFunction::evaluate(std::span<const RegionId> subset) {
  std::vector<std::vector<RegionId>> one{{subset.begin(), subset.end()}};
  return evaluate_batch(one).front();
}

std::vector<ScoreBreakdown> SubmodularFunction::evaluate_batch(
    std::span<const std::vector<RegionId>> subsets) {
  std::vector<ScoreBreakdown> out(subsets.size());
  std::vector<std::size_t> pending;
  std::vector<SubsetKey> keys;
  keys.reserve(subsets.size());
  {
    std::lock_guard lock(mutex_);
    lookups_ += subsets.size();
  }
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    validate_subset(division_, subsets[i]);
    keys.emplace_back(division_.size(), subsets[i]);
    if (memoize_) {
      std::lock_guard lock(mutex_);
      if (auto it = memo_.find(keys[i]); it != memo_.end()) {
        out[i] = it->second;
        continue;
      }
    }
    // The same subset twice in one batch is computed once.
    bool duplicate = false;
    if (memoize_) {
      for (auto j : pending) {
        if (keys[j] == keys[i]) {
          duplicate = true;
          break;
        }
      }
    }
    if (!duplicate) pending.push_back(i);
  }

  if (!pending.empty()) {
    std::vector<RasterImage> images;
    images.reserve(pending.size() * 2);
    for (auto i : pending) images.push_back(composite(image_, division_, subsets[i]));
    for (auto i : pending) images.push_back(complement_composite(image_, division_, subsets[i]));
    const Matrix embeddings = oracle_->embed(images);
    const Matrix probabilities =
        oracle_->probs(std::span<const RasterImage>(images.data(), pending.size()));

    for (std::size_t n = 0; n < pending.size(); ++n) {
      const std::size_t i = pending[n];
      out[i] = combine(subsets[i], embeddings.row(n), embeddings.row(pending.size() + n),
                       probabilities.row(n));
    }
    std::lock_guard lock(mutex_);
    evaluations_ += pending.size();
    if (memoize_) {
      for (auto i : pending) memo_.emplace(keys[i], out[i]);
    }
  }

  if (memoize_) {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      if (std::find(pending.begin(), pending.end(), i) == pending.end()) {
        out[i] = memo_.at(keys[i]);
      }
    }
  }
  return out;
}

std::size_t SubmodularFunction::evaluations() const {
  std::lock_guard lock(mutex_);
  return evaluations_;
}

std::size_t SubmodularFunction::lookups() const {
  std::lock_guard lock(mutex_);
  return lookups_;
}

void SubmodularFunction::clear_cache() {
  std::lock_guard lock(mutex_);
  memo_.clear();
}

}  // namespace lima
