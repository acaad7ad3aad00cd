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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lima/attribution.hpp"
#include "lima/division.hpp"
#include "lima/oracle.hpp"
#include "lima/search.hpp"
#include "lima/submodular.hpp"

namespace lima::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Bad flags or unreadable inputs, reported before any work starts.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DivisionOptions {
  std::string spec = "grid:7x7";
  std::string masks;
  double delta = kDefaultDeleteThreshold;
};

struct MetricRequest {
  enum class Kind { kInsertion, kDeletion, kHighestConfidence, kMuFidelity };
  Kind kind;
  double limit = 1.0;
  std::string name;
};
std::vector<MetricRequest> parse_metrics(const std::string& spec);

struct AttributeOptions {
  std::vector<std::string> inputs;
  std::string oracle = "builtin:identity";
  std::string target = "image";
  DivisionOptions division;
  std::string search = "bi";
  std::size_t pending_negatives = 8;
  std::string lambdas = "20,5,0.05,0.01";
  std::string scoring = "marginal";
  double baseline = kDefaultBaselineScore;
  std::string metrics = "insertion,deletion,ahc:0.25";
  std::size_t fidelity_samples = 200;
  std::string out;
  std::string saliency;
  std::string out_dir;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  double timeout_s = 30.0;
};

struct DivideOptions {
  std::string input;
  DivisionOptions division;
  std::uint64_t seed = 0;
  std::string out;
  std::string labels_png;
};

struct EvalOptions {
  std::string results;
  std::string metrics = "insertion,deletion,ahc:0.25,mufidelity";
  std::string oracle;
  std::size_t fidelity_samples = 200;
  std::uint64_t seed = 0;
  std::string csv;
  double timeout_s = 30.0;
};

struct RenderOptions {
  std::string result;
  std::string out;
  std::string overlay;
  double alpha = 0.5;
};

Lambdas parse_lambdas(const std::string& spec);
TargetSpec parse_target(const std::string& spec, const RasterImage& image);
Division make_division(const RasterImage& image, const DivisionOptions& options,
                       std::uint64_t seed);

// Builtins are built around the image; external oracles are reused across images.
class OracleFactory {
 public:
  OracleFactory(std::string spec, double timeout_s);
  ModelOracle& for_image(const RasterImage& image);

 private:
  std::string spec_;
  double timeout_s_;
  std::unique_ptr<ModelOracle> oracle_;
  bool external_;
};

// Throws UsageError for problems detected before any oracle is launched.
void validate_oracle_spec(const std::string& spec);

int run_divide(const DivideOptions& options);
int run_attribute(const AttributeOptions& options);
int run_eval(const EvalOptions& options);
int run_render(const RenderOptions& options);

}  // namespace lima::cli
