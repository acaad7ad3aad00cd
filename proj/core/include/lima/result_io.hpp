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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lima/image.hpp"
#include "lima/search.hpp"
#include "lima/submodular.hpp"

namespace lima {

inline constexpr int kResultSchemaVersion = 1;

// Everything `lima attribute` writes for one image.
struct AttributionRecord {
  std::string image;
  std::string oracle;
  Division division;
  std::vector<RegionId> order;
  // Indexed by region id.
  std::vector<double> scores;
  std::vector<double> step_values;
  std::vector<double> step_cons_colla;
  std::string search_algorithm;
  std::size_t pending_negatives = 0;
  SearchTrace trace;
  std::string target;
  std::size_t target_class = 0;
  Lambdas lambdas;
  double baseline = 1.0;
  // Ordered by name so output is stable.
  std::map<std::string, double> metrics;
  std::uint64_t embed_calls = 0;
  std::uint64_t prob_calls = 0;
  // Raw per-pixel saliency, row-major.
  std::vector<double> saliency;
};

// Pretty-printed JSON; identical records serialize to identical bytes.
std::string to_json(const AttributionRecord& record);
// Throws InvalidArgument on a schema violation.
AttributionRecord record_from_json(std::string_view text);

// {"method", "height", "width", "masks": [{"id", "counts"}]}
std::string division_to_json(const Division& division);
// Accepts a bare division object or a full result record. Masks are returned as
// stored; callers resolve them into a partition.
std::vector<RegionMask> masks_from_json(std::string_view text, std::size_t& height,
                                        std::size_t& width);

std::string read_text_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace lima
