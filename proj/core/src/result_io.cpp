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

#include "lima/result_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lima/errors.hpp"
#include "lima/rle.hpp"

namespace lima {
namespace {

using Json = nlohmann::ordered_json;

Json division_json(const Division& division) {
  Json masks = Json::array();
  for (const auto& region : division.regions()) {
    const auto bits = region.bits();
    masks.push_back({{"id", region.id()}, {"counts", rle_encode(bits)}});
  }
  return {{"method", std::string(to_string(division.method()))},
          {"height", division.height()},
          {"width", division.width()},
          {"masks", std::move(masks)}};
}

std::vector<RegionMask> masks_of(const Json& j, std::size_t& height, std::size_t& width) {
  height = j.at("height").get<std::size_t>();
  width = j.at("width").get<std::size_t>();
  if (height == 0 || width == 0) throw InvalidArgument("division has zero size");
  std::vector<RegionMask> masks;
  for (const auto& m : j.at("masks")) {
    const auto counts = m.at("counts").get<std::vector<std::uint32_t>>();
    const auto bits = rle_decode(counts, height * width);
    masks.emplace_back(m.at("id").get<RegionId>(), height, width, bits);
  }
  return masks;
}

Division division_of(const Json& j) {
  std::size_t h = 0;
  std::size_t w = 0;
  auto masks = masks_of(j, h, w);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].id() != i) throw InvalidArgument("mask ids must be 0..n-1 in order");
  }
  return Division(h, w, std::move(masks),
                  division_method_from_string(j.at("method").get<std::string>()));
}

Json parse(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string to_json(const AttributionRecord& r) {
  Json steps = Json::array();
  for (const auto& s : r.trace.steps) {
    steps.push_back(
        {{"direction", s.direction == SearchStep::Direction::kForward ? "forward" : "reverse"},
         {"chosen", s.chosen},
         {"value", s.value},
         {"gain", s.gain},
         {"candidates", s.candidates},
         {"evaluations", s.evaluations}});
  }
  Json metrics = Json::object();
  for (const auto& [name, value] : r.metrics) metrics[name] = value;
  Json j = {
      {"schema_version", kResultSchemaVersion},
      {"image", r.image},
      {"height", r.division.height()},
      {"width", r.division.width()},
      {"oracle", r.oracle},
      {"division", division_json(r.division)},
      {"order", r.order},
      {"scores", r.scores},
      {"step_values", r.step_values},
      {"step_cons_colla", r.step_cons_colla},
      {"baseline", r.baseline},
      {"search",
       {{"algorithm", r.search_algorithm},
        {"pending_negatives", r.pending_negatives},
        {"evaluations", r.trace.evaluations},
        {"lookups", r.trace.lookups},
        {"steps", std::move(steps)}}},
      {"target", r.target},
      {"target_class", r.target_class},
      {"lambdas",
       {r.lambdas.consistency, r.lambdas.collaboration, r.lambdas.confidence,
        r.lambdas.effectiveness}},
      {"metrics", std::move(metrics)},
      {"oracle_calls", {{"embed", r.embed_calls}, {"probs", r.prob_calls}}},
      {"saliency", r.saliency},
  };
  return j.dump(1) + "\n";
}

AttributionRecord record_from_json(std::string_view text) {
  const Json j = parse(text);
  try {
    if (j.at("schema_version").get<int>() != kResultSchemaVersion) {
      throw InvalidArgument("unsupported schema_version");
    }
    AttributionRecord r;
    r.image = j.at("image").get<std::string>();
    r.oracle = j.value("oracle", std::string{});
    r.division = division_of(j.at("division"));
    r.order = j.at("order").get<std::vector<RegionId>>();
    r.scores = j.at("scores").get<std::vector<double>>();
    r.step_values = j.at("step_values").get<std::vector<double>>();
    r.step_cons_colla = j.at("step_cons_colla").get<std::vector<double>>();
    r.baseline = j.value("baseline", 1.0);
    const auto& search = j.at("search");
    r.search_algorithm = search.at("algorithm").get<std::string>();
    r.pending_negatives = search.value("pending_negatives", std::size_t{0});
    r.trace.evaluations = search.at("evaluations").get<std::size_t>();
    r.trace.lookups = search.value("lookups", std::size_t{0});
    for (const auto& s : search.at("steps")) {
      SearchStep step;
      step.direction = s.at("direction").get<std::string>() == "reverse"
                           ? SearchStep::Direction::kReverse
                           : SearchStep::Direction::kForward;
      step.chosen = s.at("chosen").get<RegionId>();
      step.value = s.at("value").get<double>();
      step.gain = s.at("gain").get<double>();
      step.candidates = s.at("candidates").get<std::size_t>();
      step.evaluations = s.at("evaluations").get<std::size_t>();
      r.trace.steps.push_back(step);
    }
    r.target = j.at("target").get<std::string>();
    r.target_class = j.at("target_class").get<std::size_t>();
    const auto lambdas = j.at("lambdas").get<std::vector<double>>();
    if (lambdas.size() != 4) throw InvalidArgument("lambdas must have four entries");
    r.lambdas = {lambdas[0], lambdas[1], lambdas[2], lambdas[3]};
    for (const auto& [name, value] : j.at("metrics").items()) r.metrics[name] = value.get<double>();
    r.embed_calls = j.at("oracle_calls").at("embed").get<std::uint64_t>();
    r.prob_calls = j.at("oracle_calls").at("probs").get<std::uint64_t>();
    r.saliency = j.value("saliency", std::vector<double>{});

    const std::size_t n = r.division.size();
    if (r.order.size() != n || r.scores.size() != n || r.step_values.size() != n ||
        r.step_cons_colla.size() != n) {
      throw InvalidArgument("order, scores and step arrays must have one entry per region");
    }
    std::vector<bool> seen(n, false);
    for (RegionId id : r.order) {
      if (id >= n || seen[id]) throw InvalidArgument("order is not a permutation of the regions");
      seen[id] = true;
    }
    if (!r.saliency.empty() && r.saliency.size() != r.division.height() * r.division.width()) {
      throw InvalidArgument("saliency map size does not match the division");
    }
    return r;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("result schema violation: ") + e.what());
  }
}

std::string division_to_json(const Division& division) {
  return division_json(division).dump(1) + "\n";
}

std::vector<RegionMask> masks_from_json(std::string_view text, std::size_t& height,
                                        std::size_t& width) {
  const Json j = parse(text);
  try {
    return masks_of(j.contains("division") ? j.at("division") : j, height, width);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("mask schema violation: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

}  // namespace lima
