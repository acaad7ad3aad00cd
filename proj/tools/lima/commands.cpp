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

#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "lima/errors.hpp"
#include "lima/external_oracle.hpp"
#include "lima/image_io.hpp"
#include "lima/metrics.hpp"
#include "lima/result_io.hpp"
#include "lima/synthetic_oracles.hpp"

namespace lima::cli {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("bad " + what + ": '" + text + "'");
  }
  if (used != text.size()) throw UsageError("bad " + what + ": '" + text + "'");
  return v;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw UsageError("bad " + what + ": '" + text + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ScoringMode parse_scoring(const std::string& name) {
  if (name == "marginal") return ScoringMode::kMarginal;
  if (name == "uniform") return ScoringMode::kUniformGap;
  throw UsageError("--scoring must be marginal or uniform");
}

std::vector<RegionMask> read_mask_dir(const fs::path& dir, std::size_t& h, std::size_t& w) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidArgument("no PNG masks in " + dir.string());
  std::vector<RegionMask> masks;
  for (const auto& file : files) {
    std::size_t mh = 0;
    std::size_t mw = 0;
    const auto bits = read_mask_png(file, mh, mw);
    if (masks.empty()) {
      h = mh;
      w = mw;
    } else if (mh != h || mw != w) {
      throw InvalidArgument("mask " + file.string() + " has a different size");
    }
    masks.emplace_back(static_cast<RegionId>(masks.size()), mh, mw, bits);
  }
  return masks;
}

template <typename Fn>
void write_atomic(const fs::path& path, Fn&& writer) {
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    writer(tmp);
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

std::map<std::string, double> compute_metrics(const std::vector<MetricRequest>& requests,
                                              ModelOracle& oracle, const RasterImage& image,
                                              const Division& division,
                                              std::span<const RegionId> order,
                                              std::span<const double> scores_by_id,
                                              std::size_t target_class,
                                              std::size_t fidelity_samples, std::uint64_t seed) {
  std::map<std::string, double> out;
  std::optional<FaithfulnessCurve> insertion;
  std::optional<FaithfulnessCurve> deletion;
  for (const auto& m : requests) {
    switch (m.kind) {
      case MetricRequest::Kind::kInsertion:
      case MetricRequest::Kind::kHighestConfidence:
        if (!insertion) {
          insertion = build_curve(oracle, image, division, order, target_class, CurveMode::kInsertion);
        }
        out[m.name] = m.kind == MetricRequest::Kind::kInsertion
                          ? insertion_auc(*insertion)
                          : highest_confidence(*insertion, m.limit);
        break;
      case MetricRequest::Kind::kDeletion:
        if (!deletion) {
          deletion = build_curve(oracle, image, division, order, target_class, CurveMode::kDeletion);
        }
        out[m.name] = deletion_auc(*deletion);
        break;
      case MetricRequest::Kind::kMuFidelity: {
        MuFidelityConfig config;
        config.samples = fidelity_samples;
        config.seed = seed;
        out[m.name] = mu_fidelity(scores_by_id, oracle, image, division, target_class, config).value;
        break;
      }
    }
  }
  return out;
}

fs::path resolve_image_path(const std::string& stored, const fs::path& result_file) {
  fs::path p(stored);
  if (fs::exists(p) || p.is_absolute()) return p;
  const auto beside = result_file.parent_path() / p;
  return fs::exists(beside) ? beside : p;
}

struct Outputs {
  fs::path json;
  fs::path png;
};

}  // namespace

std::vector<MetricRequest> parse_metrics(const std::string& spec) {
  std::vector<MetricRequest> out;
  if (spec.empty() || spec == "none") return out;
  for (const auto& item : split(spec, ',')) {
    MetricRequest m{};
    m.name = item;
    if (item == "insertion") {
      m.kind = MetricRequest::Kind::kInsertion;
    } else if (item == "deletion") {
      m.kind = MetricRequest::Kind::kDeletion;
    } else if (item == "mufidelity") {
      m.kind = MetricRequest::Kind::kMuFidelity;
    } else if (item.starts_with("ahc:")) {
      m.kind = MetricRequest::Kind::kHighestConfidence;
      m.limit = parse_double(item.substr(4), "ahc limit");
      if (!(m.limit > 0.0 && m.limit <= 1.0)) throw UsageError("ahc limit must be in (0, 1]");
    } else {
      throw UsageError("unknown metric '" + item + "'");
    }
    out.push_back(m);
  }
  return out;
}

Lambdas parse_lambdas(const std::string& spec) {
  const auto parts = split(spec, ',');
  if (parts.size() != 4) throw UsageError("--lambdas takes four comma-separated numbers");
  Lambdas l{parse_double(parts[0], "lambda"), parse_double(parts[1], "lambda"),
            parse_double(parts[2], "lambda"), parse_double(parts[3], "lambda")};
  try {
    l.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return l;
}

TargetSpec parse_target(const std::string& spec, const RasterImage& image) {
  if (spec == "image") return TargetFromImage{image};
  if (spec.starts_with("class:")) return TargetClassRow{parse_count(spec.substr(6), "class index")};
  if (spec.starts_with("vector:")) {
    TargetVector v;
    for (const auto& p : split(spec.substr(7), ',')) v.values.push_back(parse_double(p, "target"));
    return v;
  }
  throw UsageError("--target must be image, class:<k> or vector:<a,b,...>");
}

Division make_division(const RasterImage& image, const DivisionOptions& options,
                       std::uint64_t seed) {
  const auto& spec = options.spec;
  if (spec.starts_with("grid:")) {
    const auto parts = split(spec.substr(5), 'x');
    if (parts.size() != 2) throw UsageError("grid division is grid:<rows>x<cols>");
    return divide_grid(image, parse_count(parts[0], "grid rows"), parse_count(parts[1], "grid cols"));
  }
  if (spec.starts_with("superpixel:")) {
    return divide_superpixel(image, parse_count(spec.substr(11), "superpixel count"), seed);
  }
  if (spec == "masks") {
    if (options.masks.empty()) throw UsageError("--division masks needs --masks <path>");
    std::size_t h = 0;
    std::size_t w = 0;
    const fs::path path(options.masks);
    const auto masks = fs::is_directory(path) ? read_mask_dir(path, h, w)
                                              : masks_from_json(read_text_file(path), h, w);
    if (h != image.height() || w != image.width()) {
      throw InvalidArgument("masks are " + std::to_string(h) + "x" + std::to_string(w) +
                            " but the image is " + std::to_string(image.height()) + "x" +
                            std::to_string(image.width()));
    }
    return resolve_imported_masks(h, w, masks, options.delta);
  }
  throw UsageError("--division must be grid:<r>x<c>, superpixel:<k> or masks");
}

void validate_oracle_spec(const std::string& spec) {
  if (spec == "builtin:identity") return;
  if (spec.starts_with("builtin:planted:")) {
    const fs::path mask(spec.substr(16));
    if (!fs::is_regular_file(mask)) throw UsageError("planted mask not found: " + mask.string());
    return;
  }
  if (spec.starts_with("builtin:prototype:")) {
    const auto parts = split(spec.substr(18), ':');
    if (parts.empty() || parts.size() > 2) {
      throw UsageError("prototype oracle is builtin:prototype:<seed>[:classes]");
    }
    parse_count(parts[0], "oracle seed");
    if (parts.size() == 2 && parse_count(parts[1], "class count") < 2) {
      throw UsageError("prototype oracle needs at least two classes");
    }
    return;
  }
  if (spec.starts_with("cmd:")) {
    if (spec.find_first_not_of(" \t", 4) == std::string::npos) throw UsageError("empty oracle command");
    return;
  }
  if (spec.starts_with("tcp:")) {
    const auto colon = spec.rfind(':');
    if (colon <= 4) throw UsageError("tcp oracle is tcp:<host>:<port>");
    parse_count(spec.substr(colon + 1), "port");
    return;
  }
  throw UsageError("unknown oracle '" + spec + "'");
}

OracleFactory::OracleFactory(std::string spec, double timeout_s)
    : spec_(std::move(spec)),
      timeout_s_(timeout_s),
      external_(spec_.starts_with("cmd:") || spec_.starts_with("tcp:")) {}

ModelOracle& OracleFactory::for_image(const RasterImage& image) {
  if (external_) {
    if (!oracle_) {
      ExternalOracleOptions options;
      options.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s_ * 1000.0));
      oracle_ = open_external_oracle(spec_, options);
      spdlog::debug("connected to oracle '{}'", spec_);
    }
    return *oracle_;
  }
  if (spec_ == "builtin:identity") {
    oracle_ = std::make_unique<IdentityOracle>(image.height(), image.width(), image.channels());
  } else if (spec_.starts_with("builtin:planted:")) {
    // Gray level is the per-pixel evidence weight; a binary mask plants uniform weight.
    const auto weights_png = read_png(spec_.substr(16));
    if (weights_png.height() != image.height() || weights_png.width() != image.width()) {
      throw InvalidArgument("planted weight map size does not match the image");
    }
    std::vector<double> weights(weights_png.pixel_count());
    for (std::size_t p = 0; p < weights.size(); ++p) {
      weights[p] = weights_png.channel_mean(p);
    }
    oracle_ = std::make_unique<PlantedRegionOracle>(image, std::move(weights));
  } else if (spec_.starts_with("builtin:prototype:")) {
    const auto parts = split(spec_.substr(18), ':');
    const std::size_t classes = parts.size() == 2 ? parse_count(parts[1], "class count") : 2;
    oracle_ = LinearPrototypeOracle::random(image.height(), image.width(), image.channels(),
                                            classes, 64, parse_count(parts[0], "oracle seed"));
  } else {
    throw UsageError("unknown oracle '" + spec_ + "'");
  }
  return *oracle_;
}

int run_divide(const DivideOptions& options) {
  if (!fs::is_regular_file(options.input)) {
    spdlog::error("input not found: {}", options.input);
    return kExitUsage;
  }
  const auto image = read_png(options.input);
  const auto division = make_division(image, options.division, options.seed);
  spdlog::info("{}: {} regions ({})", options.input, division.size(), to_string(division.method()));
  const auto json = division_to_json(division);
  if (options.out.empty()) {
    std::fwrite(json.data(), 1, json.size(), stdout);
  } else {
    write_text_file_atomic(options.out, json);
  }
  if (!options.labels_png.empty()) {
    const auto labels = division.labels();
    std::vector<std::uint8_t> gray(labels.size());
    const double scale = 255.0 / static_cast<double>(division.size() - 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      gray[i] = static_cast<std::uint8_t>(std::lround(labels[i] * scale));
    }
    write_atomic(options.labels_png, [&](const fs::path& p) {
      write_png(p, division.height(), division.width(), 1, gray);
    });
  }
  return kExitOk;
}

int run_attribute(const AttributeOptions& options) {
  if (options.inputs.empty()) throw UsageError("no input images");
  std::vector<std::string> missing;
  for (const auto& in : options.inputs) {
    if (!fs::is_regular_file(in)) missing.push_back(in);
  }
  if (!missing.empty()) {
    for (const auto& m : missing) spdlog::error("input not found: {}", m);
    return kExitUsage;
  }
  const bool many = options.inputs.size() > 1;
  if (many && options.out_dir.empty()) throw UsageError("several inputs need --out-dir");
  if (many && (!options.out.empty() || !options.saliency.empty())) {
    throw UsageError("--out and --saliency apply to a single input; use --out-dir");
  }
  if (options.out.empty() && options.out_dir.empty()) throw UsageError("--out or --out-dir is required");
  if (options.jobs == 0) throw UsageError("--jobs must be at least 1");
  if (options.pending_negatives == 0) throw UsageError("--np must be at least 1");
  if (!(options.timeout_s > 0.0)) throw UsageError("--timeout must be positive");
  if (options.division.spec == "masks" && !fs::exists(options.division.masks)) {
    throw UsageError("masks not found: " + options.division.masks);
  }
  validate_oracle_spec(options.oracle);
  const auto lambdas = parse_lambdas(options.lambdas);
  const auto metrics = parse_metrics(options.metrics);
  const auto scoring = parse_scoring(options.scoring);
  SearchConfig search;
  try {
    search.algorithm = search_algorithm_from_string(options.search);
  } catch (const InvalidArgument&) {
    throw UsageError("--search must be naive or bi");
  }
  search.pending_negatives = options.pending_negatives;
  search.seed = options.seed;

  std::vector<Outputs> outputs;
  for (const auto& in : options.inputs) {
    if (many || options.out.empty()) {
      const auto stem = fs::path(in).stem().string();
      outputs.push_back({fs::path(options.out_dir) / (stem + ".json"),
                         fs::path(options.out_dir) / (stem + ".png")});
    } else {
      outputs.push_back({options.out, options.saliency});
    }
  }
  if (!options.out_dir.empty()) fs::create_directories(options.out_dir);

  std::vector<std::string> errors(options.inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    OracleFactory factory(options.oracle, options.timeout_s);
    for (std::size_t i = next++; i < options.inputs.size(); i = next++) {
      const auto& path = options.inputs[i];
      try {
        const auto image = read_png(path);
        const auto division = make_division(image, options.division, options.seed);
        ModelOracle& oracle = factory.for_image(image);
        const auto before = oracle.call_log();
        const auto target_spec = parse_target(options.target, image);
        const auto target = make_semantic_target(oracle, target_spec);
        const std::size_t target_class =
            std::holds_alternative<TargetClassRow>(target_spec)
                ? std::get<TargetClassRow>(target_spec).class_index
                : predicted_class(oracle, image);

        SubmodularFunction objective(image, division, oracle, target, lambdas);
        SearchConfig cfg = search;
        if (cfg.algorithm == SearchAlgorithm::kBidirectional &&
            cfg.pending_negatives > division.size() - 1) {
          spdlog::warn("{}: --np {} exceeds |V|-1, using {}", path, cfg.pending_negatives,
                       division.size() - 1);
          cfg.pending_negatives = division.size() - 1;
        }
        SearchResult ranked;
        try {
          ranked = rank_regions(objective, cfg);
        } catch (const SearchAborted& e) {
          throw std::runtime_error(std::string(e.what()) + " after " +
                                   std::to_string(e.partial().trace.steps.size()) + " search steps");
        }
        const auto att = attribute(objective, ranked.order, options.baseline, scoring);
        const auto after = oracle.call_log();

        std::vector<double> along(att.order.size());
        for (std::size_t k = 0; k < along.size(); ++k) along[k] = att.scores[att.order[k]];
        const auto map = render_saliency(division, att.order, along);

        AttributionRecord record;
        record.image = path;
        record.oracle = options.oracle;
        record.division = division;
        record.order = att.order;
        record.scores = att.scores;
        record.step_values = att.step_values;
        record.step_cons_colla = att.step_cons_colla;
        record.search_algorithm = std::string(to_string(cfg.algorithm));
        record.pending_negatives =
            cfg.algorithm == SearchAlgorithm::kBidirectional ? cfg.pending_negatives : 0;
        record.trace = ranked.trace;
        record.target = options.target;
        record.target_class = target_class;
        record.lambdas = lambdas;
        record.baseline = options.baseline;
        record.embed_calls = after.embed_calls - before.embed_calls;
        record.prob_calls = after.prob_calls - before.prob_calls;
        record.metrics = compute_metrics(metrics, oracle, image, division, att.order, att.scores,
                                         target_class, options.fidelity_samples, options.seed);
        record.saliency = map.values;

        write_text_file_atomic(outputs[i].json, to_json(record));
        if (!outputs[i].png.empty()) {
          write_atomic(outputs[i].png, [&](const fs::path& p) { write_saliency_png(p, map); });
        }
        spdlog::info("{}: {} regions, {} evaluations, {} embed / {} probs images", path,
                     division.size(), ranked.trace.evaluations, record.embed_calls,
                     record.prob_calls);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t jobs = std::min(options.jobs, options.inputs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int failed = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      spdlog::error("{}: {}", options.inputs[i], errors[i]);
      ++failed;
    }
  }
  return failed == 0 ? kExitOk : kExitFailure;
}

int run_eval(const EvalOptions& options) {
  const fs::path dir(options.results);
  if (!fs::is_directory(dir)) {
    spdlog::error("results directory not found: {}", options.results);
    return kExitUsage;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    spdlog::error("no result files in {}", options.results);
    return kExitUsage;
  }
  const auto metrics = parse_metrics(options.metrics);
  if (metrics.empty()) throw UsageError("--metrics selects nothing");
  if (!options.oracle.empty()) validate_oracle_spec(options.oracle);

  std::ostringstream csv;
  csv << "sample";
  for (const auto& m : metrics) csv << ',' << m.name;
  csv << '\n';
  std::vector<double> sums(metrics.size(), 0.0);
  std::size_t rows = 0;
  int status = kExitOk;
  std::unique_ptr<OracleFactory> factory;
  std::string factory_spec;
  for (const auto& file : files) {
    try {
      const auto record = record_from_json(read_text_file(file));
      const auto image = read_png(resolve_image_path(record.image, file));
      if (image.height() != record.division.height() || image.width() != record.division.width()) {
        throw InvalidArgument("image size does not match the stored division");
      }
      const auto spec = options.oracle.empty() ? record.oracle : options.oracle;
      validate_oracle_spec(spec);
      if (!factory || spec != factory_spec) {
        factory = std::make_unique<OracleFactory>(spec, options.timeout_s);
        factory_spec = spec;
      }
      ModelOracle& oracle = factory->for_image(image);
      const auto values =
          compute_metrics(metrics, oracle, image, record.division, record.order, record.scores,
                          record.target_class, options.fidelity_samples, options.seed);
      csv << file.stem().string();
      for (std::size_t k = 0; k < metrics.size(); ++k) {
        const double v = values.at(metrics[k].name);
        sums[k] += v;
        csv << ',' << format_double(v);
      }
      csv << '\n';
      ++rows;
    } catch (const std::exception& e) {
      spdlog::error("{}: {}", file.string(), e.what());
      status = kExitFailure;
    }
  }
  if (rows > 0) {
    csv << "mean";
    for (double s : sums) csv << ',' << format_double(s / static_cast<double>(rows));
    csv << '\n';
  }
  const auto text = csv.str();
  if (options.csv.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    write_text_file_atomic(options.csv, text);
  }
  return status;
}

int run_render(const RenderOptions& options) {
  if (!fs::is_regular_file(options.result)) {
    spdlog::error("result not found: {}", options.result);
    return kExitUsage;
  }
  if (options.out.empty() && options.overlay.empty()) throw UsageError("--out or --overlay is required");
  if (!(options.alpha >= 0.0 && options.alpha <= 1.0)) throw UsageError("--alpha must be in [0, 1]");
  const auto record = record_from_json(read_text_file(options.result));
  SaliencyMap map;
  if (record.saliency.empty()) {
    std::vector<double> along(record.order.size());
    for (std::size_t k = 0; k < along.size(); ++k) along[k] = record.scores[record.order[k]];
    map = render_saliency(record.division, record.order, along);
  } else {
    map = {record.division.height(), record.division.width(), record.saliency};
  }
  if (!options.out.empty()) {
    write_atomic(options.out, [&](const fs::path& p) { write_saliency_png(p, map); });
  }
  if (!options.overlay.empty()) {
    const auto image = read_png(resolve_image_path(record.image, options.result));
    const auto blended = overlay(image, map, static_cast<float>(options.alpha));
    write_atomic(options.overlay, [&](const fs::path& p) { write_png(p, blended); });
  }
  return kExitOk;
}

}  // namespace lima::cli
