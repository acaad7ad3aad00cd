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

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <exception>

#include "commands.hpp"
#include "lima/errors.hpp"

#ifndef LIMA_VERSION
#define LIMA_VERSION "0.0.0"
#endif

namespace {

void add_division_options(CLI::App* cmd, lima::cli::DivisionOptions& d) {
  cmd->add_option("--division", d.spec, "grid:<rows>x<cols>, superpixel:<k> or masks")
      ->capture_default_str();
  cmd->add_option("--masks", d.masks, "Directory of mask PNGs or an RLE JSON file");
  cmd->add_option("--delta", d.delta, "Drop resolved masks covering at most this image fraction")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.5));
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("lima");
  logger->set_pattern("%^%l%$: %v");
  spdlog::set_default_logger(logger);

  CLI::App app{"Region attribution for black-box image models"};
  app.set_version_flag("--version", LIMA_VERSION);
  app.set_config("--config", "", "INI or TOML file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  lima::cli::DivideOptions divide;
  auto* divide_cmd = app.add_subcommand("divide", "Split an image into regions");
  divide_cmd->add_option("image", divide.input, "Input PNG")->required();
  add_division_options(divide_cmd, divide.division);
  divide_cmd->add_option("--seed", divide.seed)->capture_default_str();
  divide_cmd->add_option("--out", divide.out, "Division JSON (stdout when omitted)");
  divide_cmd->add_option("--labels-png", divide.labels_png, "Grayscale label map");

  lima::cli::AttributeOptions attr;
  auto* attr_cmd = app.add_subcommand("attribute", "Rank regions and write attribution results");
  attr_cmd->add_option("images", attr.inputs, "Input PNGs")->required();
  attr_cmd->add_option("--oracle", attr.oracle,
                       "builtin:identity, builtin:planted:<weights.png>, "
                       "builtin:prototype:<seed>[:classes], cmd:<argv> or tcp:<host>:<port>")
      ->capture_default_str();
  attr_cmd->add_option("--target", attr.target, "image, class:<k> or vector:<a,b,...>")
      ->capture_default_str();
  add_division_options(attr_cmd, attr.division);
  attr_cmd->add_option("--search", attr.search, "naive or bi")
      ->capture_default_str()
      ->check(CLI::IsMember({"naive", "bi", "bidirectional"}));
  attr_cmd->add_option("--np", attr.pending_negatives, "Pending negatives per bidirectional step")
      ->capture_default_str();
  attr_cmd->add_option("--lambdas", attr.lambdas, "Score weights a,b,c,d")->capture_default_str();
  attr_cmd->add_option("--scoring", attr.scoring, "marginal or uniform")
      ->capture_default_str()
      ->check(CLI::IsMember({"marginal", "uniform"}));
  attr_cmd->add_option("--baseline", attr.baseline, "Score of the top region")->capture_default_str();
  attr_cmd->add_option("--metrics", attr.metrics, "insertion,deletion,ahc:<f>,mufidelity or none")
      ->capture_default_str();
  attr_cmd->add_option("--fidelity-samples", attr.fidelity_samples)->capture_default_str();
  attr_cmd->add_option("--out", attr.out, "Result JSON (single input)");
  attr_cmd->add_option("--saliency", attr.saliency, "Saliency PNG (single input)");
  attr_cmd->add_option("--out-dir", attr.out_dir, "Writes <stem>.json and <stem>.png per input");
  attr_cmd->add_option("--jobs,-j", attr.jobs, "Worker threads")->capture_default_str();
  attr_cmd->add_option("--seed", attr.seed)->capture_default_str();
  attr_cmd->add_option("--timeout", attr.timeout_s, "External oracle timeout in seconds")
      ->capture_default_str();

  lima::cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score saved results with faithfulness metrics");
  eval_cmd->alias("evaluate");
  eval_cmd->add_option("--results", eval.results, "Directory of result JSON files")->required();
  eval_cmd->add_option("--metrics", eval.metrics)->capture_default_str();
  eval_cmd->add_option("--oracle", eval.oracle, "Overrides the oracle recorded in each result");
  eval_cmd->add_option("--fidelity-samples", eval.fidelity_samples)->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed)->capture_default_str();
  eval_cmd->add_option("--csv", eval.csv, "Output CSV (stdout when omitted)");
  eval_cmd->add_option("--timeout", eval.timeout_s)->capture_default_str();

  lima::cli::RenderOptions render;
  auto* render_cmd = app.add_subcommand("render", "Draw the saliency map of a result");
  render_cmd->add_option("result", render.result, "Result JSON")->required();
  render_cmd->add_option("--out", render.out, "Colorized saliency PNG");
  render_cmd->add_option("--overlay", render.overlay, "Saliency blended over the input image");
  render_cmd->add_option("--alpha", render.alpha)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lima::cli::kExitUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*divide_cmd) return lima::cli::run_divide(divide);
    if (*attr_cmd) return lima::cli::run_attribute(attr);
    if (*eval_cmd) return lima::cli::run_eval(eval);
    if (*render_cmd) return lima::cli::run_render(render);
  } catch (const lima::cli::UsageError& e) {
    spdlog::error("{}", e.what());
    return lima::cli::kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return lima::cli::kExitFailure;
  }
  return lima::cli::kExitUsage;
}
