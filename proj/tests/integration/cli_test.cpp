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
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "lima/image_io.hpp"
#include "lima/result_io.hpp"
#include "lima/search.hpp"

namespace lima {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run lima(const std::vector<std::string>& args, const TempDir& dir) {
  std::string cmd = quote(LIMA_CLI);
  for (const auto& a : args) cmd += " " + quote(a);
  const auto err_path = dir / "stderr.txt";
  cmd += " 2>" + quote(err_path.string());
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof(buf), pipe)) > 0;) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_text_file(err_path);
  return r;
}

// 8x8 gray image and a quadrant weight map with levels 1/4, 1, 1/2, 3/4.
struct Scene {
  fs::path image, weights;
};

Scene write_scene(const TempDir& dir, const std::string& stem = "scene", float shade = 0.6f) {
  Scene s{dir / (stem + ".png"), dir / (stem + "_weights.png")};
  write_png(s.image, testing::constant_image(8, 8, 1, shade));
  std::vector<float> w(64);
  const float level[4] = {0.25f, 1.0f, 0.5f, 0.75f};
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) w[y * 8 + x] = level[(y / 4) * 2 + x / 4];
  }
  write_png(s.weights, RasterImage(8, 8, 1, std::move(w)));
  return s;
}

json load(const fs::path& p) { return json::parse(read_text_file(p)); }

TEST(CliTest, VersionAndHelp) {
  TempDir dir("cli");
  EXPECT_EQ(lima({"--version"}, dir).code, 0);
  const auto help = lima({"--help"}, dir);
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("attribute"), std::string::npos);
  EXPECT_EQ(lima({}, dir).code, 2);
  EXPECT_EQ(lima({"attribute", "--bogus"}, dir).code, 2);
}

TEST(CliTest, PlantedAttributionMatchesGolden) {
  TempDir dir("cli");
  const auto scene = write_scene(dir);
  const auto out = dir / "result.json";
  const auto r = lima({"attribute", scene.image.string(), "--oracle",
                       "builtin:planted:" + scene.weights.string(), "--division", "grid:2x2",
                       "--search", "naive", "--out", out.string(), "--saliency",
                       (dir / "map.png").string()},
                      dir);
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = load(out);
  // Strongest quadrant first.
  EXPECT_EQ(j["order"], json::parse("[1,3,2,0]"));
  EXPECT_EQ(j["search"]["evaluations"], 10);
  EXPECT_TRUE(fs::exists(dir / "map.png"));

  // Paths differ per run; everything else is fixed.
  j["image"] = "scene.png";
  j["oracle"] = "builtin:planted:scene_weights.png";
  const auto golden_path = fs::path(LIMA_GOLDEN_DIR) / "planted_2x2.json";
  if (std::getenv("LIMA_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(golden_path) << j.dump(1) << "\n";
  }
  EXPECT_EQ(j, load(golden_path));
}

TEST(CliTest, ReproducibleByteForByte) {
  TempDir dir("cli");
  const auto scene = write_scene(dir);
  std::string first;
  for (int i = 0; i < 2; ++i) {
    const auto out = dir / ("run" + std::to_string(i) + ".json");
    ASSERT_EQ(lima({"attribute", scene.image.string(), "--division", "superpixel:6",
                    "--oracle", "builtin:prototype:3:4", "--metrics",
                    "insertion,deletion,mufidelity", "--out", out.string()},
                   dir)
                  .code,
              0);
    if (i == 0) first = read_text_file(out);
    else EXPECT_EQ(read_text_file(out), first);
  }
}

TEST(CliTest, MissingInputWritesNothing) {
  TempDir dir("cli");
  const auto scene = write_scene(dir);
  const auto r = lima({"attribute", scene.image.string(), (dir / "absent.png").string(),
                       "--out-dir", (dir / "out").string()},
                      dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("absent.png"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out" / "scene.json"));
  EXPECT_EQ(lima({"attribute", (dir / "absent.png").string(), "--out", (dir / "x.json").string()},
                 dir)
                .code,
            2);
  EXPECT_FALSE(fs::exists(dir / "x.json"));
}

TEST(CliTest, SeveralInputsNeedAnOutputDirectory) {
  TempDir dir("cli");
  const auto a = write_scene(dir, "a");
  const auto b = write_scene(dir, "b", 0.3f);
  EXPECT_EQ(lima({"attribute", a.image.string(), b.image.string(), "--out",
                  (dir / "x.json").string()},
                 dir)
                .code,
            2);
  const auto r = lima({"attribute", a.image.string(), b.image.string(), "--division", "grid:2x2",
                       "--out-dir", (dir / "out").string(), "-j", "2"},
                      dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "a.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "b.png"));
}

TEST(CliTest, BidirectionalCallCountOnFortyNineRegions) {
  TempDir dir("cli");
  write_png(dir / "img.png", testing::random_image(28, 28, 3, 7));
  const auto out = dir / "r.json";
  const auto r = lima({"attribute", (dir / "img.png").string(), "--division", "grid:7x7",
                       "--search", "bi", "--np", "8", "--metrics", "none", "--out", out.string()},
                      dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load(out);
  const double evals = j["search"]["evaluations"].get<double>();
  EXPECT_NEAR(evals, bidirectional_evaluations_estimate(49, 8), 49.0);
  EXPECT_EQ(j["search"]["pending_negatives"], 8);
  EXPECT_EQ(j["order"].size(), 49u);
}

TEST(CliTest, OversizedPendingNegativesAreClamped) {
  TempDir dir("cli");
  const auto scene = write_scene(dir);
  const auto out = dir / "r.json";
  const auto r = lima({"attribute", scene.image.string(), "--division", "grid:2x2", "--np", "8",
                       "--metrics", "none", "--out", out.string()},
                      dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load(out)["search"]["pending_negatives"], 3);
  EXPECT_NE(r.err.find("warn"), std::string::npos);
}

TEST(CliTest, ConfigFileWithCommandLinePrecedence) {
  TempDir dir("cli");
  const auto scene = write_scene(dir);
  std::ofstream(dir / "lima.ini") << "[attribute]\nsearch = naive\ndivision = grid:2x3\n"
                                     "metrics = none\n";
  const auto out = dir / "r.json";
  const auto r = lima({"--config", (dir / "lima.ini").string(), "attribute",
                       scene.image.string(), "--division", "grid:2x2", "--out", out.string()},
                      dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load(out);
  EXPECT_EQ(j["division"]["masks"].size(), 4u);
  EXPECT_EQ(j["search"]["algorithm"], "naive");
  EXPECT_TRUE(j["metrics"].empty());
}

TEST(CliTest, EvalWritesOneRowPerResultAndTheMean) {
  TempDir dir("cli");
  std::vector<std::string> args{"attribute"};
  for (const char* stem : {"a", "b", "c"}) {
    args.push_back(write_scene(dir, stem, stem[0] == 'b' ? 0.2f : 0.7f).image.string());
  }
  for (const char* extra : {"--division", "grid:2x2", "--oracle", "builtin:prototype:5:3",
                            "--out-dir"}) {
    args.push_back(extra);
  }
  args.push_back((dir / "results").string());
  ASSERT_EQ(lima(args, dir).code, 0);

  const auto r = lima({"eval", "--results", (dir / "results").string(), "--metrics",
                       "insertion,deletion", "--csv", (dir / "m.csv").string()},
                      dir);
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(read_text_file(dir / "m.csv"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(csv, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "sample,insertion,deletion");
  double sum[2] = {0, 0};
  for (int i = 1; i <= 3; ++i) {
    std::istringstream row(lines[i]);
    std::string name, ins, del;
    std::getline(row, name, ',');
    std::getline(row, ins, ',');
    std::getline(row, del, ',');
    EXPECT_EQ(name, std::string(1, "abc"[i - 1]));
    sum[0] += std::stod(ins);
    sum[1] += std::stod(del);
    // Stored metrics agree with a fresh evaluation.
    const auto stored = load(dir / "results" / (name + ".json"));
    EXPECT_DOUBLE_EQ(stored["metrics"]["insertion"].get<double>(), std::stod(ins));
  }
  std::istringstream mean(lines[4]);
  std::string name, ins, del;
  std::getline(mean, name, ',');
  std::getline(mean, ins, ',');
  std::getline(mean, del, ',');
  EXPECT_EQ(name, "mean");
  EXPECT_NEAR(std::stod(ins), sum[0] / 3, 1e-12);
  EXPECT_NEAR(std::stod(del), sum[1] / 3, 1e-12);

  fs::create_directories(dir / "empty");
  EXPECT_EQ(lima({"eval", "--results", (dir / "empty").string()}, dir).code, 2);
  EXPECT_EQ(lima({"eval", "--results", (dir / "nowhere").string()}, dir).code, 2);
}

TEST(CliTest, MasksFromDirectoryAndJson) {
  TempDir dir("cli");
  const auto scene = write_scene(dir);
  fs::create_directories(dir / "masks");
  std::vector<float> left(64, 0.0f), top(64, 0.0f);
  for (std::size_t p = 0; p < 64; ++p) {
    if (p % 8 < 4) left[p] = 1.0f;
    if (p < 16) top[p] = 1.0f;
  }
  write_png(dir / "masks" / "0_left.png", RasterImage(8, 8, 1, left));
  write_png(dir / "masks" / "1_top.png", RasterImage(8, 8, 1, top));
  const auto from_dir = dir / "d.json";
  auto r = lima({"divide", scene.image.string(), "--division", "masks", "--masks",
                 (dir / "masks").string(), "--out", from_dir.string()},
                dir);
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = load(from_dir);
  // Left half (32), top-right strip (8) and the uncovered residual (24).
  ASSERT_EQ(j["masks"].size(), 3u);

  const auto out = dir / "r.json";
  r = lima({"attribute", scene.image.string(), "--division", "masks", "--masks",
            from_dir.string(), "--metrics", "none", "--out", out.string()},
           dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load(out)["division"]["masks"], j["masks"]);
}

TEST(CliTest, DivideAndRender) {
  TempDir dir("cli");
  write_png(dir / "img.png", testing::blob_image(24, 24, 3));
  auto r = lima({"divide", (dir / "img.png").string(), "--division", "superpixel:8",
                 "--labels-png", (dir / "labels.png").string()},
                dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto division = json::parse(r.out);
  EXPECT_EQ(division["height"], 24);
  EXPECT_GE(division["masks"].size(), 2u);
  EXPECT_TRUE(read_png(dir / "labels.png").same_shape(RasterImage(24, 24, 1)));

  const auto result = dir / "r.json";
  ASSERT_EQ(lima({"attribute", (dir / "img.png").string(), "--division", "grid:3x3",
                  "--metrics", "none", "--out", result.string()},
                 dir)
                .code,
            0);
  r = lima({"render", result.string(), "--out", (dir / "sal.png").string(), "--overlay",
            (dir / "over.png").string(), "--alpha", "0.3"},
           dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_png(dir / "sal.png").channels(), 3u);
  EXPECT_EQ(read_png(dir / "over.png").height(), 24u);
  EXPECT_EQ(lima({"render", (dir / "none.json").string(), "--out", (dir / "x.png").string()}, dir)
                .code,
            2);
}

TEST(CliTest, ExternalOracleOverStdio) {
  TempDir dir("cli");
  const auto scene = write_scene(dir);
  const auto via_cmd = dir / "cmd.json";
  const auto builtin = dir / "builtin.json";
  const std::string spec = std::string("cmd:") + LIMA_MOCK_ORACLE + " --model identity:8:8:1 --max-batch 3";
  auto r = lima({"attribute", scene.image.string(), "--division", "grid:2x2", "--oracle", spec,
                 "--metrics", "none", "--out", via_cmd.string()},
                dir);
  ASSERT_EQ(r.code, 0) << r.err;
  r = lima({"attribute", scene.image.string(), "--division", "grid:2x2", "--metrics", "none",
            "--out", builtin.string()},
           dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto a = load(via_cmd);
  const auto b = load(builtin);
  EXPECT_EQ(a["order"], b["order"]);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(a["step_values"][i].get<double>(), b["step_values"][i].get<double>(), 1e-6);
  }
  EXPECT_EQ(lima({"attribute", scene.image.string(), "--oracle", "cmd:/no/such/binary",
                  "--out", (dir / "x.json").string()},
                 dir)
                .code,
            1);
}

}  // namespace
}  // namespace lima
