/*
Copyright 2026 The mmthink Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mmthink/pipeline.hpp"

using namespace mmthink;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const fs::path& dir) {
  ExperimentConfig c;
  c.output_dir = dir;
  c.sft_dataset_size = 300;
  c.rl.dataset_size = 40;
  c.rl.epochs = 2;
  c.eval_size = 200;
  return c;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("mmthink_test_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config json round trip and strictness") {
  const ExperimentConfig d;
  const auto back = config_from_json(to_json(d));
  CHECK(to_json(back) == to_json(d));
  CHECK(config_hash(back) == config_hash(d));

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"rl": {"grup_size": 4}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"rl": {"group_size": "eight"}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"rl": {"group_size": 1}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"rl": {"algorithm": "ppo"}})")), ConfigError);

  const auto partial = config_from_json(nlohmann::json::parse(R"({"seed": 11, "env": {"label_noise": 0.1}})"));
  CHECK(partial.seed == 11);
  CHECK(partial.env.label_noise == 0.1);
  CHECK(partial.rl.group_size == 8);
}

TEST_CASE("overrides") {
  nlohmann::json j = to_json(ExperimentConfig{});
  apply_overrides(j, {"rl.group_size=4", "rl.algorithm=grpo", "seed=3"});
  const auto c = config_from_json(j);
  CHECK(c.rl.group_size == 4);
  CHECK(c.rl.algorithm == Algorithm::VanillaGRPO);
  CHECK(c.seed == 3);
  CHECK_THROWS_AS(apply_overrides(j, {"no_equals_sign"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(j, {"rl..x=1"}), ConfigError);
}

TEST_CASE("config hash") {
  ExperimentConfig a;
  const auto h = config_hash(a);
  CHECK(h.size() == 16);
  a.output_dir = "elsewhere";
  CHECK(config_hash(a) == h);
  a.seed = 8;
  CHECK(config_hash(a) != h);
}

TEST_CASE("seeds reach every sub-stage") {
  ExperimentConfig a, b;
  b.seed = a.seed + 1;
  CHECK(a.env_for("sft").seed != a.env_for("eval").seed);
  CHECK(a.env_for("sft").seed != b.env_for("sft").seed);
  CHECK(a.sft_resolved().seed != b.sft_resolved().seed);
  CHECK(a.rl_resolved().seed != b.rl_resolved().seed);
  CHECK(a.eval_seed() != b.eval_seed());
  CHECK(a.rl_resolved(Algorithm::VanillaGRPO).algorithm == Algorithm::VanillaGRPO);
}

TEST_CASE("staged pipeline on disk") {
  TempDir tmp("stages");
  const auto c = small_config(tmp.path);
  const auto hash = config_hash(c);

  stage_gen_data(c);
  const auto first = slurp(tmp.path / "data" / "eval.txt");
  stage_gen_data(c);
  CHECK(slurp(tmp.path / "data" / "eval.txt") == first);
  CHECK(first.find(hash) != std::string::npos);

  stage_sft(c);
  stage_train(c, Algorithm::MMPO);
  stage_train(c, Algorithm::VanillaGRPO);
  for (const char* f : {"sft.ckpt", "sft_loss.csv", "rl_mmpo.ckpt", "rl_mmpo.jsonl", "rl_grpo.ckpt",
                        "checkpoints/rl_mmpo_epoch1.ckpt", "checkpoints/rl_mmpo_epoch2.ckpt"}) {
    INFO(f);
    REQUIRE(fs::exists(tmp.path / f));
    CHECK(slurp(tmp.path / f).find(hash) != std::string::npos);
  }
  std::istringstream log(slurp(tmp.path / "rl_mmpo.jsonl"));
  std::string line;
  int records = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("config_hash") == hash);
    CHECK(j.contains("loss"));
    CHECK(j.contains("kl"));
    CHECK(j.contains("clip_fraction"));
    CHECK(j.contains("mode_histogram"));
    CHECK(j.contains("avg_tokens"));
    ++records;
  }
  CHECK(records == 40);

  const auto r1 = stage_eval(c, tmp.path / "rl_mmpo.ckpt", "mmpo");
  const auto json1 = slurp(tmp.path / "eval_mmpo.json");
  const auto r2 = stage_eval(c, tmp.path / "rl_mmpo.ckpt", "mmpo");
  CHECK(r1 == r2);
  CHECK(slurp(tmp.path / "eval_mmpo.json") == json1);
  for (const char* f : {"eval_mmpo.json", "eval_mmpo.csv", "eval_mmpo.txt"})
    CHECK(slurp(tmp.path / f).find(hash) != std::string::npos);

  for (const auto& entry : fs::recursive_directory_iterator(tmp.path))
    CHECK(entry.path().extension() != ".partial");
}

TEST_CASE("stages fail cleanly on missing inputs") {
  TempDir tmp("missing");
  const auto c = small_config(tmp.path);
  CHECK_THROWS(stage_sft(c));
  CHECK_THROWS(stage_train(c, std::nullopt));
}

TEST_CASE("diverging training leaves incomplete artifacts only") {
  TempDir tmp("diverge");
  auto c = small_config(tmp.path);
  stage_gen_data(c);
  stage_sft(c);
  c.rl.learning_rate = std::numeric_limits<double>::max();
  CHECK_THROWS_AS(stage_train(c, Algorithm::MMPO), TrainingDiverged);
  CHECK_FALSE(fs::exists(tmp.path / "rl_mmpo.ckpt"));
  CHECK(fs::exists(tmp.path / "rl_mmpo.last_good.ckpt"));
  CHECK(fs::exists(tmp.path / "rl_mmpo.incomplete.jsonl"));
}

TEST_CASE("in-memory compare is reproducible") {
  auto c = small_config("unused");
  const auto a = run_compare(c);
  const auto b = run_compare(c);
  REQUIRE(a.rows.size() == 3);
  CHECK(a.rows[0].label == "SFT");
  CHECK(a.rows[1].label == "SFT + Vanilla GRPO");
  CHECK(a.rows[2].label == "SFT + MMPO");
  CHECK(render_compare(a, ReportFormat::Json) == render_compare(b, ReportFormat::Json));
  const auto table = render_compare(a, ReportFormat::Table);
  CHECK(table.find("Avg. Tokens") != std::string::npos);
  CHECK(table.find("Acc.") != std::string::npos);
}
