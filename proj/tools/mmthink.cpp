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

// mmthink: experiment runner.
//
//   mmthink gen-data --config cfg.json [--set key=value ...] [--out DIR]
//   mmthink sft      --config cfg.json
//   mmthink train    --config cfg.json [--algorithm grpo|mmpo]
//   mmthink eval     --config cfg.json --checkpoint FILE [--name NAME]
//   mmthink compare  --config cfg.json [--seeds N]
//
// Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmthink/pipeline.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

mmthink::ExperimentConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides,
                                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw mmthink::ConfigError("config file not found: " + path);
  nlohmann::json j;
  {
    std::ifstream in(path);
    j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw mmthink::ConfigError("cannot parse config file " + path);
  }
  mmthink::apply_overrides(j, overrides);
  mmthink::ExperimentConfig config = mmthink::config_from_json(j);
  if (!out_dir.empty()) config.output_dir = out_dir;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive thinking-mode policy optimization lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON experiment config")->required();
    sub->add_option("-s,--set", overrides, "override a config value, e.g. rl.group_size=4");
    sub->add_option("-o,--out", out_dir, "output directory (overrides output_dir)");
  };

  auto* gen = app.add_subcommand("gen-data", "generate the sft, rl and eval datasets");
  add_common(gen);
  auto* sft = app.add_subcommand("sft", "supervised stage on the teacher dataset");
  add_common(sft);

  auto* train = app.add_subcommand("train", "policy optimization from the sft checkpoint");
  add_common(train);
  std::string algorithm;
  train->add_option("-a,--algorithm", algorithm, "grpo or mmpo (default: rl.algorithm)")
      ->check(CLI::IsMember({"grpo", "mmpo"}));

  auto* eval = app.add_subcommand("eval", "metric report for a checkpoint on the eval set");
  add_common(eval);
  std::string checkpoint;
  std::string name;
  eval->add_option("-k,--checkpoint", checkpoint, "policy checkpoint file")->required();
  eval->add_option("-n,--name", name, "report name (default: checkpoint stem)");

  auto* compare = app.add_subcommand("compare", "vanilla GRPO vs MMPO from one sft checkpoint");
  add_common(compare);
  int seeds = 1;
  compare->add_option("--seeds", seeds, "repeat with seeds seed, seed+1, ...")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  mmthink::ExperimentConfig config;
  try {
    config = resolve_config(config_path, overrides, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "mmthink: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*gen) {
      mmthink::stage_gen_data(config);
      std::cout << "datasets written to " << (config.output_dir / "data").string() << "\n";
    } else if (*sft) {
      mmthink::stage_sft(config);
      std::cout << "checkpoint written to " << (config.output_dir / "sft.ckpt").string() << "\n";
    } else if (*train) {
      std::optional<mmthink::Algorithm> algo;
      if (!algorithm.empty()) algo = mmthink::algorithm_from_string(algorithm);
      mmthink::stage_train(config, algo);
      std::cout << "training finished (" << mmthink::to_string(algo.value_or(config.rl.algorithm)) << ")\n";
    } else if (*eval) {
      if (name.empty()) name = std::filesystem::path(checkpoint).stem().string();
      const auto report = mmthink::stage_eval(config, checkpoint, name);
      std::cout << mmthink::render_report(report, mmthink::ReportFormat::Table);
    } else if (*compare) {
      int both = 0;
      const auto base_dir = config.output_dir;
      for (int k = 0; k < seeds; ++k) {
        mmthink::ExperimentConfig run = config;
        run.seed = config.seed + static_cast<std::uint64_t>(k);
        if (seeds > 1) run.output_dir = base_dir / ("seed" + std::to_string(run.seed));
        const auto result = mmthink::stage_compare(run);
        std::cout << "seed " << run.seed << "\n" << mmthink::render_compare(result, mmthink::ReportFormat::Table);
        const auto& grpo = result.rows[1].report;
        const auto& mmpo = result.rows[2].report;
        both += (mmpo.avg_tokens <= grpo.avg_tokens && mmpo.accuracy >= grpo.accuracy) ? 1 : 0;
      }
      if (seeds > 1)
        std::cout << "MMPO uses no more tokens and is at least as accurate on " << both << "/" << seeds
                  << " seeds\n";
    }
  } catch (const mmthink::ConfigError& e) {
    std::cerr << "mmthink: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "mmthink: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
