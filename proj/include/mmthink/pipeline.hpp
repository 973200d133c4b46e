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

#pragma once

// Experiment configuration and the stages behind the command-line tool.
//
// Every stage reads and writes files under ExperimentConfig::output_dir:
//
//   data/{sft,rl,eval}.txt          datasets (gen-data)
//   sft.ckpt, sft_loss.csv          supervised stage (sft)
//   rl_<algo>.ckpt, rl_<algo>.jsonl policy optimization (train)
//   checkpoints/rl_<algo>_epoch<k>.ckpt
//   eval_<name>.{json,csv,txt}      metric reports (eval)
//   compare.{json,csv,txt}          side-by-side report (compare)
//
// Files are written to a temporary name and renamed into place, so an
// interrupted stage never leaves a complete-looking artifact behind.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmthink/advantage.hpp"
#include "mmthink/metrics.hpp"
#include "mmthink/policy.hpp"
#include "mmthink/synth_env.hpp"
#include "mmthink/trainer_rl.hpp"
#include "mmthink/trainer_sft.hpp"

namespace mmthink {

enum class Decoding { Sample, Greedy };

struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::filesystem::path output_dir = "runs/default";
  TokenCosts costs{};
  EnvConfig env{};
  SftConfig sft{};
  int sft_dataset_size = 2000;
  RlConfig rl{};
  int eval_size = 2000;
  Decoding eval_decoding = Decoding::Sample;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Sub-stage seeds derived from the global seed.
  EnvConfig env_for(std::string_view split) const;
  SftConfig sft_resolved() const;
  RlConfig rl_resolved(std::optional<Algorithm> algorithm = std::nullopt) const;
  std::uint64_t eval_seed() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies "a.b.c=value" overrides; value is parsed as JSON, falling back to a string.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides);

/// 16 hex digits (FNV-1a 64) over the canonical config, excluding output_dir.
std::string config_hash(const ExperimentConfig& config);

struct Datasets {
  std::vector<SynthSample> sft;
  std::vector<SynthSample> rl;
  std::vector<SynthSample> eval;
};

Datasets make_datasets(const ExperimentConfig& config);

std::vector<EvalRecord> evaluate(const PolicyParams& params, std::span<const SynthSample> samples,
                                 const TokenCosts& costs, Decoding decoding, std::uint64_t seed);

struct CompareRow {
  std::string label;
  MetricReport report;
};

struct CompareResult {
  std::string config_hash;
  std::vector<CompareRow> rows;  // SFT, SFT + vanilla GRPO, SFT + MMPO
  std::vector<StepStats> grpo_stats;
  std::vector<StepStats> mmpo_stats;
};

std::string render_compare(const CompareResult& result, ReportFormat format);

// Stages. Each returns normally on success and throws on failure.
void stage_gen_data(const ExperimentConfig& config);
void stage_sft(const ExperimentConfig& config);
void stage_train(const ExperimentConfig& config, std::optional<Algorithm> algorithm);
MetricReport stage_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                        const std::string& name);
CompareResult stage_compare(const ExperimentConfig& config);

/// The whole compare pipeline in memory, without touching the filesystem.
CompareResult run_compare(const ExperimentConfig& config);

/// Writes `content` to `path` through a temporary file and an atomic rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace mmthink
