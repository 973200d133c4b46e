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

// Group-relative policy optimization with either the sample-level advantage
// alone (vanilla GRPO) or the sample-plus-mode mixed advantage (MMPO).
//
// Per group of G responses y_i drawn from pi_old:
//
//   loss = -(1/G) sum_i [ min(r_i A_i, clip(r_i, 1-eps, 1+eps) A_i)
//                         - beta (q_i - ln q_i - 1) ]
//   r_i = pi_theta(y_i) / pi_old(y_i),  q_i = pi_ref(y_i) / pi_theta(y_i)
//
// Ratios are sequence level. pi_ref is the initial parameter set, frozen for
// the whole run.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mmthink/advantage.hpp"
#include "mmthink/policy.hpp"
#include "mmthink/reward.hpp"
#include "mmthink/synth_env.hpp"
#include "mmthink/trainer_sft.hpp"

namespace mmthink {

struct RlConfig {
  int group_size = 8;
  double clip_epsilon = 0.2;
  double kl_coeff = 0.04;
  int epochs = 8;
  int dataset_size = 1000;
  int batch_size = 2;
  double learning_rate = 0.05;
  // Gradient steps taken on each rollout buffer before resampling.
  int updates_per_batch = 1;
  Algorithm algorithm = Algorithm::MMPO;
  std::uint64_t seed = 0;
  TokenCosts costs{};
  RewardConfig reward{};

  void validate() const;
};

struct GroupSample {
  GroupRollout group;
  std::vector<double> features;
};

/// G independent draws from pi_old, rendered, parsed and scored against the sample's label.
GroupSample rollout(const PolicySnapshot& old_policy, const PolicySnapshot& ref_policy,
                    const SynthSample& sample, int group_size, Rng& rng, const TokenCosts& costs = {},
                    const RewardConfig& reward = {});

struct SurrogateResult {
  double loss = 0.0;
  PolicyParams grad;
  double clip_fraction = 0.0;
  double mean_kl = 0.0;
};

/// Per-response clipped surrogate term min(r A, clip(r, 1-eps, 1+eps) A).
double clipped_surrogate(double ratio, double advantage, double clip_epsilon);

SurrogateResult surrogate_loss(const PolicyParams& params, const GroupSample& sample,
                               std::span<const double> advantages, const RlConfig& config);

struct StepStats {
  std::size_t step = 0;
  int epoch = 0;
  double loss = 0.0;
  double mean_reward = 0.0;
  double mean_accuracy = 0.0;
  double mean_abs_advantage = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  std::array<int, kNumModes + 1> mode_histogram{};  // quick, semantic, prospective, unclassifiable
  double avg_tokens = 0.0;
};

struct RlResult {
  PolicyParams params;
  std::vector<StepStats> stats;
};

using StepCallback = std::function<void(const StepStats&, const PolicyParams&)>;

RlResult rl_train(const PolicyParams& init, std::span<const SynthSample> dataset, const RlConfig& config,
                  const StepCallback& on_step = {});

}  // namespace mmthink
