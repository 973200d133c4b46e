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

#include "mmthink/advantage.hpp"

#include <cmath>
#include <stdexcept>

#include "mmthink/kernels.hpp"

namespace mmthink {
namespace {

// Population mean/std standardization with the zero-spread guard.
std::vector<double> standardize(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  const double mean = kernels::sum(values) / n;
  const double sd = std::sqrt(kernels::sum_sq_dev(values, mean) / n);
  std::vector<double> out(values.size(), 0.0);
  if (sd < kStdFloor) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

}  // namespace

std::string_view to_string(Algorithm a) { return a == Algorithm::MMPO ? "mmpo" : "grpo"; }

std::optional<Algorithm> algorithm_from_string(std::string_view s) {
  if (s == "mmpo") return Algorithm::MMPO;
  if (s == "grpo" || s == "vanilla-grpo") return Algorithm::VanillaGRPO;
  return std::nullopt;
}

void GroupRollout::validate() const {
  const std::size_t g = rewards.size();
  if (g < 2) throw std::invalid_argument("group needs at least 2 responses, got " + std::to_string(g));
  if (actions.size() != g || responses.size() != g || modes.size() != g ||
      old_logprobs.size() != g || ref_logprobs.size() != g)
    throw std::invalid_argument("group " + sample_id + ": per-response lists differ in length");
}

std::vector<double> sample_advantage(std::span<const double> rewards) {
  if (rewards.size() < 2)
    throw std::invalid_argument("sample_advantage needs G >= 2, got " + std::to_string(rewards.size()));
  return standardize(rewards);
}

ModeStats mode_stats(std::span<const double> rewards, std::span<const std::optional<Mode>> modes) {
  if (rewards.size() != modes.size())
    throw std::invalid_argument("mode_advantage: rewards and modes differ in length");
  std::array<double, kNumModes> total{};
  std::array<int, kNumModes> count{};
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (!modes[i]) continue;
    total[index_of(*modes[i])] += rewards[i];
    ++count[index_of(*modes[i])];
  }
  ModeStats stats;
  for (std::size_t m = 0; m < kNumModes; ++m) {
    if (count[m] == 0) continue;
    stats.mean_reward[m] = total[m] / count[m];
    ++stats.n;
  }
  return stats;
}

std::vector<double> mode_advantage(std::span<const double> rewards,
                                   std::span<const std::optional<Mode>> modes) {
  if (rewards.size() < 2)
    throw std::invalid_argument("mode_advantage needs G >= 2, got " + std::to_string(rewards.size()));
  const ModeStats stats = mode_stats(rewards, modes);

  std::vector<double> out(rewards.size(), 0.0);
  if (stats.n < 2) return out;

  std::vector<double> averages;
  std::array<std::size_t, kNumModes> slot{};
  for (std::size_t m = 0; m < kNumModes; ++m) {
    if (!stats.mean_reward[m]) continue;
    slot[m] = averages.size();
    averages.push_back(*stats.mean_reward[m]);
  }
  const std::vector<double> normalized = standardize(averages);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (modes[i]) out[i] = normalized[slot[index_of(*modes[i])]];
  }
  return out;
}

AdvantageVector mixed_advantage(const GroupRollout& group, Algorithm algorithm) {
  group.validate();
  AdvantageVector adv;
  adv.a_sample = sample_advantage(group.rewards);
  adv.a_mode = algorithm == Algorithm::MMPO ? mode_advantage(group.rewards, group.modes)
                                            : std::vector<double>(group.size(), 0.0);
  adv.a_mixed.resize(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) adv.a_mixed[i] = adv.a_sample[i] + adv.a_mode[i];
  return adv;
}

}  // namespace mmthink
