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

#include "mmthink/trainer_rl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mmthink/kernels.hpp"

namespace mmthink {

void RlConfig::validate() const {
  if (group_size < 2) throw std::invalid_argument("rl.group_size must be >= 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw std::invalid_argument("rl.clip_epsilon must lie in (0, 1)");
  if (!(kl_coeff >= 0.0) || !std::isfinite(kl_coeff)) throw std::invalid_argument("rl.kl_coeff must be >= 0");
  if (epochs <= 0) throw std::invalid_argument("rl.epochs must be positive");
  if (dataset_size <= 0) throw std::invalid_argument("rl.dataset_size must be positive");
  if (batch_size <= 0) throw std::invalid_argument("rl.batch_size must be positive");
  if (updates_per_batch <= 0) throw std::invalid_argument("rl.updates_per_batch must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("rl.learning_rate must be finite and >= 0");
  if (!(reward.length_penalty_per_token >= 0.0))
    throw std::invalid_argument("rl.length_penalty must be >= 0");
  costs.validate();
}

GroupSample rollout(const PolicySnapshot& old_policy, const PolicySnapshot& ref_policy, const SynthSample& sample,
                    int group_size, Rng& rng, const TokenCosts& costs, const RewardConfig& reward) {
  if (group_size < 2) throw std::invalid_argument("rollout needs G >= 2");
  GroupSample out;
  out.features.assign(sample.features.begin(), sample.features.end());
  GroupRollout& g = out.group;
  g.sample_id = sample.id;
  for (int i = 0; i < group_size; ++i) {
    SampledResponse r = mmthink::sample(old_policy.params(), out.features, rng);
    ParsedResponse parsed = parse(r.text, costs);
    g.rewards.push_back(score(parsed, sample.truth, reward).total);
    g.modes.push_back(parsed.mode);
    g.old_logprobs.push_back(log_prob(old_policy.params(), out.features, r.action));
    g.ref_logprobs.push_back(log_prob(ref_policy.params(), out.features, r.action));
    g.actions.push_back(r.action);
    g.responses.push_back(std::move(parsed));
  }
  return out;
}

double clipped_surrogate(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

SurrogateResult surrogate_loss(const PolicyParams& params, const GroupSample& sample,
                               std::span<const double> advantages, const RlConfig& config) {
  const GroupRollout& g = sample.group;
  g.validate();
  if (advantages.size() != g.size()) throw std::invalid_argument("advantages do not match group size");

  const double eps = config.clip_epsilon;
  const double beta = config.kl_coeff;
  const double inv_g = 1.0 / static_cast<double>(g.size());
  SurrogateResult out{0.0, PolicyParams(params.dim()), 0.0, 0.0};
  std::size_t clipped = 0;

  for (std::size_t i = 0; i < g.size(); ++i) {
    const double lp = log_prob(params, sample.features, g.actions[i]);
    const double log_ratio = lp - g.old_logprobs[i];
    const double log_ref_ratio = g.ref_logprobs[i] - lp;
    const double ratio = std::exp(log_ratio);
    const double ref_ratio = std::exp(log_ref_ratio);
    if (!std::isfinite(ratio) || !std::isfinite(ref_ratio))
      throw std::runtime_error("non-finite importance ratio in group " + g.sample_id);

    const double a = advantages[i];
    const double kl = std::expm1(log_ref_ratio) - log_ref_ratio;
    const bool outside = ratio < 1.0 - eps || ratio > 1.0 + eps;
    clipped += outside;
    out.loss -= (clipped_surrogate(ratio, a, eps) - beta * kl) * inv_g;
    out.mean_kl += kl * inv_g;

    // The unclipped branch carries gradient unless the clipped constant is the
    // strictly smaller of the two.
    const bool clip_active = (a > 0.0 && ratio > 1.0 + eps) || (a < 0.0 && ratio < 1.0 - eps);
    const double d_surrogate = clip_active ? 0.0 : a * ratio;  // d/d lp of the min term
    const double d_kl = 1.0 - ref_ratio;                      // d/d lp of q - ln q - 1
    const double coeff = -(d_surrogate - beta * d_kl) * inv_g;
    if (coeff != 0.0) accumulate_grad_log_prob(params, sample.features, g.actions[i], coeff, out.grad);
  }
  out.clip_fraction = static_cast<double>(clipped) * inv_g;
  return out;
}

RlResult rl_train(const PolicyParams& init, std::span<const SynthSample> dataset, const RlConfig& config,
                  const StepCallback& on_step) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("rl_train needs a nonempty dataset");

  const PolicySnapshot ref(init);
  RlResult result{init, {}};
  PolicyParams& params = result.params;
  std::vector<std::size_t> order(dataset.size());
  std::vector<GroupSample> groups;
  std::vector<std::vector<double>> advantages;
  std::size_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, 0x5eed0000ULL + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const PolicySnapshot old_policy(params);

      StepStats stats;
      stats.step = step;
      stats.epoch = epoch;
      groups.clear();
      advantages.clear();
      std::size_t responses = 0;
      for (std::size_t j = start; j < end; ++j) {
        // One stream per group, so rollouts do not depend on evaluation order.
        Rng rng(derive_seed(config.seed, (static_cast<std::uint64_t>(step) << 16) + (j - start)));
        groups.push_back(rollout(old_policy, ref, dataset[order[j]], config.group_size, rng, config.costs,
                                 config.reward));
        const GroupRollout& g = groups.back().group;
        AdvantageVector adv = mixed_advantage(g, config.algorithm);
        for (std::size_t i = 0; i < g.size(); ++i) {
          stats.mean_reward += g.rewards[i];
          stats.mean_accuracy += (g.responses[i].answer == dataset[order[j]].truth) ? 1.0 : 0.0;
          stats.mean_abs_advantage += std::abs(adv.a_mixed[i]);
          stats.avg_tokens += g.responses[i].token_count;
          ++stats.mode_histogram[g.modes[i] ? index_of(*g.modes[i]) : kNumModes];
          ++responses;
        }
        advantages.push_back(std::move(adv.a_mixed));
      }
      const double inv_r = 1.0 / static_cast<double>(responses);
      stats.mean_reward *= inv_r;
      stats.mean_accuracy *= inv_r;
      stats.mean_abs_advantage *= inv_r;
      stats.avg_tokens *= inv_r;

      const double inv_b = 1.0 / static_cast<double>(groups.size());
      for (int update = 0; update < config.updates_per_batch; ++update) {
        PolicyParams grad(params.dim());
        double loss = 0.0, kl = 0.0, clip = 0.0;
        try {
          for (std::size_t k = 0; k < groups.size(); ++k) {
            const SurrogateResult sr = surrogate_loss(params, groups[k], advantages[k], config);
            loss += sr.loss * inv_b;
            kl += sr.mean_kl * inv_b;
            clip += sr.clip_fraction * inv_b;
            kernels::axpy(inv_b, sr.grad.values(), grad.values());
          }
        } catch (const std::runtime_error& e) {
          throw TrainingDiverged(std::string(e.what()) + " at step " + std::to_string(step), params);
        }
        if (!std::isfinite(loss))
          throw TrainingDiverged("rl loss became non-finite at step " + std::to_string(step), params);
        if (update == 0) {
          stats.loss = loss;
          stats.kl = kl;
        }
        stats.clip_fraction = std::max(stats.clip_fraction, clip);

        PolicyParams before = params;
        kernels::axpy(-config.learning_rate, grad.values(), params.values());
        if (!params.all_finite())
          throw TrainingDiverged("rl parameters became non-finite at step " + std::to_string(step),
                                 std::move(before));
      }

      if (on_step) on_step(stats, params);
      result.stats.push_back(stats);
      ++step;
    }
  }
  return result;
}

}  // namespace mmthink
