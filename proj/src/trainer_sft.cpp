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

#include "mmthink/trainer_sft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmthink/kernels.hpp"
#include "mmthink/random.hpp"

namespace mmthink {

SftExample teacher_example(const SynthSample& sample) {
  return {sample, cheapest_sufficient_mode(sample.difficulty), sample.truth};
}

std::vector<SftExample> teacher_dataset(std::span<const SynthSample> samples) {
  std::vector<SftExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(teacher_example(s));
  return out;
}

void SftConfig::validate() const {
  if (epochs <= 0) throw std::invalid_argument("sft.epochs must be positive");
  if (batch_size <= 0) throw std::invalid_argument("sft.batch_size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("sft.learning_rate must be finite and >= 0");
}

LossAndGrad sft_loss(const PolicyParams& params, std::span<const SftExample> batch) {
  if (batch.empty()) throw std::invalid_argument("sft_loss needs a nonempty batch");
  LossAndGrad out{0.0, PolicyParams(params.dim())};
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const StructuredAction target{ex.target_mode, ex.target_answer};
    out.loss -= log_prob(params, ex.sample.features, target) * inv_n;
    accumulate_grad_log_prob(params, ex.sample.features, target, -inv_n, out.grad);
  }
  return out;
}

SftResult sft_train(const PolicyParams& init, std::span<const SftExample> dataset, const SftConfig& config) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("sft_train needs a nonempty dataset");

  SftResult result{init, sft_loss(init, dataset).loss, {}, 0};
  PolicyParams& params = result.params;
  std::vector<std::size_t> order(dataset.size());
  std::vector<SftExample> batch;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(dataset[order[i]]);

      const LossAndGrad lg = sft_loss(params, batch);
      if (!std::isfinite(lg.loss))
        throw TrainingDiverged("sft loss became non-finite at epoch " + std::to_string(epoch) + ", step " +
                                   std::to_string(result.steps),
                               params);
      PolicyParams before = params;
      kernels::axpy(-config.learning_rate, lg.grad.values(), params.values());
      if (!params.all_finite())
        throw TrainingDiverged("sft parameters became non-finite at step " + std::to_string(result.steps),
                               std::move(before));
      ++result.steps;
    }
    const double loss = sft_loss(params, dataset).loss;
    if (!std::isfinite(loss))
      throw TrainingDiverged("sft loss became non-finite after epoch " + std::to_string(epoch), params);
    result.epoch_loss.push_back(loss);
  }
  return result;
}

}  // namespace mmthink
