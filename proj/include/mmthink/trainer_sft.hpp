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

// Supervised stage: negative log-likelihood of teacher (mode, answer) targets,
// optimized with plain minibatch gradient descent.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmthink/policy.hpp"
#include "mmthink/synth_env.hpp"

namespace mmthink {

struct SftExample {
  SynthSample sample;
  Mode target_mode = Mode::Quick;
  Answer target_answer = Answer::Real;
};

/// Teacher labelling: the cheapest sufficient mode and the recorded label.
SftExample teacher_example(const SynthSample& sample);
std::vector<SftExample> teacher_dataset(std::span<const SynthSample> samples);

struct SftConfig {
  int epochs = 3;
  int batch_size = 8;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossAndGrad {
  double loss = 0.0;
  PolicyParams grad;
};

LossAndGrad sft_loss(const PolicyParams& params, std::span<const SftExample> batch);

struct SftResult {
  PolicyParams params;
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;  // full-dataset loss after each epoch
  std::size_t steps = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, PolicyParams last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const PolicyParams& last_good() const { return last_good_; }

 private:
  PolicyParams last_good_;
};

SftResult sft_train(const PolicyParams& init, std::span<const SftExample> dataset, const SftConfig& config);

}  // namespace mmthink
