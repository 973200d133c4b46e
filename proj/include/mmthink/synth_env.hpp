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

// Synthetic detection samples standing in for image-text pairs.
//
// Features are three blocks of three: two signal coordinates and one cue
// coordinate per block. A sample of difficulty k carries its latent signal and
// a unit cue in block k; the signal coordinates of the other blocks hold
// label-independent distractors, and every coordinate gets Gaussian feature
// noise.
// The clean label is the side of a fixed per-block direction the observed
// signal falls on, flipped with probability label_noise. A mode of depth m
// observes blocks 0..m, so only modes at least as deep as the difficulty can
// beat chance. A cue-gated (Bayes) reader never loses by looking deeper, but a
// single linear reader of several blocks is misled by the distractors.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmthink/types.hpp"

namespace mmthink {

enum class Difficulty { Easy = 0, Medium = 1, Hard = 2 };

std::string_view to_string(Difficulty d);
std::optional<Difficulty> difficulty_from_string(std::string_view s);

inline constexpr std::size_t kBlockSize = 3;
inline constexpr std::size_t kNumBlocks = 3;
inline constexpr std::size_t kFeatureDim = kBlockSize * kNumBlocks;

using Features = std::array<double, kFeatureDim>;

struct SynthSample {
  std::string id;
  Features features{};
  Difficulty difficulty = Difficulty::Easy;
  Answer truth = Answer::Real;
};

struct EnvConfig {
  std::array<double, 3> mixture{0.5, 0.3, 0.2};  // Easy, Medium, Hard
  double label_noise = 0.05;
  double feature_noise = 0.1;
  double signal_scale = 3.0;
  double distractor_scale = 3.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a malformed configuration.
  void validate() const;
};

/// Blocks deeper than the mode are zeroed.
Features observe(std::span<const double> features, Mode mode);

/// The shallowest mode that sees the block carrying the label.
constexpr Mode cheapest_sufficient_mode(Difficulty d) { return static_cast<Mode>(d); }

std::vector<SynthSample> generate(const EnvConfig& config, std::size_t n);

/// Bayes-optimal label under the known generative model, given what `mode` observes.
Answer bayes_predict(std::span<const double> features, Mode mode, const EnvConfig& config);

/// Monte Carlo accuracy of bayes_predict on fresh samples of one difficulty.
double bayes_accuracy(const EnvConfig& config, Difficulty difficulty, Mode mode, std::size_t n);

// Line-delimited text records: "id difficulty truth f0 .. f8", preceded by a
// '#' header carrying the schema version and the producing config hash.
void write_dataset(std::ostream& out, std::span<const SynthSample> samples,
                   std::string_view config_hash);
std::vector<SynthSample> read_dataset(std::istream& in);

}  // namespace mmthink
