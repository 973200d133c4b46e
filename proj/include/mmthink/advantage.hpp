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

// Group-relative advantages. Every quantity is computed within one group of G
// responses to the same sample:
//
//   sample level  A^S_i = (R_i - mean(R)) / std(R)
//   mode level    A^M_i = (Rbar_{m(i)} - mean(Rbar)) / std(Rbar)
//                 over the per-mode average rewards Rbar of the modes present
//   mixed         A_i   = A^S_i + A^M_i
//
// std is the population standard deviation. A spread below kStdFloor yields
// zero advantages. Unclassifiable responses are left out of the mode averages
// and receive A^M = 0.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmthink/response_grammar.hpp"
#include "mmthink/types.hpp"

namespace mmthink {

inline constexpr double kStdFloor = 1e-8;

enum class Algorithm { VanillaGRPO, MMPO };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> algorithm_from_string(std::string_view s);

struct GroupRollout {
  std::string sample_id;
  std::vector<StructuredAction> actions;
  std::vector<ParsedResponse> responses;
  std::vector<double> rewards;
  std::vector<std::optional<Mode>> modes;
  std::vector<double> old_logprobs;
  std::vector<double> ref_logprobs;

  std::size_t size() const { return rewards.size(); }
  /// Throws std::invalid_argument unless all per-response lists share one length G >= 2.
  void validate() const;
};

struct AdvantageVector {
  std::vector<double> a_sample;
  std::vector<double> a_mode;
  std::vector<double> a_mixed;
};

struct ModeStats {
  std::array<std::optional<double>, kNumModes> mean_reward;  // empty when the mode is absent
  int n = 0;                                                 // distinct modes present
};

std::vector<double> sample_advantage(std::span<const double> rewards);

ModeStats mode_stats(std::span<const double> rewards, std::span<const std::optional<Mode>> modes);

std::vector<double> mode_advantage(std::span<const double> rewards,
                                   std::span<const std::optional<Mode>> modes);

/// VanillaGRPO substitutes A^M = 0, so both algorithms share one code path.
AdvantageVector mixed_advantage(const GroupRollout& group, Algorithm algorithm = Algorithm::MMPO);

}  // namespace mmthink
