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

// Toy structured-response policy standing in for the language model.
//
//   pi(mode, answer | x) = softmax(W x)[mode] * softmax(U_mode observe(x, mode))[answer]
//
// The mode head reads the full feature vector; each answer head reads only
// what its mode observes. All derivatives are analytic.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mmthink/random.hpp"
#include "mmthink/response_grammar.hpp"
#include "mmthink/types.hpp"

namespace mmthink {

/// W (3 x d) followed by U_quick, U_semantic, U_prospective (2 x d each), row-major.
/// Gradients share this layout.
class PolicyParams {
 public:
  static constexpr std::size_t kRows = kNumModes + kNumModes * kNumAnswers;

  explicit PolicyParams(std::size_t dim = 9) : dim_(dim), values_(kRows * dim, 0.0) {}

  std::size_t dim() const { return dim_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::span<double> mode_row(Mode m) { return row(index_of(m)); }
  std::span<const double> mode_row(Mode m) const { return row(index_of(m)); }
  std::span<double> answer_row(Mode m, Answer a) { return row(answer_row_index(m, a)); }
  std::span<const double> answer_row(Mode m, Answer a) const { return row(answer_row_index(m, a)); }

  bool all_finite() const;
  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

 private:
  static std::size_t answer_row_index(Mode m, Answer a) {
    return kNumModes + index_of(m) * kNumAnswers + index_of(a);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(values_).subspan(r * dim_, dim_); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * dim_, dim_);
  }

  std::size_t dim_;
  std::vector<double> values_;
};

/// Frozen copy of a parameter set (the sampling policy or the reference policy).
class PolicySnapshot {
 public:
  explicit PolicySnapshot(PolicyParams params)
      : params_(std::make_shared<const PolicyParams>(std::move(params))) {}
  const PolicyParams& params() const { return *params_; }

 private:
  std::shared_ptr<const PolicyParams> params_;
};

/// Probabilities of the six structured actions, indexed by StructuredAction::flat_index().
using ActionProbs = std::array<double, kNumActions>;

ActionProbs action_probs(const PolicyParams& params, std::span<const double> features);
double log_prob(const PolicyParams& params, std::span<const double> features, StructuredAction action);

/// Adds scale * d log_prob / d params into `grad`.
void accumulate_grad_log_prob(const PolicyParams& params, std::span<const double> features,
                              StructuredAction action, double scale, PolicyParams& grad);
PolicyParams grad_log_prob(const PolicyParams& params, std::span<const double> features,
                           StructuredAction action);

struct SampledResponse {
  StructuredAction action;
  std::string text;
};

SampledResponse sample(const PolicyParams& params, std::span<const double> features, Rng& rng);

/// Most likely mode, then the most likely answer under it.
StructuredAction greedy(const PolicyParams& params, std::span<const double> features);

/// Per-sample estimate of KL(pi_theta || pi_ref): rho - ln rho - 1 with rho = pi_ref / pi_theta.
double kl_estimate(const PolicyParams& params, const PolicySnapshot& ref,
                   std::span<const double> features, StructuredAction action);

// Checkpoint: one header line "mmthink-policy <version> <dim> <config_hash>" and
// one line of 9*dim shortest round-trip decimals.
inline constexpr int kCheckpointVersion = 1;
void write_checkpoint(std::ostream& out, const PolicyParams& params, std::string_view config_hash);
PolicyParams read_checkpoint(std::istream& in);

}  // namespace mmthink
