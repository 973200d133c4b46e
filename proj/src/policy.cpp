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

#include "mmthink/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mmthink/kernels.hpp"

namespace mmthink {
namespace {

void check_dim(const PolicyParams& params, std::span<const double> features) {
  if (features.size() != params.dim())
    throw std::invalid_argument("feature dimension " + std::to_string(features.size()) +
                                " does not match policy dimension " + std::to_string(params.dim()));
  if (params.dim() % 3 != 0)
    throw std::invalid_argument("policy dimension must split into three blocks");
}

// Leading coordinates an answer head of this mode can see.
std::size_t visible(std::size_t dim, Mode m) { return (index_of(m) + 1) * (dim / 3); }

template <std::size_t N>
std::array<double, N> log_softmax(const std::array<double, N>& logits) {
  const double hi = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - hi);
  const double lse = hi + std::log(z);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = logits[i] - lse;
  return out;
}

std::array<double, kNumModes> mode_log_probs(const PolicyParams& p, std::span<const double> x) {
  std::array<double, kNumModes> logits;
  for (Mode m : kAllModes) logits[index_of(m)] = kernels::dot(p.mode_row(m), x);
  return log_softmax(logits);
}

std::array<double, kNumAnswers> answer_log_probs(const PolicyParams& p, std::span<const double> x, Mode m) {
  const std::size_t k = visible(p.dim(), m);
  std::array<double, kNumAnswers> logits;
  for (Answer a : kAllAnswers) logits[index_of(a)] = kernels::dot(p.answer_row(m, a).first(k), x.first(k));
  return log_softmax(logits);
}

template <std::size_t N>
std::size_t draw(const std::array<double, N>& log_probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    acc += std::exp(log_probs[i]);
    if (u < acc) return i;
  }
  return N - 1;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

bool PolicyParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ActionProbs action_probs(const PolicyParams& params, std::span<const double> features) {
  check_dim(params, features);
  const auto lm = mode_log_probs(params, features);
  ActionProbs probs{};
  for (Mode m : kAllModes) {
    const auto la = answer_log_probs(params, features, m);
    for (Answer a : kAllAnswers)
      probs[StructuredAction{m, a}.flat_index()] = std::exp(lm[index_of(m)] + la[index_of(a)]);
  }
  return probs;
}

double log_prob(const PolicyParams& params, std::span<const double> features, StructuredAction action) {
  check_dim(params, features);
  return mode_log_probs(params, features)[index_of(action.mode)] +
         answer_log_probs(params, features, action.mode)[index_of(action.answer)];
}

void accumulate_grad_log_prob(const PolicyParams& params, std::span<const double> features,
                              StructuredAction action, double scale, PolicyParams& grad) {
  check_dim(params, features);
  if (grad.dim() != params.dim()) throw std::invalid_argument("gradient dimension mismatch");

  // d log softmax(z)[k] / dz_j = [j == k] - p_j, and dz_j / d row_j = x.
  const auto lm = mode_log_probs(params, features);
  for (Mode m : kAllModes) {
    const double coeff = (m == action.mode ? 1.0 : 0.0) - std::exp(lm[index_of(m)]);
    kernels::axpy(scale * coeff, features, grad.mode_row(m));
  }
  const std::size_t k = visible(params.dim(), action.mode);
  const auto la = answer_log_probs(params, features, action.mode);
  for (Answer a : kAllAnswers) {
    const double coeff = (a == action.answer ? 1.0 : 0.0) - std::exp(la[index_of(a)]);
    kernels::axpy(scale * coeff, features.first(k), grad.answer_row(action.mode, a).first(k));
  }
}

PolicyParams grad_log_prob(const PolicyParams& params, std::span<const double> features,
                           StructuredAction action) {
  PolicyParams grad(params.dim());
  accumulate_grad_log_prob(params, features, action, 1.0, grad);
  return grad;
}

SampledResponse sample(const PolicyParams& params, std::span<const double> features, Rng& rng) {
  check_dim(params, features);
  const Mode mode = static_cast<Mode>(draw(mode_log_probs(params, features), rng));
  const Answer answer = static_cast<Answer>(draw(answer_log_probs(params, features, mode), rng));
  return {{mode, answer}, render_canonical(mode, answer)};
}

StructuredAction greedy(const PolicyParams& params, std::span<const double> features) {
  check_dim(params, features);
  const auto lm = mode_log_probs(params, features);
  const auto mode = static_cast<Mode>(std::max_element(lm.begin(), lm.end()) - lm.begin());
  const auto la = answer_log_probs(params, features, mode);
  const auto answer = static_cast<Answer>(std::max_element(la.begin(), la.end()) - la.begin());
  return {mode, answer};
}

double kl_estimate(const PolicyParams& params, const PolicySnapshot& ref, std::span<const double> features,
                   StructuredAction action) {
  const double log_rho = log_prob(ref.params(), features, action) - log_prob(params, features, action);
  // expm1 keeps the estimate exactly zero at log_rho == 0 and accurate near it.
  const double value = std::expm1(log_rho) - log_rho;
  return value > 0.0 ? value : 0.0;
}

void write_checkpoint(std::ostream& out, const PolicyParams& params, std::string_view config_hash) {
  out << "mmthink-policy " << kCheckpointVersion << ' ' << params.dim() << ' '
      << (config_hash.empty() ? std::string_view("-") : config_hash) << '\n';
  bool first = true;
  for (double v : params.values()) {
    if (!first) out << ' ';
    out << format_double(v);
    first = false;
  }
  out << '\n';
}

PolicyParams read_checkpoint(std::istream& in) {
  std::string magic, hash;
  int version = 0;
  std::size_t dim = 0;
  if (!(in >> magic >> version >> dim >> hash) || magic != "mmthink-policy")
    throw std::runtime_error("not a policy checkpoint");
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  if (dim == 0 || dim % 3 != 0) throw std::runtime_error("bad checkpoint dimension " + std::to_string(dim));
  PolicyParams params(dim);
  for (double& v : params.values()) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("checkpoint truncated");
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v))
      throw std::runtime_error("bad checkpoint value '" + tok + "'");
  }
  std::string extra;
  if (in >> extra) throw std::runtime_error("trailing data in checkpoint");
  return params;
}

}  // namespace mmthink
