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

#include "mmthink/synth_env.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mmthink/random.hpp"

namespace mmthink {
namespace {

constexpr double kCueLevel = 1.0;

// Per-block label direction, spread so no two blocks share a decision boundary.
std::array<double, 2> direction(std::size_t block) {
  const double angle = std::numbers::pi / 4.0 + static_cast<double>(block) * 2.0 * std::numbers::pi / 3.0;
  return {std::cos(angle), std::sin(angle)};
}

Answer side_of_boundary(std::span<const double> features, std::size_t block) {
  const auto dir = direction(block);
  const double proj = dir[0] * features[block * kBlockSize] + dir[1] * features[block * kBlockSize + 1];
  return proj > 0.0 ? Answer::Fake : Answer::Real;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Medium: return "medium";
    case Difficulty::Hard: return "hard";
  }
  return "unknown";
}

std::optional<Difficulty> difficulty_from_string(std::string_view s) {
  if (s == "easy") return Difficulty::Easy;
  if (s == "medium") return Difficulty::Medium;
  if (s == "hard") return Difficulty::Hard;
  return std::nullopt;
}

void EnvConfig::validate() const {
  double total = 0.0;
  for (double w : mixture) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("mixture weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture weights must sum to 1");
  if (!(label_noise >= 0.0 && label_noise < 0.5)) throw std::invalid_argument("label_noise must lie in [0, 0.5)");
  if (!(feature_noise >= 0.0) || !std::isfinite(feature_noise))
    throw std::invalid_argument("feature_noise must be finite and >= 0");
  if (!(signal_scale > 0.0) || !std::isfinite(signal_scale))
    throw std::invalid_argument("signal_scale must be finite and > 0");
  if (!(distractor_scale >= 0.0) || !std::isfinite(distractor_scale))
    throw std::invalid_argument("distractor_scale must be finite and >= 0");
}

Features observe(std::span<const double> features, Mode mode) {
  if (features.size() != kFeatureDim)
    throw std::invalid_argument("observe expects " + std::to_string(kFeatureDim) + " features");
  Features out{};
  const std::size_t visible = (index_of(mode) + 1) * kBlockSize;
  for (std::size_t i = 0; i < visible; ++i) out[i] = features[i];
  return out;
}

std::vector<SynthSample> generate(const EnvConfig& config, std::size_t n) {
  config.validate();
  if (n == 0) throw std::invalid_argument("generate needs n >= 1");

  Rng rng(config.seed);
  std::discrete_distribution<int> pick_difficulty(config.mixture.begin(), config.mixture.end());
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution flip(config.label_noise);

  std::vector<SynthSample> samples;
  samples.reserve(n);
  char id[24];
  for (std::size_t i = 0; i < n; ++i) {
    SynthSample s;
    std::snprintf(id, sizeof(id), "s%06zu", i);
    s.id = id;
    s.difficulty = static_cast<Difficulty>(pick_difficulty(rng));
    for (double& f : s.features) f = config.feature_noise * gauss(rng);

    const std::size_t block = static_cast<std::size_t>(s.difficulty);
    for (std::size_t b = 0; b < kNumBlocks; ++b) {
      const double scale = b == block ? config.signal_scale : config.distractor_scale;
      s.features[b * kBlockSize] += scale * gauss(rng);
      s.features[b * kBlockSize + 1] += scale * gauss(rng);
    }
    s.features[block * kBlockSize + 2] += kCueLevel;

    s.truth = side_of_boundary(s.features, block);
    if (flip(rng)) s.truth = s.truth == Answer::Fake ? Answer::Real : Answer::Fake;
    samples.push_back(std::move(s));
  }
  return samples;
}

Answer bayes_predict(std::span<const double> features, Mode mode, const EnvConfig&) {
  const Features seen = observe(features, mode);
  // The cue is N(1, s^2) in the labelled block and N(0, s^2) elsewhere, so the
  // most likely labelled block is the visible one with the largest cue, provided
  // that cue is closer to 1 than to 0. Otherwise the label is independent of
  // what is visible and any constant guess is optimal.
  std::size_t best = 0;
  for (std::size_t b = 1; b <= index_of(mode); ++b) {
    if (seen[b * kBlockSize + 2] > seen[best * kBlockSize + 2]) best = b;
  }
  if (seen[best * kBlockSize + 2] < 0.5 * kCueLevel) return Answer::Real;
  return side_of_boundary(seen, best);
}

double bayes_accuracy(const EnvConfig& config, Difficulty difficulty, Mode mode, std::size_t n) {
  EnvConfig one = config;
  one.mixture = {0.0, 0.0, 0.0};
  one.mixture[static_cast<std::size_t>(difficulty)] = 1.0;
  std::size_t correct = 0;
  for (const auto& s : generate(one, n)) correct += bayes_predict(s.features, mode, config) == s.truth;
  return static_cast<double>(correct) / static_cast<double>(n);
}

void write_dataset(std::ostream& out, std::span<const SynthSample> samples, std::string_view config_hash) {
  out << "# mmthink-dataset v1 dim=" << kFeatureDim << " config_hash=" << config_hash << '\n';
  out << "# id difficulty truth";
  for (std::size_t i = 0; i < kFeatureDim; ++i) out << " f" << i;
  out << '\n';
  for (const auto& s : samples) {
    out << s.id << ' ' << to_string(s.difficulty) << ' ' << to_string(s.truth);
    for (double f : s.features) out << ' ' << format_double(f);
    out << '\n';
  }
}

std::vector<SynthSample> read_dataset(std::istream& in) {
  std::vector<SynthSample> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string id, difficulty, truth;
    fields >> id >> difficulty >> truth;
    SynthSample s;
    s.id = id;
    const auto d = difficulty_from_string(difficulty);
    const auto t = answer_from_string(truth);
    if (id.empty() || !d || !t)
      throw std::runtime_error("dataset line " + std::to_string(lineno) + ": bad id/difficulty/truth");
    s.difficulty = *d;
    s.truth = *t;
    for (double& f : s.features) {
      std::string tok;
      if (!(fields >> tok)) throw std::runtime_error("dataset line " + std::to_string(lineno) + ": too few features");
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), f);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw std::runtime_error("dataset line " + std::to_string(lineno) + ": bad feature '" + tok + "'");
    }
    std::string extra;
    if (fields >> extra) throw std::runtime_error("dataset line " + std::to_string(lineno) + ": trailing fields");
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace mmthink
