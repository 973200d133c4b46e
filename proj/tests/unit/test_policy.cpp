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

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mmthink/policy.hpp"

using namespace mmthink;

namespace {

PolicyParams random_params(std::mt19937_64& rng, double scale = 1.0) {
  PolicyParams p(9);
  std::normal_distribution<double> g(0.0, scale);
  for (double& v : p.values()) v = g(rng);
  return p;
}

std::vector<double> random_features(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.5);
  std::vector<double> x(9);
  for (double& v : x) v = g(rng);
  return x;
}

// Softmax evaluated directly, without the library's log-sum-exp path.
double direct_prob(const PolicyParams& p, const std::vector<double>& x, StructuredAction a) {
  double zm[3], za[2];
  for (Mode m : kAllModes) {
    zm[index_of(m)] = 0;
    for (std::size_t i = 0; i < 9; ++i) zm[index_of(m)] += p.mode_row(m)[i] * x[i];
  }
  const std::size_t visible = (index_of(a.mode) + 1) * 3;
  for (Answer ans : kAllAnswers) {
    za[index_of(ans)] = 0;
    for (std::size_t i = 0; i < visible; ++i) za[index_of(ans)] += p.answer_row(a.mode, ans)[i] * x[i];
  }
  const double pm = std::exp(zm[index_of(a.mode)]) / (std::exp(zm[0]) + std::exp(zm[1]) + std::exp(zm[2]));
  const double pa = std::exp(za[index_of(a.answer)]) / (std::exp(za[0]) + std::exp(za[1]));
  return pm * pa;
}

}  // namespace

TEST_CASE("uniform policy") {
  const PolicyParams p(9);
  const std::vector<double> x{1, -2, 3, 0.5, 0, 7, -1, 2, 4};
  for (std::size_t i = 0; i < kNumActions; ++i)
    CHECK(log_prob(p, x, StructuredAction::from_flat(i)) == doctest::Approx(-std::log(6.0)).epsilon(1e-15));
  const auto g = grad_log_prob(p, x, {Mode::Semantic, Answer::Fake});
  for (std::size_t i = 0; i < 9; ++i) {
    double col = 0;
    for (Mode m : kAllModes) col += g.mode_row(m)[i];
    CHECK(std::abs(col) < 1e-15);
  }
}

TEST_CASE("probabilities normalize and match a direct softmax") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_params(rng, 2.0);
    const auto x = random_features(rng);
    const auto probs = action_probs(p, x);
    double total = 0;
    for (std::size_t i = 0; i < kNumActions; ++i) {
      total += probs[i];
      const auto a = StructuredAction::from_flat(i);
      CHECK(std::exp(log_prob(p, x, a)) == doctest::Approx(direct_prob(p, x, a)).epsilon(1e-12));
      CHECK(log_prob(p, x, a) <= 0.0);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("a growing logit drives log_prob up to zero") {
  const std::vector<double> x{1, 0, 0, 0, 0, 0, 0, 0, 0};
  double prev = -INFINITY;
  for (double t : {0.0, 1.0, 5.0, 10.0, 20.0, 40.0}) {
    PolicyParams p(9);
    p.mode_row(Mode::Quick)[0] = t;
    p.answer_row(Mode::Quick, Answer::Fake)[0] = t;
    const double lp = log_prob(p, x, {Mode::Quick, Answer::Fake});
    CHECK(lp > prev);
    CHECK(lp <= 0.0);
    CHECK(lp == doctest::Approx(std::log(direct_prob(p, x, {Mode::Quick, Answer::Fake}))).epsilon(1e-12));
    prev = lp;
  }
  CHECK(prev > -1e-15);
}

TEST_CASE("dimension checks") {
  const PolicyParams p(9);
  const std::vector<double> short_x(8, 0.0);
  CHECK_THROWS_AS(log_prob(p, short_x, {}), std::invalid_argument);
  CHECK_THROWS_AS(grad_log_prob(p, short_x, {}), std::invalid_argument);
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::size_t> pick(0, kNumActions - 1);
  constexpr double h = 1e-5;
  for (int t = 0; t < 100; ++t) {
    auto p = random_params(rng);
    const auto x = random_features(rng);
    const auto a = StructuredAction::from_flat(pick(rng));
    const auto g = grad_log_prob(p, x, a);
    double err = 0, norm = 0;
    for (std::size_t i = 0; i < p.values().size(); ++i) {
      const double keep = p.values()[i];
      p.values()[i] = keep + h;
      const double up = log_prob(p, x, a);
      p.values()[i] = keep - h;
      const double down = log_prob(p, x, a);
      p.values()[i] = keep;
      const double fd = (up - down) / (2 * h);
      err += (fd - g.values()[i]) * (fd - g.values()[i]);
      norm += g.values()[i] * g.values()[i];
    }
    CHECK(std::sqrt(err) / std::max(std::sqrt(norm), 1e-12) < 1e-4);
    for (Mode m : kAllModes) {
      if (m == a.mode) continue;
      for (Answer ans : kAllAnswers)
        for (double v : g.answer_row(m, ans)) CHECK(v == 0.0);
    }
    // Answer heads only see their mode's blocks.
    for (Answer ans : kAllAnswers) {
      const auto row = g.answer_row(a.mode, ans);
      for (std::size_t i = (index_of(a.mode) + 1) * 3; i < 9; ++i) CHECK(row[i] == 0.0);
    }
  }
}

TEST_CASE("accumulate adds a scaled gradient") {
  std::mt19937_64 rng(33);
  const auto p = random_params(rng);
  const auto x = random_features(rng);
  const StructuredAction a{Mode::Prospective, Answer::Real};
  PolicyParams acc(9);
  accumulate_grad_log_prob(p, x, a, 0.5, acc);
  accumulate_grad_log_prob(p, x, a, 1.5, acc);
  const auto g = grad_log_prob(p, x, a);
  for (std::size_t i = 0; i < g.values().size(); ++i)
    CHECK(acc.values()[i] == doctest::Approx(2.0 * g.values()[i]).epsilon(1e-14));
}

TEST_CASE("sampling frequencies") {
  const PolicyParams uniform(9);
  const std::vector<double> x{0.3, -1, 2, 0, 1, 1, -2, 0.5, 0};
  Rng rng(34);
  std::array<int, kNumActions> counts{};
  constexpr int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[sample(uniform, x, rng).action.flat_index()];
  for (int c : counts) CHECK(std::abs(c / double(n) - 1.0 / 6.0) <= 0.02 / 6.0);

  PolicyParams sharp(9);
  sharp.mode_row(Mode::Semantic)[0] = 30.0;
  sharp.answer_row(Mode::Semantic, Answer::Real)[0] = 30.0;
  const std::vector<double> e0{1, 0, 0, 0, 0, 0, 0, 0, 0};
  for (int i = 0; i < 1000; ++i) {
    const auto s = sample(sharp, e0, rng);
    CHECK(s.action == StructuredAction{Mode::Semantic, Answer::Real});
  }
  CHECK(greedy(sharp, e0) == StructuredAction{Mode::Semantic, Answer::Real});
}

TEST_CASE("sampling is reproducible and renders parseable text") {
  std::mt19937_64 prng(35);
  const auto p = random_params(prng);
  const auto x = random_features(prng);
  Rng a(99), b(99);
  for (int i = 0; i < 200; ++i) {
    const auto sa = sample(p, x, a);
    const auto sb = sample(p, x, b);
    CHECK(sa.action == sb.action);
    CHECK(sa.text == sb.text);
    const auto parsed = parse(sa.text);
    CHECK(parsed.well_formed);
    CHECK(parsed.mode == sa.action.mode);
    CHECK(parsed.answer == sa.action.answer);
  }
}

TEST_CASE("kl estimate") {
  std::mt19937_64 prng(36);
  const auto ref_params = random_params(prng);
  const PolicySnapshot ref(ref_params);
  const auto x = random_features(prng);
  for (std::size_t i = 0; i < kNumActions; ++i)
    CHECK(kl_estimate(ref_params, ref, x, StructuredAction::from_flat(i)) == 0.0);

  for (int t = 0; t < 200; ++t) {
    const auto p = random_params(prng, 3.0);
    for (std::size_t i = 0; i < kNumActions; ++i) CHECK(kl_estimate(p, ref, x, StructuredAction::from_flat(i)) >= 0.0);
  }

  // Monte Carlo mean against the exact KL over the six actions.
  auto theta = ref_params;
  std::normal_distribution<double> g(0.0, 0.5);
  for (double& v : theta.values()) v += g(prng);
  const auto pt = action_probs(theta, x);
  const auto pr = action_probs(ref_params, x);
  double exact = 0;
  for (std::size_t i = 0; i < kNumActions; ++i) exact += pt[i] * std::log(pt[i] / pr[i]);
  Rng rng(37);
  double total = 0;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) total += kl_estimate(theta, ref, x, sample(theta, x, rng).action);
  CHECK(std::abs(total / n - exact) <= 0.01 * exact);
}

TEST_CASE("snapshots do not follow later edits") {
  PolicyParams p(9);
  const PolicySnapshot snap(p);
  p.values()[0] = 5.0;
  CHECK(snap.params().values()[0] == 0.0);
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 prng(38);
  const auto p = random_params(prng);
  std::stringstream ss;
  write_checkpoint(ss, p, "abc123");
  const auto q = read_checkpoint(ss);
  CHECK(q == p);

  std::stringstream bad("mmthink-policy 1 9 abc\n1 2 3\n");
  CHECK_THROWS(read_checkpoint(bad));
  std::stringstream garbage("hello\n");
  CHECK_THROWS(read_checkpoint(garbage));
}
