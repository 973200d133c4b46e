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
#include <set>

#include "mmthink/advantage.hpp"

using namespace mmthink;

namespace {

using M = std::optional<Mode>;
constexpr M Q = Mode::Quick, S = Mode::Semantic, P = Mode::Prospective, U = std::nullopt;

void check_all(const std::vector<double>& got, const std::vector<double>& want, double tol = 1e-12) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

GroupRollout make_group(std::vector<double> rewards, std::vector<M> modes) {
  GroupRollout g;
  g.sample_id = "t";
  const std::size_t n = rewards.size();
  g.rewards = std::move(rewards);
  g.modes = std::move(modes);
  g.actions.resize(n);
  g.responses.resize(n);
  g.old_logprobs.assign(n, 0.0);
  g.ref_logprobs.assign(n, 0.0);
  return g;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

// Expected values below were produced by a separate numpy script.
TEST_CASE("sample advantage worked values") {
  check_all(sample_advantage(std::vector<double>{1, 1, 1, 1}), {0, 0, 0, 0});
  check_all(sample_advantage(std::vector<double>{0, 2}), {-1, 1});
  check_all(sample_advantage(std::vector<double>{0, 1, 1, 2}), {-1.4142135623730951, 0, 0, 1.4142135623730951});
  check_all(sample_advantage(std::vector<double>{0, 1, 1, 1}),
            {-1.7320508075688772, 0.5773502691896258, 0.5773502691896258, 0.5773502691896258});
  CHECK_THROWS_AS(sample_advantage(std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("mode advantage worked values") {
  check_all(mode_advantage(std::vector<double>{0, 1, 1, 1}, std::vector<M>{Q, Q, S, S}), {-1, -1, 1, 1});
  check_all(mode_advantage(std::vector<double>{2, 0, 1}, std::vector<M>{Q, S, P}),
            {1.224744871391589, -1.224744871391589, 0});
  check_all(mode_advantage(std::vector<double>{0, 2, 1}, std::vector<M>{S, S, S}), {0, 0, 0});
  // Equal mode averages: no spread, no signal.
  check_all(mode_advantage(std::vector<double>{0, 2, 1, 1}, std::vector<M>{Q, Q, S, S}), {0, 0, 0, 0});
  CHECK_THROWS_AS(mode_advantage(std::vector<double>{0, 1}, std::vector<M>{Q}), std::invalid_argument);
}

TEST_CASE("unclassifiable responses sit outside the mode statistics") {
  const std::vector<double> r{0, 1, 1, 1, 2};
  const std::vector<M> m{Q, Q, S, S, U};
  check_all(mode_advantage(r, m), {-1, -1, 1, 1, 0});
  const auto st = mode_stats(r, m);
  CHECK(st.n == 2);
  CHECK(st.mean_reward[0] == doctest::Approx(0.5));
  CHECK(st.mean_reward[1] == doctest::Approx(1.0));
  CHECK_FALSE(st.mean_reward[2]);
  check_all(mode_advantage(std::vector<double>{0, 1}, std::vector<M>{U, U}), {0, 0});
}

TEST_CASE("mixed advantage") {
  const auto g = make_group({0, 1, 1, 1}, {Q, Q, S, S});
  const auto a = mixed_advantage(g, Algorithm::MMPO);
  check_all(a.a_sample, {-1.7320508075688772, 0.5773502691896258, 0.5773502691896258, 0.5773502691896258});
  check_all(a.a_mode, {-1, -1, 1, 1});
  for (std::size_t i = 0; i < 4; ++i) CHECK(a.a_mixed[i] == a.a_sample[i] + a.a_mode[i]);

  const auto v = mixed_advantage(g, Algorithm::VanillaGRPO);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(v.a_mode[i] == 0.0);
    CHECK(v.a_mixed[i] == v.a_sample[i]);
  }

  auto bad = g;
  bad.old_logprobs.pop_back();
  CHECK_THROWS_AS(mixed_advantage(bad), std::invalid_argument);
  CHECK_THROWS_AS(mixed_advantage(make_group({1}, {Q})), std::invalid_argument);
}

TEST_CASE("algorithm names") {
  CHECK(algorithm_from_string("grpo") == Algorithm::VanillaGRPO);
  CHECK(algorithm_from_string("mmpo") == Algorithm::MMPO);
  CHECK_FALSE(algorithm_from_string("ppo"));
  CHECK(to_string(Algorithm::MMPO) == "mmpo");
}

TEST_CASE("advantage properties on random groups") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> gsize(2, 16), mode(0, 3), reward(0, 2);
  std::uniform_real_distribution<double> k(0.1, 10.0), c(-5.0, 5.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int g = gsize(rng);
    std::vector<double> r(g);
    std::vector<M> m(g);
    for (int i = 0; i < g; ++i) {
      r[i] = reward(rng);
      const int mi = mode(rng);
      m[i] = mi == 3 ? U : M(static_cast<Mode>(mi));
    }
    const auto as = sample_advantage(r);
    if (pop_std(r) >= kStdFloor) {
      CHECK(std::abs(mean(as)) < 1e-9);
      CHECK(std::abs(pop_std(as) - 1.0) < 1e-9);
    } else {
      for (double x : as) CHECK(x == 0.0);
    }

    std::vector<double> moved(g);
    const double kk = k(rng), cc = c(rng);
    for (int i = 0; i < g; ++i) moved[i] = kk * r[i] + cc;
    check_all(sample_advantage(moved), as, 1e-9);

    const auto am = mode_advantage(r, m);
    const auto st = mode_stats(r, m);
    std::set<int> present;
    for (const auto& x : m)
      if (x) present.insert(static_cast<int>(*x));
    CHECK(st.n == static_cast<int>(present.size()));
    std::vector<double> per_mode;
    for (std::size_t j = 0; j < kNumModes; ++j) {
      if (!st.mean_reward[j]) continue;
      for (int i = 0; i < g; ++i) {
        if (m[i] && index_of(*m[i]) == j) {
          per_mode.push_back(am[i]);
          break;
        }
      }
    }
    for (int i = 0; i < g; ++i) {
      if (!m[i]) CHECK(am[i] == 0.0);
    }
    std::vector<double> means;
    for (const auto& x : st.mean_reward)
      if (x) means.push_back(*x);
    if (st.n >= 2 && pop_std(means) >= kStdFloor) {
      CHECK(std::abs(mean(per_mode)) < 1e-9);
      CHECK(std::abs(pop_std(per_mode) - 1.0) < 1e-9);
    } else {
      for (double x : am) CHECK(x == 0.0);
    }

    const auto mixed = mixed_advantage(make_group(r, m));
    for (int i = 0; i < g; ++i) CHECK(mixed.a_mixed[i] == mixed.a_sample[i] + mixed.a_mode[i]);
  }
}
