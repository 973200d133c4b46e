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
#include <numbers>
#include <sstream>

#include "mmthink/synth_env.hpp"

using namespace mmthink;

TEST_CASE("observe masks deeper blocks") {
  Features f;
  for (std::size_t i = 0; i < kFeatureDim; ++i) f[i] = static_cast<double>(i + 1);
  const auto all = observe(f, Mode::Prospective);
  CHECK(all == f);
  const auto q = observe(f, Mode::Quick);
  for (std::size_t i = 0; i < kFeatureDim; ++i) CHECK(q[i] == (i < 3 ? f[i] : 0.0));
  const auto s = observe(f, Mode::Semantic);
  for (std::size_t i = 0; i < kFeatureDim; ++i) CHECK(s[i] == (i < 6 ? f[i] : 0.0));
}

TEST_CASE("generate honours the mixture and the seed") {
  EnvConfig c;
  c.mixture = {1.0, 0.0, 0.0};
  c.seed = 3;
  const auto easy = generate(c, 1000);
  for (const auto& s : easy) CHECK(s.difficulty == Difficulty::Easy);

  EnvConfig d;
  d.seed = 5;
  const auto a = generate(d, 500), b = generate(d, 500);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].features == b[i].features);
    CHECK(a[i].truth == b[i].truth);
  }
  d.seed = 6;
  CHECK(generate(d, 500)[0].features != a[0].features);
}

TEST_CASE("config validation") {
  EnvConfig c;
  c.mixture = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(generate(c, 10), std::invalid_argument);
  c = EnvConfig{};
  c.label_noise = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = EnvConfig{};
  CHECK_THROWS_AS(generate(c, 0), std::invalid_argument);
}

TEST_CASE("quick mode cannot read hard samples") {
  EnvConfig c;
  c.seed = 41;
  const double acc = bayes_accuracy(c, Difficulty::Hard, Mode::Quick, 10000);
  CHECK(std::abs(acc - 0.5) <= 0.02);
}

TEST_CASE("without label noise a linear rule on block one is near perfect on easy samples") {
  EnvConfig c;
  c.mixture = {1.0, 0.0, 0.0};
  c.label_noise = 0.0;
  c.seed = 42;
  const auto samples = generate(c, 2000);
  // Brute-force search over boundary directions through the origin.
  double best = 0.0;
  for (int k = 0; k < 720; ++k) {
    const double angle = k * std::numbers::pi / 360.0;
    const double u = std::cos(angle), v = std::sin(angle);
    std::size_t ok = 0;
    for (const auto& s : samples) {
      const Answer pred = u * s.features[0] + v * s.features[1] > 0 ? Answer::Fake : Answer::Real;
      ok += pred == s.truth;
    }
    best = std::max(best, ok / 2000.0);
  }
  CHECK(best >= 0.98);
}

TEST_CASE("looking deeper never hurts the Bayes reader") {
  EnvConfig c;
  c.seed = 43;
  for (Difficulty d : {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard}) {
    double prev = 0.0;
    for (Mode m : kAllModes) {
      const double acc = bayes_accuracy(c, d, m, 20000);
      CHECK(acc >= prev - 0.01);
      prev = acc;
    }
    // The cheapest sufficient mode reaches the ceiling set by label noise.
    CHECK(bayes_accuracy(c, d, cheapest_sufficient_mode(d), 20000) >= 0.9);
  }
}

TEST_CASE("dataset files round trip exactly") {
  EnvConfig c;
  c.seed = 44;
  const auto samples = generate(c, 300);
  std::stringstream ss;
  write_dataset(ss, samples, "0123456789abcdef");
  CHECK(ss.str().starts_with("# mmthink-dataset v1 dim=9 config_hash=0123456789abcdef\n"));
  const auto back = read_dataset(ss);
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == samples[i].id);
    CHECK(back[i].difficulty == samples[i].difficulty);
    CHECK(back[i].truth == samples[i].truth);
    CHECK(back[i].features == samples[i].features);
  }
  std::stringstream bad("s000000 easy fake 1 2 3\n");
  CHECK_THROWS(read_dataset(bad));
  std::stringstream bad2("s000000 tricky fake 1 2 3 4 5 6 7 8 9\n");
  CHECK_THROWS(read_dataset(bad2));
}
