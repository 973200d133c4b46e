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

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace mmthink {

enum class Answer { Real = 0, Fake = 1 };

// Reasoning depth, ordered shallow to deep.
enum class Mode { Quick = 0, Semantic = 1, Prospective = 2 };

enum class ActionKind { ImageAnalysis, TextAnalysis, CrossModalAnalysis, Summary, Attribution };

inline constexpr std::size_t kNumModes = 3;
inline constexpr std::size_t kNumAnswers = 2;
inline constexpr std::size_t kNumActions = kNumModes * kNumAnswers;

inline constexpr std::array<Mode, kNumModes> kAllModes = {Mode::Quick, Mode::Semantic,
                                                          Mode::Prospective};
inline constexpr std::array<Answer, kNumAnswers> kAllAnswers = {Answer::Real, Answer::Fake};

constexpr std::size_t index_of(Mode m) { return static_cast<std::size_t>(m); }
constexpr std::size_t index_of(Answer a) { return static_cast<std::size_t>(a); }

/// What the toy policy decides for one response: how deep to think and what to answer.
/// The think body itself is filled canonically.
struct StructuredAction {
  Mode mode = Mode::Quick;
  Answer answer = Answer::Real;

  friend bool operator==(const StructuredAction&, const StructuredAction&) = default;

  /// Flat index in [0, 6): mode-major.
  constexpr std::size_t flat_index() const { return index_of(mode) * kNumAnswers + index_of(answer); }
  static constexpr StructuredAction from_flat(std::size_t i) {
    return {static_cast<Mode>(i / kNumAnswers), static_cast<Answer>(i % kNumAnswers)};
  }
};

std::string_view to_string(Answer a);
std::string_view to_string(Mode m);
std::optional<Answer> answer_from_string(std::string_view s);
std::optional<Mode> mode_from_string(std::string_view s);

}  // namespace mmthink
