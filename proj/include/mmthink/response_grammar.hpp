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

// Tag-structured response language for the three thinking modes.
//
//   quick:        <answer>fake</answer>
//   semantic:     <think>
//                 [image analysis] ...
//                 [text analysis] ...
//                 [cross-modal analysis] ...
//                 [summary] ...
//                 </think>
//                 <answer>real</answer>
//   prospective:  as semantic, plus a final "[attribution] ..." segment
//
// Segment labels must start a line inside the think body. Any duplicated
// <think> or <answer> block makes a response malformed.

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmthink/types.hpp"

namespace mmthink {

/// Think-body token cost per mode. The answer contributes one more token.
struct TokenCosts {
  int quick = 5;
  int semantic = 120;
  int prospective = 180;

  int of(Mode m) const;
  int min() const { return quick; }
  int max() const { return prospective; }
  /// Throws std::invalid_argument unless 0 <= quick < semantic < prospective.
  void validate() const;
};

std::span<const ActionKind> actions_of(Mode m);
std::string_view label_of(ActionKind a);
std::optional<ActionKind> action_from_label(std::string_view label);

struct ThinkSegment {
  std::optional<ActionKind> action;  // nullopt: text not preceded by any label
  std::string text;
};

struct ParsedResponse {
  std::optional<Mode> mode;  // nullopt: unclassifiable
  std::optional<Answer> answer;
  std::vector<ThinkSegment> think_segments;
  bool has_think_block = false;
  int token_count = 0;
  bool well_formed = false;
};

class RenderError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using ActionTexts = std::map<ActionKind, std::string>;

/// Throws RenderError naming the offending action when `texts` does not cover
/// exactly the actions of `mode`, or when a text would break the tag structure.
std::string render(Mode mode, const ActionTexts& texts, Answer answer);

/// Canonical body text for an action, used when the think body is filler.
std::string_view canonical_text(ActionKind a);
std::string render_canonical(Mode mode, Answer answer);

/// Total over arbitrary input. Classifiable well-formed responses are charged
/// their mode's fixed cost plus one answer token; anything else is charged its
/// whitespace-delimited word count.
ParsedResponse parse(std::string_view text, const TokenCosts& costs = {});

std::optional<Mode> classify_mode(const ParsedResponse& parsed);

}  // namespace mmthink
