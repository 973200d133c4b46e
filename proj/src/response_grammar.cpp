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

#include "mmthink/response_grammar.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace mmthink {
namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

constexpr std::array<ActionKind, 4> kSemanticActions = {
    ActionKind::ImageAnalysis, ActionKind::TextAnalysis, ActionKind::CrossModalAnalysis,
    ActionKind::Summary};
constexpr std::array<ActionKind, 5> kProspectiveActions = {
    ActionKind::ImageAnalysis, ActionKind::TextAnalysis, ActionKind::CrossModalAnalysis,
    ActionKind::Summary, ActionKind::Attribution};
constexpr std::array<ActionKind, 5> kAllActionKinds = kProspectiveActions;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) { return std::all_of(s.begin(), s.end(), is_space); }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

std::vector<std::size_t> find_all(std::string_view text, std::string_view needle) {
  std::vector<std::size_t> out;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size()))
    out.push_back(pos);
  return out;
}

int word_count(std::string_view text) {
  int words = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

std::vector<ThinkSegment> split_segments(std::string_view body) {
  std::vector<ThinkSegment> segments;
  bool open_unlabeled = false;
  while (!body.empty()) {
    const std::size_t eol = body.find('\n');
    std::string_view line = body.substr(0, eol);
    body = eol == std::string_view::npos ? std::string_view{} : body.substr(eol + 1);

    const std::string_view stripped = trim(line);
    if (stripped.empty()) {
      open_unlabeled = false;
      continue;
    }
    if (stripped.front() == '[') {
      const std::size_t close = stripped.find(']');
      if (close != std::string_view::npos) {
        if (auto action = action_from_label(stripped.substr(0, close + 1))) {
          segments.push_back({action, std::string(trim(stripped.substr(close + 1)))});
          open_unlabeled = false;
          continue;
        }
      }
    }
    if (!segments.empty() && (segments.back().action || open_unlabeled)) {
      auto& text = segments.back().text;
      if (!text.empty()) text.push_back('\n');
      text.append(stripped);
    } else {
      segments.push_back({std::nullopt, std::string(stripped)});
    }
    if (!segments.back().action) open_unlabeled = true;
  }
  return segments;
}

template <std::size_t N>
bool labels_match(const std::vector<ThinkSegment>& segments, const std::array<ActionKind, N>& want) {
  if (segments.size() != N) return false;
  for (std::size_t i = 0; i < N; ++i) {
    if (segments[i].action != want[i]) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(Answer a) { return a == Answer::Fake ? "fake" : "real"; }

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Quick: return "quick";
    case Mode::Semantic: return "semantic";
    case Mode::Prospective: return "prospective";
  }
  return "unknown";
}

std::optional<Answer> answer_from_string(std::string_view s) {
  s = trim(s);
  if (iequals(s, "real")) return Answer::Real;
  if (iequals(s, "fake")) return Answer::Fake;
  return std::nullopt;
}

std::optional<Mode> mode_from_string(std::string_view s) {
  for (Mode m : kAllModes) {
    if (iequals(trim(s), to_string(m))) return m;
  }
  return std::nullopt;
}

int TokenCosts::of(Mode m) const {
  switch (m) {
    case Mode::Quick: return quick;
    case Mode::Semantic: return semantic;
    case Mode::Prospective: return prospective;
  }
  return 0;
}

void TokenCosts::validate() const {
  if (quick < 0 || !(quick < semantic && semantic < prospective))
    throw std::invalid_argument("token costs must satisfy 0 <= quick < semantic < prospective");
}

std::span<const ActionKind> actions_of(Mode m) {
  switch (m) {
    case Mode::Quick: return {};
    case Mode::Semantic: return kSemanticActions;
    case Mode::Prospective: return kProspectiveActions;
  }
  return {};
}

std::string_view label_of(ActionKind a) {
  switch (a) {
    case ActionKind::ImageAnalysis: return "[image analysis]";
    case ActionKind::TextAnalysis: return "[text analysis]";
    case ActionKind::CrossModalAnalysis: return "[cross-modal analysis]";
    case ActionKind::Summary: return "[summary]";
    case ActionKind::Attribution: return "[attribution]";
  }
  return "[?]";
}

std::optional<ActionKind> action_from_label(std::string_view label) {
  for (ActionKind a : kAllActionKinds) {
    if (label == label_of(a)) return a;
  }
  return std::nullopt;
}

std::string_view canonical_text(ActionKind a) {
  switch (a) {
    case ActionKind::ImageAnalysis: return "key elements of the image are identified.";
    case ActionKind::TextAnalysis: return "claims and details of the text are described.";
    case ActionKind::CrossModalAnalysis: return "image and text are checked for consistency.";
    case ActionKind::Summary: return "evidence is summarized into a verdict.";
    case ActionKind::Attribution: return "generation traces are weighed, AI versus human.";
  }
  return "";
}

std::string render(Mode mode, const ActionTexts& texts, Answer answer) {
  const auto required = actions_of(mode);
  for (ActionKind a : required) {
    if (!texts.contains(a))
      throw RenderError("missing text for action " + std::string(label_of(a)) + " in " +
                        std::string(to_string(mode)) + " mode");
  }
  for (const auto& [action, text] : texts) {
    if (std::find(required.begin(), required.end(), action) == required.end())
      throw RenderError("unexpected text for action " + std::string(label_of(action)) + " in " +
                        std::string(to_string(mode)) + " mode");
    if (text.find_first_of("\r\n") != std::string::npos)
      throw RenderError("text for action " + std::string(label_of(action)) +
                        " must be a single line");
    for (std::string_view tag : {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose}) {
      if (text.find(tag) != std::string::npos)
        throw RenderError("text for action " + std::string(label_of(action)) + " contains tag " +
                          std::string(tag));
    }
  }

  std::string out;
  if (!required.empty()) {
    out.append(kThinkOpen).push_back('\n');
    for (ActionKind a : required) {
      out.append(label_of(a));
      const std::string& text = texts.at(a);
      if (!text.empty()) out.append(" ").append(text);
      out.push_back('\n');
    }
    out.append(kThinkClose).push_back('\n');
  }
  out.append(kAnswerOpen).append(to_string(answer)).append(kAnswerClose);
  return out;
}

std::string render_canonical(Mode mode, Answer answer) {
  ActionTexts texts;
  for (ActionKind a : actions_of(mode)) texts.emplace(a, canonical_text(a));
  return render(mode, texts, answer);
}

ParsedResponse parse(std::string_view text, const TokenCosts& costs) {
  ParsedResponse out;

  const auto think_open = find_all(text, kThinkOpen);
  const auto think_close = find_all(text, kThinkClose);
  const auto answer_open = find_all(text, kAnswerOpen);
  const auto answer_close = find_all(text, kAnswerClose);

  // First well-nested answer block: an opening tag whose next answer tag is a close.
  std::optional<std::pair<std::size_t, std::size_t>> answer_span;
  for (std::size_t open : answer_open) {
    const std::size_t body = open + kAnswerOpen.size();
    const std::size_t close = text.find(kAnswerClose, body);
    if (close == std::string_view::npos) break;
    const std::size_t reopen = text.find(kAnswerOpen, body);
    if (reopen != std::string_view::npos && reopen < close) continue;
    answer_span = {open, close + kAnswerClose.size()};
    out.answer = answer_from_string(text.substr(body, close - body));
    break;
  }

  std::optional<std::pair<std::size_t, std::size_t>> think_span;
  out.has_think_block = !think_open.empty() || !think_close.empty();
  for (std::size_t open : think_open) {
    const std::size_t body = open + kThinkOpen.size();
    const std::size_t close = text.find(kThinkClose, body);
    if (close == std::string_view::npos) break;
    const std::size_t reopen = text.find(kThinkOpen, body);
    if (reopen != std::string_view::npos && reopen < close) continue;
    think_span = {open, close + kThinkClose.size()};
    out.think_segments = split_segments(text.substr(body, close - body));
    break;
  }

  bool ok = out.answer.has_value() && answer_open.size() == 1 && answer_close.size() == 1 &&
            think_open.size() == think_close.size() && think_open.size() <= 1;
  if (ok && think_open.size() == 1) ok = think_span && think_span->second <= answer_span->first;
  if (ok) {
    // Only whitespace may surround or separate the blocks.
    std::size_t cursor = 0;
    if (think_span) {
      ok = blank(text.substr(0, think_span->first));
      cursor = think_span->second;
    }
    ok = ok && blank(text.substr(cursor, answer_span->first - cursor)) &&
         blank(text.substr(answer_span->second));
  }
  out.well_formed = ok;
  out.mode = classify_mode(out);
  out.token_count =
      (out.well_formed && out.mode) ? costs.of(*out.mode) + 1 : word_count(text);
  return out;
}

std::optional<Mode> classify_mode(const ParsedResponse& parsed) {
  if (!parsed.has_think_block) {
    return parsed.answer ? std::optional<Mode>(Mode::Quick) : std::nullopt;
  }
  if (labels_match(parsed.think_segments, kSemanticActions)) return Mode::Semantic;
  if (labels_match(parsed.think_segments, kProspectiveActions)) return Mode::Prospective;
  return std::nullopt;
}

}  // namespace mmthink
