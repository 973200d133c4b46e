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

#include "mmthink/response_grammar.hpp"

namespace mmthink {

struct RewardConfig {
  // Extension knob, off by default: subtracts per_token * token_count.
  double length_penalty_per_token = 0.0;
};

struct RewardBreakdown {
  int r_acc = 0;
  int r_format = 0;
  double length_penalty = 0.0;
  double total = 0.0;
};

/// r_acc: parsed answer equals truth. r_format: well formed with a classifiable mode.
RewardBreakdown score(const ParsedResponse& parsed, Answer truth, const RewardConfig& config = {});

}  // namespace mmthink
