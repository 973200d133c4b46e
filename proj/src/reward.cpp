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

#include "mmthink/reward.hpp"

namespace mmthink {

RewardBreakdown score(const ParsedResponse& parsed, Answer truth, const RewardConfig& config) {
  RewardBreakdown r;
  r.r_acc = (parsed.answer && *parsed.answer == truth) ? 1 : 0;
  r.r_format = (parsed.well_formed && parsed.mode) ? 1 : 0;
  r.length_penalty = config.length_penalty_per_token * parsed.token_count;
  r.total = r.r_acc + r.r_format - r.length_penalty;
  return r;
}

}  // namespace mmthink
