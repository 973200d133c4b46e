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

// Binary detection metrics with Fake as the positive class.
//
// A missing answer is always wrong. On a Fake sample it counts as a false
// negative; on a Real sample it is a negative prediction that is not a true
// negative, tallied in `missing_on_real`, so that
//   accuracy == (TP + TN) / total.

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "mmthink/response_grammar.hpp"

namespace mmthink {

struct EvalRecord {
  std::string sample_id;
  Answer truth = Answer::Real;
  ParsedResponse parsed;
};

struct MetricReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double avg_tokens = 0.0;
  long tp = 0, fp = 0, fn = 0, tn = 0;
  long missing = 0;          // records without a parsed answer
  long missing_on_real = 0;  // the part of `missing` whose truth is Real
  long total = 0;
  std::array<long, kNumModes + 1> mode_histogram{};  // quick, semantic, prospective, unclassifiable

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Throws std::invalid_argument on an empty input.
MetricReport compute_metrics(std::span<const EvalRecord> records);

enum class ReportFormat { Table, Csv, Json };

std::optional<ReportFormat> report_format_from_string(std::string_view s);

/// Throws std::invalid_argument for formats outside the enum.
std::string render_report(const MetricReport& report, ReportFormat format);

/// Inverse of the json rendering.
MetricReport report_from_json(std::string_view json);

std::string_view csv_header();

}  // namespace mmthink
