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

#include "mmthink/metrics.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace mmthink {
namespace {

using ojson = nlohmann::ordered_json;

constexpr std::array<std::string_view, kNumModes + 1> kHistogramKeys = {"quick", "semantic", "prospective",
                                                                        "unclassifiable"};

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ratio(long num, long den) { return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0; }

}  // namespace

MetricReport compute_metrics(std::span<const EvalRecord> records) {
  if (records.empty()) throw std::invalid_argument("compute_metrics needs at least one record");
  MetricReport r;
  double tokens = 0.0;
  for (const auto& rec : records) {
    const bool positive_truth = rec.truth == Answer::Fake;
    if (!rec.parsed.answer) {
      ++r.missing;
      if (positive_truth) ++r.fn;
      else ++r.missing_on_real;
    } else {
      const bool positive_pred = *rec.parsed.answer == Answer::Fake;
      if (positive_pred && positive_truth) ++r.tp;
      else if (positive_pred) ++r.fp;
      else if (positive_truth) ++r.fn;
      else ++r.tn;
    }
    ++r.mode_histogram[rec.parsed.mode ? index_of(*rec.parsed.mode) : kNumModes];
    tokens += rec.parsed.token_count;
  }
  r.total = static_cast<long>(records.size());
  r.accuracy = ratio(r.tp + r.tn, r.total);
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.avg_tokens = tokens / static_cast<double>(r.total);
  return r;
}

std::optional<ReportFormat> report_format_from_string(std::string_view s) {
  if (s == "table") return ReportFormat::Table;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::string_view csv_header() {
  return "accuracy,f1,precision,recall,avg_tokens,tp,fp,fn,tn,missing,missing_on_real,total,"
         "quick,semantic,prospective,unclassifiable";
}

std::string render_report(const MetricReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      ojson j;
      j["accuracy"] = r.accuracy;
      j["f1"] = r.f1;
      j["precision"] = r.precision;
      j["recall"] = r.recall;
      j["avg_tokens"] = r.avg_tokens;
      j["tp"] = r.tp;
      j["fp"] = r.fp;
      j["fn"] = r.fn;
      j["tn"] = r.tn;
      j["missing"] = r.missing;
      j["missing_on_real"] = r.missing_on_real;
      j["total"] = r.total;
      ojson hist;
      for (std::size_t i = 0; i < kHistogramKeys.size(); ++i) hist[std::string(kHistogramKeys[i])] = r.mode_histogram[i];
      j["mode_histogram"] = hist;
      return j.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::string out(csv_header());
      out += "\n" + shortest(r.accuracy) + "," + shortest(r.f1) + "," + shortest(r.precision) + "," +
             shortest(r.recall) + "," + shortest(r.avg_tokens);
      for (long v : {r.tp, r.fp, r.fn, r.tn, r.missing, r.missing_on_real, r.total}) out += "," + std::to_string(v);
      for (long v : r.mode_histogram) out += "," + std::to_string(v);
      return out + "\n";
    }
    case ReportFormat::Table: {
      char buf[256];
      std::string out;
      std::snprintf(buf, sizeof(buf), "%-8s %-8s %-8s %-8s %-11s\n", "Acc.", "F1", "Pre.", "Rec.", "Avg. Tokens");
      out += buf;
      std::snprintf(buf, sizeof(buf), "%-8.2f %-8.2f %-8.2f %-8.2f %-11.1f\n", 100.0 * r.accuracy, 100.0 * r.f1,
                    100.0 * r.precision, 100.0 * r.recall, r.avg_tokens);
      out += buf;
      std::snprintf(buf, sizeof(buf), "confusion (positive = fake): TP=%ld FP=%ld FN=%ld TN=%ld missing=%ld n=%ld\n",
                    r.tp, r.fp, r.fn, r.tn, r.missing, r.total);
      out += buf;
      std::snprintf(buf, sizeof(buf), "modes: quick=%ld semantic=%ld prospective=%ld unclassifiable=%ld\n",
                    r.mode_histogram[0], r.mode_histogram[1], r.mode_histogram[2], r.mode_histogram[3]);
      out += buf;
      return out;
    }
  }
  throw std::invalid_argument("unknown report format");
}

MetricReport report_from_json(std::string_view text) {
  const auto j = ojson::parse(text);
  MetricReport r;
  r.accuracy = j.at("accuracy").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.avg_tokens = j.at("avg_tokens").get<double>();
  r.tp = j.at("tp").get<long>();
  r.fp = j.at("fp").get<long>();
  r.fn = j.at("fn").get<long>();
  r.tn = j.at("tn").get<long>();
  r.missing = j.at("missing").get<long>();
  r.missing_on_real = j.at("missing_on_real").get<long>();
  r.total = j.at("total").get<long>();
  const auto& hist = j.at("mode_histogram");
  for (std::size_t i = 0; i < kHistogramKeys.size(); ++i) r.mode_histogram[i] = hist.at(std::string(kHistogramKeys[i])).get<long>();
  return r;
}

}  // namespace mmthink
