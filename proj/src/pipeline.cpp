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

#include "mmthink/pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mmthink {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Stream : std::uint64_t { kSftData = 1, kRlData, kEvalData, kSftTrain, kRlTrain, kEvalDecode };

std::string_view to_string(Decoding d) { return d == Decoding::Greedy ? "greedy" : "sample"; }

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown config key " + std::string(where) + "." + key);
  }
}

template <typename T>
void read(const json& obj, std::string_view where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key " + std::string(where) + "." + key + " has the wrong type");
  }
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<SynthSample> load_dataset(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing dataset " + path.string() + " (run gen-data first)");
  return read_dataset(in);
}

PolicyParams load_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing checkpoint " + path.string());
  return read_checkpoint(in);
}

std::string checkpoint_text(const PolicyParams& params, const std::string& hash) {
  std::ostringstream out;
  write_checkpoint(out, params, hash);
  return out.str();
}

json stats_record(const StepStats& s, std::string_view algorithm, const std::string& hash) {
  json hist = {{"quick", s.mode_histogram[0]},
               {"semantic", s.mode_histogram[1]},
               {"prospective", s.mode_histogram[2]},
               {"unclassifiable", s.mode_histogram[3]}};
  return json{{"step", s.step},
              {"epoch", s.epoch},
              {"algorithm", algorithm},
              {"loss", s.loss},
              {"reward_mean", s.mean_reward},
              {"accuracy_mean", s.mean_accuracy},
              {"abs_advantage_mean", s.mean_abs_advantage},
              {"kl", s.kl},
              {"clip_fraction", s.clip_fraction},
              {"mode_histogram", hist},
              {"avg_tokens", s.avg_tokens},
              {"config_hash", hash}};
}

std::string report_file(const MetricReport& report, ReportFormat format, const std::string& hash,
                        const std::string& name) {
  switch (format) {
    case ReportFormat::Json: {
      nlohmann::ordered_json j;
      j["config_hash"] = hash;
      j["name"] = name;
      j["metrics"] = nlohmann::ordered_json::parse(render_report(report, ReportFormat::Json));
      return j.dump(2) + "\n";
    }
    case ReportFormat::Csv:
      return "# config_hash=" + hash + " name=" + name + "\n" + render_report(report, ReportFormat::Csv);
    case ReportFormat::Table:
      return name + " (config " + hash + ")\n" + render_report(report, ReportFormat::Table);
  }
  return {};
}

std::string label_slug(std::string_view label) {
  if (label == "SFT") return "sft";
  if (label == "SFT + Vanilla GRPO") return "grpo";
  return "mmpo";
}

}  // namespace

void ExperimentConfig::validate() const {
  costs.validate();
  env.validate();
  sft.validate();
  rl.validate();
  if (sft_dataset_size <= 0) throw ConfigError("sft.dataset_size must be positive");
  if (eval_size <= 0) throw ConfigError("eval.size must be positive");
}

EnvConfig ExperimentConfig::env_for(std::string_view split) const {
  EnvConfig e = env;
  const Stream s = split == "sft" ? kSftData : split == "rl" ? kRlData : kEvalData;
  e.seed = derive_seed(seed, s);
  return e;
}

SftConfig ExperimentConfig::sft_resolved() const {
  SftConfig s = sft;
  s.seed = derive_seed(seed, kSftTrain);
  return s;
}

RlConfig ExperimentConfig::rl_resolved(std::optional<Algorithm> algorithm) const {
  RlConfig r = rl;
  r.seed = derive_seed(seed, kRlTrain);
  r.costs = costs;
  if (algorithm) r.algorithm = *algorithm;
  return r;
}

std::uint64_t ExperimentConfig::eval_seed() const { return derive_seed(seed, kEvalDecode); }

json to_json(const ExperimentConfig& c) {
  return json{
      {"seed", c.seed},
      {"output_dir", c.output_dir.string()},
      {"token_costs", {{"quick", c.costs.quick}, {"semantic", c.costs.semantic}, {"prospective", c.costs.prospective}}},
      {"env",
       {{"mixture", c.env.mixture},
        {"label_noise", c.env.label_noise},
        {"feature_noise", c.env.feature_noise},
        {"signal_scale", c.env.signal_scale},
        {"distractor_scale", c.env.distractor_scale}}},
      {"sft",
       {{"dataset_size", c.sft_dataset_size},
        {"epochs", c.sft.epochs},
        {"batch_size", c.sft.batch_size},
        {"learning_rate", c.sft.learning_rate}}},
      {"rl",
       {{"group_size", c.rl.group_size},
        {"clip_epsilon", c.rl.clip_epsilon},
        {"kl_coeff", c.rl.kl_coeff},
        {"epochs", c.rl.epochs},
        {"dataset_size", c.rl.dataset_size},
        {"batch_size", c.rl.batch_size},
        {"learning_rate", c.rl.learning_rate},
        {"updates_per_batch", c.rl.updates_per_batch},
        {"algorithm", std::string(to_string(c.rl.algorithm))},
        {"length_penalty", c.rl.reward.length_penalty_per_token}}},
      {"eval", {{"size", c.eval_size}, {"decoding", std::string(to_string(c.eval_decoding))}}}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  reject_unknown(j, "config", {"seed", "output_dir", "token_costs", "env", "sft", "rl", "eval"});
  read(j, "config", "seed", c.seed);
  std::string out_dir = c.output_dir.string();
  read(j, "config", "output_dir", out_dir);
  c.output_dir = out_dir;

  if (j.contains("token_costs")) {
    const auto& t = j.at("token_costs");
    reject_unknown(t, "token_costs", {"quick", "semantic", "prospective"});
    read(t, "token_costs", "quick", c.costs.quick);
    read(t, "token_costs", "semantic", c.costs.semantic);
    read(t, "token_costs", "prospective", c.costs.prospective);
  }
  if (j.contains("env")) {
    const auto& e = j.at("env");
    reject_unknown(e, "env", {"mixture", "label_noise", "feature_noise", "signal_scale", "distractor_scale"});
    read(e, "env", "mixture", c.env.mixture);
    read(e, "env", "label_noise", c.env.label_noise);
    read(e, "env", "feature_noise", c.env.feature_noise);
    read(e, "env", "signal_scale", c.env.signal_scale);
    read(e, "env", "distractor_scale", c.env.distractor_scale);
  }
  if (j.contains("sft")) {
    const auto& s = j.at("sft");
    reject_unknown(s, "sft", {"dataset_size", "epochs", "batch_size", "learning_rate"});
    read(s, "sft", "dataset_size", c.sft_dataset_size);
    read(s, "sft", "epochs", c.sft.epochs);
    read(s, "sft", "batch_size", c.sft.batch_size);
    read(s, "sft", "learning_rate", c.sft.learning_rate);
  }
  if (j.contains("rl")) {
    const auto& r = j.at("rl");
    reject_unknown(r, "rl",
                   {"group_size", "clip_epsilon", "kl_coeff", "epochs", "dataset_size", "batch_size", "learning_rate",
                    "updates_per_batch", "algorithm", "length_penalty"});
    read(r, "rl", "group_size", c.rl.group_size);
    read(r, "rl", "clip_epsilon", c.rl.clip_epsilon);
    read(r, "rl", "kl_coeff", c.rl.kl_coeff);
    read(r, "rl", "epochs", c.rl.epochs);
    read(r, "rl", "dataset_size", c.rl.dataset_size);
    read(r, "rl", "batch_size", c.rl.batch_size);
    read(r, "rl", "learning_rate", c.rl.learning_rate);
    read(r, "rl", "updates_per_batch", c.rl.updates_per_batch);
    read(r, "rl", "length_penalty", c.rl.reward.length_penalty_per_token);
    std::string algo(to_string(c.rl.algorithm));
    read(r, "rl", "algorithm", algo);
    const auto parsed = algorithm_from_string(algo);
    if (!parsed) throw ConfigError("rl.algorithm must be grpo or mmpo, got " + algo);
    c.rl.algorithm = *parsed;
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    reject_unknown(e, "eval", {"size", "decoding"});
    read(e, "eval", "size", c.eval_size);
    std::string decoding(to_string(c.eval_decoding));
    read(e, "eval", "decoding", decoding);
    if (decoding == "sample") c.eval_decoding = Decoding::Sample;
    else if (decoding == "greedy") c.eval_decoding = Decoding::Greedy;
    else throw ConfigError("eval.decoding must be sample or greedy, got " + decoding);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + item);
    const std::string path = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty()) throw ConfigError("bad override key: " + path);
      if (dot == std::string::npos) {
        json parsed = json::parse(value, nullptr, false);
        (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
}

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Datasets make_datasets(const ExperimentConfig& config) {
  return {generate(config.env_for("sft"), static_cast<std::size_t>(config.sft_dataset_size)),
          generate(config.env_for("rl"), static_cast<std::size_t>(config.rl.dataset_size)),
          generate(config.env_for("eval"), static_cast<std::size_t>(config.eval_size))};
}

std::vector<EvalRecord> evaluate(const PolicyParams& params, std::span<const SynthSample> samples,
                                 const TokenCosts& costs, Decoding decoding, std::uint64_t seed) {
  std::vector<EvalRecord> records;
  records.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    std::string text;
    if (decoding == Decoding::Greedy) {
      const StructuredAction a = greedy(params, s.features);
      text = render_canonical(a.mode, a.answer);
    } else {
      Rng rng(derive_seed(seed, i));
      text = sample(params, s.features, rng).text;
    }
    records.push_back({s.id, s.truth, parse(text, costs)});
  }
  return records;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  fs::rename(tmp, path);
}

std::string render_compare(const CompareResult& result, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      nlohmann::ordered_json j;
      j["config_hash"] = result.config_hash;
      j["rows"] = nlohmann::ordered_json::array();
      for (const auto& row : result.rows) {
        nlohmann::ordered_json r;
        r["method"] = row.label;
        r["metrics"] = nlohmann::ordered_json::parse(render_report(row.report, ReportFormat::Json));
        j["rows"].push_back(r);
      }
      return j.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::string out = "# config_hash=" + result.config_hash + "\nmethod," + std::string(csv_header()) + "\n";
      for (const auto& row : result.rows) {
        const std::string body = render_report(row.report, ReportFormat::Csv);
        out += label_slug(row.label) + "," + body.substr(body.find('\n') + 1);
      }
      return out;
    }
    case ReportFormat::Table: {
      char buf[256];
      std::string out = "config " + result.config_hash + "\n";
      std::snprintf(buf, sizeof(buf), "%-22s %-8s %-8s %-8s %-8s %-11s\n", "Methods", "Acc.", "F1", "Pre.", "Rec.",
                    "Avg. Tokens");
      out += buf;
      for (const auto& row : result.rows) {
        const auto& r = row.report;
        std::snprintf(buf, sizeof(buf), "%-22s %-8.2f %-8.2f %-8.2f %-8.2f %-11.1f\n", row.label.c_str(),
                      100.0 * r.accuracy, 100.0 * r.f1, 100.0 * r.precision, 100.0 * r.recall, r.avg_tokens);
        out += buf;
      }
      return out;
    }
  }
  return {};
}

void stage_gen_data(const ExperimentConfig& config) {
  config.validate();
  const std::string hash = config_hash(config);
  const Datasets data = make_datasets(config);
  const fs::path dir = config.output_dir / "data";
  const std::pair<const char*, const std::vector<SynthSample>*> splits[] = {
      {"sft.txt", &data.sft}, {"rl.txt", &data.rl}, {"eval.txt", &data.eval}};
  for (const auto& [name, samples] : splits) {
    std::ostringstream out;
    write_dataset(out, *samples, hash);
    write_file_atomic(dir / name, out.str());
  }
}

void stage_sft(const ExperimentConfig& config) {
  config.validate();
  const std::string hash = config_hash(config);
  const auto samples = load_dataset(config.output_dir / "data" / "sft.txt");
  const auto examples = teacher_dataset(samples);
  const SftResult result = sft_train(PolicyParams(kFeatureDim), examples, config.sft_resolved());

  std::string curve = "# config_hash=" + hash + "\nepoch,loss\n0," + shortest(result.initial_loss) + "\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
    curve += std::to_string(e + 1) + "," + shortest(result.epoch_loss[e]) + "\n";
  write_file_atomic(config.output_dir / "sft_loss.csv", curve);
  write_file_atomic(config.output_dir / "sft.ckpt", checkpoint_text(result.params, hash));
}

void stage_train(const ExperimentConfig& config, std::optional<Algorithm> algorithm) {
  config.validate();
  const std::string hash = config_hash(config);
  const RlConfig rl = config.rl_resolved(algorithm);
  const std::string algo(to_string(rl.algorithm));
  const PolicyParams init = load_checkpoint(config.output_dir / "sft.ckpt");
  const auto samples = load_dataset(config.output_dir / "data" / "rl.txt");

  std::string log;
  int last_epoch = 0;
  PolicyParams last = init;
  auto on_step = [&](const StepStats& s, const PolicyParams& params) {
    if (s.epoch != last_epoch) {
      write_file_atomic(config.output_dir / "checkpoints" / ("rl_" + algo + "_epoch" + std::to_string(last_epoch + 1) + ".ckpt"),
                        checkpoint_text(last, hash));
      last_epoch = s.epoch;
    }
    last = params;
    log += stats_record(s, algo, hash).dump() + "\n";
  };
  const fs::path log_path = config.output_dir / ("rl_" + algo + ".jsonl");
  try {
    const RlResult result = rl_train(init, samples, rl, on_step);
    write_file_atomic(config.output_dir / "checkpoints" / ("rl_" + algo + "_epoch" + std::to_string(last_epoch + 1) + ".ckpt"),
                      checkpoint_text(result.params, hash));
    write_file_atomic(log_path, log);
    write_file_atomic(config.output_dir / ("rl_" + algo + ".ckpt"), checkpoint_text(result.params, hash));
  } catch (const TrainingDiverged& e) {
    // Keep what was learned up to the failure, under names that mark it incomplete.
    write_file_atomic(config.output_dir / ("rl_" + algo + ".incomplete.jsonl"), log);
    write_file_atomic(config.output_dir / ("rl_" + algo + ".last_good.ckpt"), checkpoint_text(e.last_good(), hash));
    throw;
  }
}

MetricReport stage_eval(const ExperimentConfig& config, const fs::path& checkpoint, const std::string& name) {
  config.validate();
  const std::string hash = config_hash(config);
  const PolicyParams params = load_checkpoint(checkpoint);
  const auto samples = load_dataset(config.output_dir / "data" / "eval.txt");
  const MetricReport report =
      compute_metrics(evaluate(params, samples, config.costs, config.eval_decoding, config.eval_seed()));
  const fs::path base = config.output_dir / ("eval_" + name);
  write_file_atomic(fs::path(base).concat(".json"), report_file(report, ReportFormat::Json, hash, name));
  write_file_atomic(fs::path(base).concat(".csv"), report_file(report, ReportFormat::Csv, hash, name));
  write_file_atomic(fs::path(base).concat(".txt"), report_file(report, ReportFormat::Table, hash, name));
  return report;
}

CompareResult run_compare(const ExperimentConfig& config) {
  config.validate();
  CompareResult out;
  out.config_hash = config_hash(config);
  const Datasets data = make_datasets(config);
  const SftResult sft = sft_train(PolicyParams(kFeatureDim), teacher_dataset(data.sft), config.sft_resolved());

  auto report_of = [&](const PolicyParams& p) {
    return compute_metrics(evaluate(p, data.eval, config.costs, config.eval_decoding, config.eval_seed()));
  };
  out.rows.push_back({"SFT", report_of(sft.params)});
  RlResult grpo = rl_train(sft.params, data.rl, config.rl_resolved(Algorithm::VanillaGRPO));
  out.rows.push_back({"SFT + Vanilla GRPO", report_of(grpo.params)});
  out.grpo_stats = std::move(grpo.stats);
  RlResult mmpo = rl_train(sft.params, data.rl, config.rl_resolved(Algorithm::MMPO));
  out.rows.push_back({"SFT + MMPO", report_of(mmpo.params)});
  out.mmpo_stats = std::move(mmpo.stats);
  return out;
}

CompareResult stage_compare(const ExperimentConfig& config) {
  const CompareResult result = run_compare(config);
  write_file_atomic(config.output_dir / "compare.json", render_compare(result, ReportFormat::Json));
  write_file_atomic(config.output_dir / "compare.csv", render_compare(result, ReportFormat::Csv));
  write_file_atomic(config.output_dir / "compare.txt", render_compare(result, ReportFormat::Table));
  return result;
}

}  // namespace mmthink
