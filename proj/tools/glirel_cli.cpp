// Copyright 2026 The glirel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point: train, eval, predict, bench, gen-data, split,
// validate.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "glirel/checkpoint.hpp"
#include "glirel/coref.hpp"
#include "glirel/error.hpp"
#include "glirel/inference.hpp"
#include "glirel/synth.hpp"
#include "glirel/training.hpp"
#include "glirel/util.hpp"
#include "glirel/zeroshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string dataset;
  std::string input;
  std::string checkpoint;
  std::string out;
  std::string labels;
  std::string replay;
  std::string benchmark_labels;
  std::string audit;
  std::string dictionary;
  std::optional<int> m;
  std::optional<int> seeds;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  bool force_choice = false;
  bool multi_label = false;
  bool coref = false;
  std::optional<int> window;
  std::optional<int> stride;
  std::optional<int> batch_size;
  std::optional<int> steps;
  std::optional<int> jobs;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw glirel::InvalidInput("cannot open " + path);
  return json::parse(in);
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw glirel::InvalidInput("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw glirel::InvalidInput("write failed: " + path.string());
}

fs::path sidecar(const std::string& out) { return fs::path(out + ".meta.json"); }

// Config file first, then flags on top.
glirel::ExperimentConfig effective_config(const Options& o) {
  glirel::ExperimentConfig cfg;
  if (!o.config.empty()) cfg = read_json_file(o.config).get<glirel::ExperimentConfig>();
  if (o.m) cfg.m = *o.m;
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.seeds) {
    cfg.seeds.clear();
    const std::uint64_t base = o.seed.value_or(0);
    for (int s = 0; s < *o.seeds; ++s) cfg.seeds.push_back(base + static_cast<std::uint64_t>(s));
  }
  if (o.threshold) {
    cfg.decode.threshold = *o.threshold;
    cfg.train.threshold = *o.threshold;
  }
  if (o.force_choice) cfg.decode.force_choice = true;
  if (o.multi_label) cfg.decode.multi_label = true;
  if (o.batch_size) {
    cfg.train.batch_size = *o.batch_size;
    cfg.eval_batch_size = *o.batch_size;
  }
  if (o.steps) cfg.train.total_steps = *o.steps;
  if (o.jobs) cfg.train.jobs = *o.jobs;
  if (o.window) cfg.model.head.pair_window = *o.window;
  return cfg;
}

std::vector<std::string> resolve_labels(const std::string& spec) {
  if (spec.empty()) throw glirel::InvalidInput("--labels is required");
  if (fs::is_regular_file(spec)) {
    std::ifstream in(spec);
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto last = line.find_last_not_of(" \t\r");
      labels.push_back(line.substr(first, last - first + 1));
    }
    if (labels.empty()) throw glirel::InvalidInput("label file " + spec + " is empty");
    return labels;
  }
  return glirel::parse_label_list(spec);
}

// Dataset records or raw `{text, entities}` records.
std::vector<glirel::InputInstance> read_inputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw glirel::InvalidInput("cannot open " + path);
  std::vector<glirel::InputInstance> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(line);
    if (j.contains("tokens") && j.contains("entities") && !j.contains("text")) {
      json rec = j;
      if (!rec.contains("relations")) rec["relations"] = json::array();
      out.push_back(glirel::parse_instance(rec));
    } else {
      auto t = glirel::parse_text_record(j, nullptr, n);
      glirel::InputInstance x;
      x.doc_id = t.doc_id;
      x.tokens = std::move(t.tokens);
      x.entities = std::move(t.entities);
      glirel::validate(x);
      out.push_back(std::move(x));
    }
  }
  return out;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw CLI::RequiredError(flag);
}

int cmd_train(const Options& o) {
  require(o.dataset, "--dataset");
  require(o.out, "--out");
  const auto cfg = effective_config(o);
  cfg.model.check();
  cfg.train.check();
  const auto train = glirel::read_jsonl(fs::path(o.dataset));

  std::ofstream log(o.out + ".log.csv");
  log << "step,loss,encoder_lr,head_lr\n";
  json meta = {{"config", cfg}, {"dataset", o.dataset}, {"git_revision", glirel::git_revision()}};
  glirel::TrainHooks hooks;
  hooks.on_step = [&](const glirel::TrainLogEntry& e) {
    log << e.step << ',' << e.loss << ',' << e.encoder_lr << ',' << e.head_lr << '\n';
    if (e.step % 100 == 0) spdlog::info("step {} loss {:.5f}", e.step, e.loss);
  };
  hooks.on_checkpoint = [&](const glirel::TrainState& s) {
    json m = meta;
    m["step"] = s.step;
    glirel::save_checkpoint(fs::path(o.out + ".step" + std::to_string(s.step)), s.model, m);
  };
  auto state = glirel::train_model(train, cfg.model, cfg.train, cfg.vocab, hooks);
  meta["step"] = state.step;
  glirel::save_checkpoint(fs::path(o.out), state.model, meta);
  glirel::load_checkpoint(fs::path(o.out));
  spdlog::info("wrote {}", o.out);
  return 0;
}

int cmd_eval(const Options& o) {
  require(o.dataset, "--dataset");
  const auto cfg = effective_config(o);
  const auto data = glirel::read_jsonl(fs::path(o.dataset));
  const auto result = glirel::run_experiment(data, cfg);
  auto j = glirel::results_json(result);
  j["dataset"] = o.dataset;
  const std::string out = o.out.empty() ? "results.json" : o.out;
  write_json_file(out, j);
  std::ofstream csv(fs::path(out).replace_extension(".csv"));
  glirel::write_results_csv(csv, result);
  read_json_file(out);
  std::cout << "mean macro P=" << result.mean.precision << " R=" << result.mean.recall
            << " F1=" << result.mean.f1 << " (random F1=" << result.baseline_mean.f1 << ")\n";
  return 0;
}

int cmd_predict(const Options& o) {
  require(o.checkpoint, "--checkpoint");
  const std::string input = o.input.empty() ? o.dataset : o.input;
  require(input, "--input");
  require(o.out, "--out");
  const auto labels = resolve_labels(o.labels);
  auto loaded = glirel::load_checkpoint(fs::path(o.checkpoint));
  const auto& model = loaded.model;
  auto cfg = effective_config(o);
  const auto inputs = read_inputs(input);

  std::ofstream out(o.out);
  if (!out) throw glirel::InvalidInput("cannot write " + o.out);
  if (o.window || o.coref) {
    glirel::DocPipelineOptions doc_opts;
    doc_opts.window_tokens = o.window;
    doc_opts.stride = o.stride.value_or(o.window ? std::max(1, *o.window / 2) : 1);
    doc_opts.mode = o.coref ? glirel::CorefMode::kPredicted : glirel::CorefMode::kGold;
    const auto scorer = glirel::model_scorer(model, cfg.eval_batch_size, cfg.decode);
    for (const auto& doc : inputs) {
      const auto r = glirel::document_pipeline(doc, labels, scorer, doc_opts);
      auto rec = glirel::prediction_record(doc.doc_id, r.mentions);
      rec["clusters"] = r.clusters.clusters;
      json rels = json::array();
      for (const auto& c : r.relations.relations) {
        rels.push_back({{"head_cluster", c.head_cluster}, {"tail_cluster", c.tail_cluster},
                        {"label", c.label}, {"score", c.score}});
      }
      rec["cluster_relations"] = rels;
      out << rec.dump() << '\n';
    }
  } else {
    const auto preds = glirel::predict(model, inputs, labels, cfg.eval_batch_size, cfg.decode);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      out << glirel::prediction_record(inputs[i].doc_id, preds[i]).dump() << '\n';
    }
  }
  out.close();
  write_json_file(sidecar(o.out), {{"command", "predict"},
                                   {"labels", labels},
                                   {"decode",
                                    {{"threshold", cfg.decode.threshold},
                                     {"force_choice", cfg.decode.force_choice},
                                     {"multi_label", cfg.decode.multi_label}}},
                                   {"batch_size", cfg.eval_batch_size},
                                   {"checkpoint", o.checkpoint},
                                   {"input", input},
                                   {"window", o.window ? json(*o.window) : json(nullptr)},
                                   {"stride", o.stride ? json(*o.stride) : json(nullptr)},
                                   {"coref", o.coref},
                                   {"git_revision", glirel::git_revision()}});
  std::ifstream check(o.out);
  std::string line;
  while (std::getline(check, line)) glirel::predictions_from_record(json::parse(line));
  return 0;
}

int cmd_bench(const Options& o) {
  require(o.checkpoint, "--checkpoint");
  require(o.dataset, "--dataset");
  const auto labels = resolve_labels(o.labels);
  auto loaded = glirel::load_checkpoint(fs::path(o.checkpoint));
  const auto inputs = read_inputs(o.dataset);
  const int batch = o.batch_size.value_or(32);
  const auto r = glirel::speed_benchmark(loaded.model, inputs, labels, batch);
  const json j = {{"instances", r.instances},
                  {"batch_size", r.batch_size},
                  {"forward_pass_count", r.forward_pass_count},
                  {"seconds", r.seconds},
                  {"sentences_per_second", r.sentences_per_second},
                  {"labels", labels},
                  {"checkpoint", o.checkpoint},
                  {"git_revision", glirel::git_revision()}};
  if (!o.out.empty()) write_json_file(o.out, j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_gen_data(const Options& o) {
  const std::string input = o.input.empty() ? o.dataset : o.input;
  require(input, "--input");
  require(o.out, "--out");
  glirel::AnnotationJob job;
  if (!o.config.empty()) {
    const auto j = read_json_file(o.config);
    job = j.contains("annotation") ? j["annotation"].get<glirel::AnnotationJob>() : j.get<glirel::AnnotationJob>();
  }
  if (o.jobs) job.jobs = *o.jobs;

  std::unique_ptr<glirel::DictionaryTagger> tagger;
  if (!o.dictionary.empty()) {
    std::vector<std::string> phrases;
    std::ifstream in(o.dictionary);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) phrases.push_back(line);
    }
    tagger = std::make_unique<glirel::DictionaryTagger>(phrases);
  }
  const auto texts = glirel::read_text_corpus(input, tagger.get());

  std::unique_ptr<glirel::ChatClient> client;
  if (!o.replay.empty()) {
    client = glirel::ReplayChatClient::from_file(o.replay);
  } else {
    const char* key = std::getenv(glirel::kApiKeyEnv);
    if (key == nullptr) spdlog::warn("{} is not set; sending requests without a key", glirel::kApiKeyEnv);
    client = std::make_unique<glirel::HttpChatClient>(job.endpoint, key ? key : "", job.timeout);
  }
  auto run = glirel::annotate_corpus(texts, *client, job);
  auto dataset = run.dataset;
  std::set<std::string> benchmark;
  if (!o.benchmark_labels.empty()) {
    benchmark = glirel::read_label_file(o.benchmark_labels);
    dataset = glirel::filter_benchmark_labels(dataset, benchmark);
  }
  glirel::write_jsonl(fs::path(o.out), dataset);
  const std::string audit = o.audit.empty() ? o.out + ".audit.jsonl" : o.audit;
  {
    std::ofstream a(audit);
    for (const auto& e : run.audit) a << glirel::audit_json(e).dump() << '\n';
  }
  const double no_rel_share =
      run.stats.pair_verdicts == 0 ? 0.0 : static_cast<double>(run.stats.no_relation) / run.stats.pair_verdicts;
  write_json_file(sidecar(o.out), {{"command", "gen-data"},
                                   {"annotation", job},
                                   {"input", input},
                                   {"replay", o.replay},
                                   {"benchmark_labels", o.benchmark_labels},
                                   {"stats",
                                    {{"texts", run.stats.texts},
                                     {"annotated", run.stats.annotated},
                                     {"failed", run.stats.failed},
                                     {"pair_verdicts", run.stats.pair_verdicts},
                                     {"no_relation", run.stats.no_relation},
                                     {"filled", run.stats.filled},
                                     {"no_relation_share", no_rel_share},
                                     {"instances_written", dataset.size()}}},
                                   {"git_revision", glirel::git_revision()}});
  const auto reread = glirel::read_jsonl(fs::path(o.out));
  if (!glirel::benchmark_intersections(reread, benchmark).empty()) {
    throw glirel::InvalidState("output still carries benchmark labels");
  }
  std::cout << "annotated " << run.stats.annotated << "/" << run.stats.texts << " texts, " << run.stats.failed
            << " failed, NO RELATION share " << no_rel_share << '\n';
  return 0;
}

int cmd_split(const Options& o) {
  require(o.dataset, "--dataset");
  require(o.out, "--out");
  if (!o.m) throw CLI::RequiredError("--m");
  const auto data = glirel::read_jsonl(fs::path(o.dataset));
  const std::uint64_t seed = o.seed.value_or(0);
  const auto split = glirel::make_split(data, *o.m, seed);
  glirel::validate_split(split);
  fs::create_directories(o.out);
  const fs::path dir(o.out);
  glirel::write_jsonl(dir / "train.jsonl", split.train);
  glirel::write_jsonl(dir / "test.jsonl", split.test);
  write_json_file(dir / "split.json", {{"m", split.m},
                                       {"seed", split.seed},
                                       {"dataset", o.dataset},
                                       {"unseen_labels", split.unseen_labels},
                                       {"seen_labels", split.seen_labels},
                                       {"train_size", split.train.size()},
                                       {"test_size", split.test.size()},
                                       {"git_revision", glirel::git_revision()}});
  glirel::read_jsonl(dir / "train.jsonl");
  glirel::read_jsonl(dir / "test.jsonl");
  std::cout << "train " << split.train.size() << ", test " << split.test.size() << ", unseen";
  for (const auto& l : split.unseen_labels) std::cout << " \"" << l << '"';
  std::cout << '\n';
  return 0;
}

int cmd_validate(const Options& o) {
  require(o.dataset, "--dataset");
  const auto data = glirel::read_jsonl(fs::path(o.dataset));
  std::size_t relations = 0, pairs = 0;
  for (const auto& x : data) {
    relations += x.relations.size();
    pairs += x.entities.size() * (x.entities.size() > 0 ? x.entities.size() - 1 : 0);
  }
  const json report = {{"dataset", o.dataset},
                       {"instances", data.size()},
                       {"relations", relations},
                       {"ordered_pairs", pairs},
                       {"labels", glirel::label_universe(data)},
                       {"seed", o.seed.value_or(0)}};
  if (!o.benchmark_labels.empty()) {
    const auto hits = glirel::benchmark_intersections(data, glirel::read_label_file(o.benchmark_labels));
    if (!hits.empty()) {
      std::cerr << "benchmark label collisions:";
      for (const auto& h : hits) std::cerr << " \"" << h << '"';
      std::cerr << '\n';
      return 1;
    }
  }
  if (!o.out.empty()) write_json_file(o.out, report);
  std::cout << data.size() << " instances valid, " << relations << " relations\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot relation classification with label prompts"};
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    c->add_option("--seed", o.seed, "Random seed");
    c->add_option("--out", o.out, "Output path");
    c->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto decoding = [&](CLI::App* c) {
    c->add_option("--threshold", o.threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
    c->add_flag("--force-choice", o.force_choice, "Always emit the best label");
    c->add_flag("--multi-label", o.multi_label, "Emit every label above the threshold");
    c->add_option("--batch-size", o.batch_size, "Instances per forward pass")->check(CLI::PositiveNumber);
  };

  auto* train = app.add_subcommand("train", "Train a model");
  common(train);
  train->add_option("--dataset", o.dataset, "Training JSONL")->check(CLI::ExistingFile);
  train->add_option("--batch-size", o.batch_size, "Batch size")->check(CLI::PositiveNumber);
  train->add_option("--steps", o.steps, "Total optimizer steps")->check(CLI::PositiveNumber);
  train->add_option("--window", o.window, "Pair token-distance window")->check(CLI::NonNegativeNumber);

  auto* eval = app.add_subcommand("eval", "Zero-shot experiment over several seeds");
  common(eval);
  decoding(eval);
  eval->add_option("--dataset", o.dataset, "Dataset JSONL")->check(CLI::ExistingFile);
  eval->add_option("--m", o.m, "Number of unseen labels")->check(CLI::PositiveNumber);
  eval->add_option("--seeds", o.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  eval->add_option("--steps", o.steps, "Training steps per seed")->check(CLI::PositiveNumber);
  eval->add_option("--window", o.window, "Pair token-distance window")->check(CLI::NonNegativeNumber);

  auto* predict = app.add_subcommand("predict", "Classify relations for given labels");
  common(predict);
  decoding(predict);
  predict->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->check(CLI::ExistingFile);
  predict->add_option("--input,--dataset", o.input, "Input JSONL")->check(CLI::ExistingFile);
  predict->add_option("--labels", o.labels, "Comma-separated labels or a label file");
  predict->add_option("--window", o.window, "Document window in tokens")->check(CLI::PositiveNumber);
  predict->add_option("--stride", o.stride, "Window stride in tokens")->check(CLI::PositiveNumber);
  predict->add_flag("--coref", o.coref, "Cluster mentions with the SELF label");

  auto* bench = app.add_subcommand("bench", "Measure scoring throughput");
  common(bench);
  bench->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->check(CLI::ExistingFile);
  bench->add_option("--dataset", o.dataset, "Input JSONL")->check(CLI::ExistingFile);
  bench->add_option("--labels", o.labels, "Comma-separated labels or a label file");
  bench->add_option("--batch-size", o.batch_size, "Instances per forward pass")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen-data", "Annotate a text corpus through a chat endpoint");
  common(gen);
  gen->add_option("--input,--dataset", o.input, "Text corpus JSONL")->check(CLI::ExistingFile);
  gen->add_option("--replay", o.replay, "Recorded responses instead of live requests")->check(CLI::ExistingFile);
  gen->add_option("--benchmark-labels", o.benchmark_labels, "Labels to filter out")->check(CLI::ExistingFile);
  gen->add_option("--audit", o.audit, "Audit log path");
  gen->add_option("--dictionary", o.dictionary, "Phrase list for entity tagging")->check(CLI::ExistingFile);

  auto* split = app.add_subcommand("split", "Write one zero-shot split");
  common(split);
  split->add_option("--dataset", o.dataset, "Dataset JSONL")->check(CLI::ExistingFile);
  split->add_option("--m", o.m, "Number of unseen labels")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Check a dataset file");
  common(validate);
  validate->add_option("--dataset", o.dataset, "Dataset JSONL")->check(CLI::ExistingFile);
  validate->add_option("--benchmark-labels", o.benchmark_labels, "Labels that must not occur")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*predict) return cmd_predict(o);
    if (*bench) return cmd_bench(o);
    if (*gen) return cmd_gen_data(o);
    if (*split) return cmd_split(o);
    if (*validate) return cmd_validate(o);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
