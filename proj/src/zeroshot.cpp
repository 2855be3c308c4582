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

#include "glirel/zeroshot.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include <spdlog/spdlog.h>

#include "glirel/error.hpp"
#include "glirel/inference.hpp"
#include "glirel/random.hpp"
#include "glirel/util.hpp"

namespace glirel {

ZeroShotSplit make_split(const std::vector<InputInstance>& dataset, int m, std::uint64_t seed) {
  const auto labels = label_universe(dataset);
  if (m < 1 || m >= static_cast<int>(labels.size())) {
    throw InvalidInput("make_split: m=" + std::to_string(m) + " needs 1 <= m < " +
                       std::to_string(labels.size()) + " (distinct labels)");
  }
  Rng rng(seed);
  auto order = labels;
  shuffle(order, rng);

  ZeroShotSplit split;
  split.m = m;
  split.seed = seed;
  split.unseen_labels.assign(order.begin(), order.begin() + m);
  split.seen_labels.assign(order.begin() + m, order.end());
  std::sort(split.unseen_labels.begin(), split.unseen_labels.end());
  std::sort(split.seen_labels.begin(), split.seen_labels.end());

  const std::set<std::string> unseen(split.unseen_labels.begin(), split.unseen_labels.end());
  for (const auto& instance : dataset) {
    const bool is_test = std::any_of(instance.relations.begin(), instance.relations.end(),
                                     [&](const RelationTriple& r) { return unseen.contains(r.label); });
    if (!is_test) {
      split.train.push_back(instance);
      continue;
    }
    InputInstance test = instance;
    std::erase_if(test.relations, [&](const RelationTriple& r) { return !unseen.contains(r.label); });
    split.test.push_back(std::move(test));
  }
  return split;
}

int count_leaks(const ZeroShotSplit& split) {
  const std::set<std::string> unseen(split.unseen_labels.begin(), split.unseen_labels.end());
  return static_cast<int>(std::count_if(split.train.begin(), split.train.end(), [&](const InputInstance& x) {
    return std::any_of(x.relations.begin(), x.relations.end(),
                       [&](const RelationTriple& r) { return unseen.contains(r.label); });
  }));
}

std::string split_violation(const ZeroShotSplit& split) {
  const std::set<std::string> unseen(split.unseen_labels.begin(), split.unseen_labels.end());
  if (static_cast<int>(unseen.size()) != split.m) return "unseen label count differs from m";
  for (const auto& s : split.seen_labels) {
    if (unseen.contains(s)) return "label \"" + s + "\" is both seen and unseen";
  }
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    for (const auto& r : split.train[i].relations) {
      if (unseen.contains(r.label)) {
        return "train instance " + std::to_string(i) + " carries unseen label \"" + r.label + "\"";
      }
    }
  }
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    for (const auto& r : split.test[i].relations) {
      if (!unseen.contains(r.label)) {
        return "test instance " + std::to_string(i) + " carries seen label \"" + r.label + "\"";
      }
    }
  }
  return {};
}

void validate_split(const ZeroShotSplit& split) {
  if (auto msg = split_violation(split); !msg.empty()) throw InvalidState("zero-shot split: " + msg);
}

namespace {

double ratio(int num, int den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

}  // namespace

MacroMetrics macro_prf1(const std::vector<PredictionSet>& predictions, const std::vector<InputInstance>& golds,
                        const std::vector<std::string>& labels) {
  if (predictions.size() != golds.size()) {
    throw InvalidInput("macro_prf1: " + std::to_string(predictions.size()) + " prediction sets for " +
                       std::to_string(golds.size()) + " instances");
  }
  std::map<std::string, LabelMetrics> counts;
  for (const auto& l : labels) counts[l].label = l;

  using Key = std::tuple<int, int, std::string>;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    std::set<Key> gold, pred;
    for (const auto& r : golds[i].relations) {
      if (counts.contains(r.label)) gold.emplace(r.head, r.tail, r.label);
    }
    for (const auto& p : predictions[i].relations) {
      if (counts.contains(p.label)) pred.emplace(p.head, p.tail, p.label);
    }
    for (const auto& k : pred) {
      auto& c = counts[std::get<2>(k)];
      if (gold.contains(k)) {
        ++c.tp;
      } else {
        ++c.fp;
      }
    }
    for (const auto& k : gold) {
      if (!pred.contains(k)) ++counts[std::get<2>(k)].fn;
    }
  }

  MacroMetrics out;
  for (auto& [label, c] : counts) {
    c.precision = ratio(c.tp, c.tp + c.fp);
    c.recall = ratio(c.tp, c.tp + c.fn);
    c.f1 = c.precision + c.recall == 0.0 ? 0.0 : 2.0 * c.precision * c.recall / (c.precision + c.recall);
    out.precision += c.precision;
    out.recall += c.recall;
    out.f1 += c.f1;
    out.per_label.push_back(c);
  }
  if (!counts.empty()) {
    const auto n = static_cast<double>(counts.size());
    out.precision /= n;
    out.recall /= n;
    out.f1 /= n;
  }
  return out;
}

std::vector<PredictionSet> random_predictions(const ZeroShotSplit& split, std::uint64_t seed,
                                              const DecodeOptions& decode_options,
                                              std::optional<int> pair_window) {
  Rng rng(seed);
  std::vector<PredictionSet> out;
  out.reserve(split.test.size());
  for (const auto& instance : split.test) {
    auto pairs = enumerate_pairs(static_cast<int>(instance.entities.size()), instance.entities, pair_window);
    Matrix<double> logits(pairs.size(), static_cast<Eigen::Index>(split.unseen_labels.size()));
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
      // Logit of a uniform score, so that sigmoid recovers it.
      const double u = std::clamp(uniform01(rng), 1e-12, 1.0 - 1e-12);
      logits.data()[i] = std::log(u / (1.0 - u));
    }
    out.push_back(decode(scores_from_logits(logits, std::move(pairs), split.unseen_labels), decode_options));
  }
  return out;
}

void ExperimentConfig::check() const {
  if (m < 1) throw ConfigError("m must be >= 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (eval_batch_size < 1) throw ConfigError("eval_batch_size must be >= 1");
  model.check();
  train.check();
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"m", c.m},
       {"seeds", c.seeds},
       {"model", c.model},
       {"train", c.train},
       {"vocab", {{"max_size", c.vocab.max_size}, {"min_frequency", c.vocab.min_frequency},
                  {"lowercase", c.vocab.lowercase}}},
       {"decode", {{"threshold", c.decode.threshold}, {"force_choice", c.decode.force_choice},
                   {"multi_label", c.decode.multi_label}}},
       {"eval_batch_size", c.eval_batch_size},
       {"random_baseline", c.random_baseline}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  ExperimentConfig d;
  c.m = j.value("m", d.m);
  c.seeds = j.value("seeds", d.seeds);
  c.model = j.contains("model") ? j["model"].get<ModelConfig>() : d.model;
  c.train = j.contains("train") ? j["train"].get<TrainConfig>() : d.train;
  c.vocab = d.vocab;
  if (j.contains("vocab")) {
    c.vocab.max_size = j["vocab"].value("max_size", d.vocab.max_size);
    c.vocab.min_frequency = j["vocab"].value("min_frequency", d.vocab.min_frequency);
    c.vocab.lowercase = j["vocab"].value("lowercase", d.vocab.lowercase);
  }
  c.decode = d.decode;
  if (j.contains("decode")) {
    c.decode.threshold = j["decode"].value("threshold", d.decode.threshold);
    c.decode.force_choice = j["decode"].value("force_choice", d.decode.force_choice);
    c.decode.multi_label = j["decode"].value("multi_label", d.decode.multi_label);
  }
  c.eval_batch_size = j.value("eval_batch_size", d.eval_batch_size);
  c.random_baseline = j.value("random_baseline", d.random_baseline);
}

namespace {

void accumulate(MacroMetrics& sum, const MacroMetrics& x, double weight) {
  sum.precision += weight * x.precision;
  sum.recall += weight * x.recall;
  sum.f1 += weight * x.f1;
}

nlohmann::json metrics_json(const MacroMetrics& m) {
  nlohmann::json per_label = nlohmann::json::array();
  for (const auto& l : m.per_label) {
    per_label.push_back({{"label", l.label}, {"tp", l.tp}, {"fp", l.fp}, {"fn", l.fn},
                         {"precision", l.precision}, {"recall", l.recall}, {"f1", l.f1}});
  }
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"per_label", per_label}};
}

}  // namespace

ExperimentResult run_experiment(const std::vector<InputInstance>& dataset, const ExperimentConfig& cfg) {
  cfg.check();
  ExperimentResult result;
  result.config = cfg;
  const double w = 1.0 / static_cast<double>(cfg.seeds.size());
  for (const auto seed : cfg.seeds) {
    const auto split = make_split(dataset, cfg.m, seed);
    validate_split(split);

    TrainConfig tc = cfg.train;
    tc.seed = seed;
    tc.label_policy.negative_pool = split.seen_labels;
    SeedResult row;
    TrainHooks hooks;
    hooks.on_step = [&](const TrainLogEntry& e) { row.final_loss = e.loss; };
    auto state = train_model(split.train, cfg.model, tc, cfg.vocab, hooks);

    const auto preds = predict(state.model, split.test, split.unseen_labels, cfg.eval_batch_size, cfg.decode);
    row.seed = seed;
    row.unseen_labels = split.unseen_labels;
    row.train_size = static_cast<int>(split.train.size());
    row.test_size = static_cast<int>(split.test.size());
    row.metrics = macro_prf1(preds, split.test, split.unseen_labels);
    if (cfg.random_baseline) {
      const auto rnd = random_predictions(split, seed ^ 0xA5A5A5A5ULL, cfg.decode, cfg.model.head.pair_window);
      row.baseline = macro_prf1(rnd, split.test, split.unseen_labels);
    }
    spdlog::info("seed {}: macro P={:.4f} R={:.4f} F1={:.4f} (random F1={:.4f})", seed, row.metrics.precision,
                 row.metrics.recall, row.metrics.f1, row.baseline.f1);
    accumulate(result.mean, row.metrics, w);
    accumulate(result.baseline_mean, row.baseline, w);
    result.rows.push_back(std::move(row));
  }
  return result;
}

nlohmann::json results_json(const ExperimentResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"seed", r.seed},
                    {"unseen_labels", r.unseen_labels},
                    {"train_size", r.train_size},
                    {"test_size", r.test_size},
                    {"final_loss", r.final_loss},
                    {"metrics", metrics_json(r.metrics)},
                    {"random_baseline", metrics_json(r.baseline)}});
  }
  return {{"config", result.config},
          {"config_hash", hex64(fnv1a64(result.config.dump()))},
          {"git_revision", git_revision()},
          {"per_seed", rows},
          {"mean", metrics_json(result.mean)},
          {"random_baseline_mean", metrics_json(result.baseline_mean)}};
}

void write_results_csv(std::ostream& out, const ExperimentResult& result) {
  out << "seed,precision,recall,f1,random_f1\n";
  for (const auto& r : result.rows) {
    out << r.seed << ',' << r.metrics.precision << ',' << r.metrics.recall << ',' << r.metrics.f1 << ','
        << r.baseline.f1 << '\n';
  }
  out << "mean," << result.mean.precision << ',' << result.mean.recall << ',' << result.mean.f1 << ','
      << result.baseline_mean.f1 << '\n';
}

template <typename T>
BenchmarkResult speed_benchmark(const Model<T>& model, const std::vector<InputInstance>& instances,
                                const std::vector<std::string>& labels, int batch_size) {
  BenchmarkResult r;
  r.instances = static_cast<int>(instances.size());
  r.batch_size = batch_size;
  const long passes_before = model.forward_passes();
  const auto start = std::chrono::steady_clock::now();
  score_instances(model, instances, labels, batch_size);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.forward_pass_count = model.forward_passes() - passes_before;
  r.sentences_per_second = r.seconds > 0.0 ? r.instances / r.seconds : 0.0;
  return r;
}

template BenchmarkResult speed_benchmark(const Model<float>&, const std::vector<InputInstance>&,
                                         const std::vector<std::string>&, int);
template BenchmarkResult speed_benchmark(const Model<double>&, const std::vector<InputInstance>&,
                                         const std::vector<std::string>&, int);

}  // namespace glirel
