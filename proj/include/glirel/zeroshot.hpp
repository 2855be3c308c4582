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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glirel/model.hpp"
#include "glirel/scorer.hpp"
#include "glirel/tokenizer.hpp"
#include "glirel/training.hpp"

namespace glirel {

// Labels are partitioned into seen (training) and unseen (test) sets.
struct ZeroShotSplit {
  int m = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> unseen_labels;  // sorted
  std::vector<std::string> seen_labels;    // sorted
  std::vector<InputInstance> train;
  std::vector<InputInstance> test;
};

// Picks m unseen labels uniformly at random. An instance with any unseen
// gold label goes to test with its seen-label triples removed; every other
// instance goes to train.
ZeroShotSplit make_split(const std::vector<InputInstance>& dataset, int m, std::uint64_t seed);

// Empty when the split is leak-free and consistent, otherwise the first
// violation found.
std::string split_violation(const ZeroShotSplit& split);
// Number of train instances carrying an unseen gold label.
int count_leaks(const ZeroShotSplit& split);
// Throws InvalidState on any violation.
void validate_split(const ZeroShotSplit& split);

struct LabelMetrics {
  std::string label;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MacroMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<LabelMetrics> per_label;
};

// Per-label confusion counts over distinct (head, tail, label) triples, then
// the unweighted mean over `labels`. Triples with labels outside `labels`
// are ignored. 0/0 counts as 0.
MacroMetrics macro_prf1(const std::vector<PredictionSet>& predictions, const std::vector<InputInstance>& golds,
                        const std::vector<std::string>& labels);

// Per test instance: uniform random scores for every candidate pair and
// unseen label, decoded with the same rule as the model.
std::vector<PredictionSet> random_predictions(const ZeroShotSplit& split, std::uint64_t seed,
                                              const DecodeOptions& decode_options,
                                              std::optional<int> pair_window = std::nullopt);

struct ExperimentConfig {
  int m = 5;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  ModelConfig model;
  TrainConfig train;
  VocabOptions vocab;
  DecodeOptions decode;
  int eval_batch_size = 32;
  bool random_baseline = true;

  void check() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<std::string> unseen_labels;
  int train_size = 0;
  int test_size = 0;
  MacroMetrics metrics;
  MacroMetrics baseline;
  double final_loss = 0.0;
};

struct ExperimentResult {
  std::vector<SeedResult> rows;
  MacroMetrics mean;
  MacroMetrics baseline_mean;
  nlohmann::json config;
};

// One fresh model per seed, trained on that seed's split and evaluated on
// its test side with exactly the unseen labels as candidates.
ExperimentResult run_experiment(const std::vector<InputInstance>& dataset, const ExperimentConfig& cfg);

// Per-seed rows, the mean, a hash of the effective config and the source
// revision.
nlohmann::json results_json(const ExperimentResult& result);
void write_results_csv(std::ostream& out, const ExperimentResult& result);

struct BenchmarkResult {
  int instances = 0;
  int batch_size = 0;
  long forward_pass_count = 0;
  double seconds = 0.0;
  double sentences_per_second = 0.0;
};

// Wall-clock scoring throughput. The pass count comes from the model's own
// encoder counter.
template <typename T>
BenchmarkResult speed_benchmark(const Model<T>& model, const std::vector<InputInstance>& instances,
                                const std::vector<std::string>& labels, int batch_size);

}  // namespace glirel
