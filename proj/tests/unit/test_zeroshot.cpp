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

#include <doctest.h>

#include <sstream>

#include "glirel/error.hpp"
#include "glirel/inference.hpp"
#include "glirel/zeroshot.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace glirel;

namespace {

// Instances over `n` labels named l0, l1, ...
std::vector<InputInstance> labelled_corpus(int num_labels, int size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> labels;
  for (int i = 0; i < num_labels; ++i) labels.push_back("l" + std::to_string(i));
  std::vector<InputInstance> out;
  for (int i = 0; i < size; ++i) {
    out.push_back(testing::random_instance(rng, 8, 3, labels, 1 + static_cast<int>(uniform_index(rng, 3))));
  }
  return out;
}

Prediction pred(int h, int t, const std::string& label) { return {h, t, label, 0.9}; }

}  // namespace

TEST_CASE("a split hides its unseen labels from training") {
  const auto data = labelled_corpus(3, 60, 1);
  const auto split = make_split(data, 1, 5);
  CHECK(split.unseen_labels.size() == 1);
  CHECK(split.seen_labels.size() == 2);
  CHECK(count_leaks(split) == 0);
  CHECK(split_violation(split).empty());
  CHECK(split.train.size() + split.test.size() == data.size());
  for (const auto& x : split.test) {
    for (const auto& r : x.relations) CHECK(r.label == split.unseen_labels[0]);
  }
  const auto again = make_split(data, 1, 5);
  CHECK(again.unseen_labels == split.unseen_labels);
  CHECK(again.train == split.train);
  CHECK(again.test == split.test);
}

TEST_CASE("standard unseen counts and invalid m") {
  const auto data = labelled_corpus(40, 400, 2);
  for (const int m : {5, 10, 15}) {
    const auto split = make_split(data, m, 3);
    CHECK(static_cast<int>(split.unseen_labels.size()) == m);
    CHECK_NOTHROW(validate_split(split));
  }
  CHECK_THROWS_AS(make_split(data, 40, 1), InvalidInput);
  CHECK_THROWS_AS(make_split(data, 0, 1), InvalidInput);
}

TEST_CASE("the validator catches a planted leak") {
  const auto data = labelled_corpus(4, 80, 3);
  auto split = make_split(data, 2, 4);
  REQUIRE(!split.test.empty());
  split.train.push_back(split.test.front());
  CHECK(count_leaks(split) == 1);
  CHECK_FALSE(split_violation(split).empty());
  CHECK_THROWS_AS(validate_split(split), InvalidState);
}

TEST_CASE("macro scores: perfect, hand-counted and empty labels") {
  const auto gold = parse_bracketed("[A] x [B] y [C] . | 0 1 a; 1 2 a; 0 2 b");
  const std::vector<InputInstance> golds = {gold};

  PredictionSet perfect{{pred(0, 1, "a"), pred(1, 2, "a"), pred(0, 2, "b")}};
  const auto p = macro_prf1({perfect}, golds, {"a", "b"});
  CHECK(p.precision == 1.0);
  CHECK(p.recall == 1.0);
  CHECK(p.f1 == 1.0);

  // a: TP 1, FP 0, FN 1.  b: TP 1, FP 1, FN 0.
  PredictionSet mixed{{pred(0, 1, "a"), pred(0, 2, "b"), pred(2, 0, "b")}};
  const auto m = macro_prf1({mixed}, golds, {"a", "b"});
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.per_label[0].recall == 0.5);
  CHECK(m.per_label[1].precision == 0.5);

  const auto with_empty = macro_prf1({perfect}, golds, {"a", "b", "c"});
  CHECK(with_empty.per_label[2].f1 == 0.0);
  CHECK(with_empty.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  PredictionSet duplicated{{pred(0, 1, "a"), pred(0, 1, "a")}};
  CHECK(macro_prf1({duplicated}, golds, {"a"}).per_label[0].fp == 0);
}

TEST_CASE("macro scores agree with brute-force counting") {
  Rng rng(8);
  const std::vector<std::string> labels = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<InputInstance> golds;
    std::vector<PredictionSet> preds;
    for (int i = 0; i < 4; ++i) {
      golds.push_back(testing::random_instance(rng, 6, 3, labels, static_cast<int>(uniform_index(rng, 4))));
      PredictionSet p;
      const int n = static_cast<int>(uniform_index(rng, 5));
      for (int k = 0; k < n; ++k) {
        const int h = static_cast<int>(uniform_index(rng, 3));
        const int t = (h + 1 + static_cast<int>(uniform_index(rng, 2))) % 3;
        p.relations.push_back(pred(h, t, labels[uniform_index(rng, labels.size())]));
      }
      preds.push_back(p);
    }
    const std::vector<std::string> scored(labels.begin(), labels.begin() + 3);
    const auto got = macro_prf1(preds, golds, scored);
    const auto want = oracle::macro_by_counting(preds, golds, scored);
    CHECK(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
    CHECK(got.recall == doctest::Approx(want.recall).epsilon(1e-12));
    CHECK(got.f1 == doctest::Approx(want.f1).epsilon(1e-12));
  }
}

TEST_CASE("random baseline decodes over the unseen labels only") {
  const auto data = labelled_corpus(6, 120, 9);
  const auto split = make_split(data, 2, 1);
  const auto preds = random_predictions(split, 3, {});
  REQUIRE(preds.size() == split.test.size());
  for (const auto& p : preds) {
    for (const auto& r : p.relations) {
      CHECK(std::find(split.unseen_labels.begin(), split.unseen_labels.end(), r.label) !=
            split.unseen_labels.end());
    }
  }
  const auto again = random_predictions(split, 3, {});
  CHECK(again == preds);
}

TEST_CASE("experiments are deterministic and a single seed is its own mean") {
  const auto data = make_toy_corpus({120, 3, 0.25, 0.5});
  ExperimentConfig cfg;
  cfg.m = 4;
  cfg.seeds = {7};
  cfg.model = testing::small_config(16, 1, 2);
  cfg.train.total_steps = 15;
  const auto a = run_experiment(data, cfg);
  const auto b = run_experiment(data, cfg);
  REQUIRE(a.rows.size() == 1);
  CHECK(a.rows[0].metrics.f1 == a.mean.f1);
  CHECK(a.rows[0].metrics.precision == a.mean.precision);
  CHECK(a.mean.f1 == b.mean.f1);
  CHECK(a.rows[0].final_loss == b.rows[0].final_loss);
  CHECK(a.rows[0].unseen_labels.size() == 4);

  const auto j = results_json(a);
  CHECK(j.contains("config_hash"));
  CHECK(j.contains("git_revision"));
  CHECK(j["per_seed"].size() == 1);
  std::ostringstream csv;
  write_results_csv(csv, a);
  CHECK(csv.str().find("seed") != std::string::npos);
}

TEST_CASE("benchmark counts one encoder pass per batch") {
  const auto data = make_toy_corpus({64, 1, 0.25, 0.5});
  const auto labels = toy_relation_labels();
  const auto m = testing::small_model<float>(testing::small_config(16, 1, 2), data, labels, 1);
  const auto r = speed_benchmark(m, data, labels, 32);
  CHECK(r.forward_pass_count == 2);
  CHECK(r.instances == 64);
  CHECK(r.sentences_per_second > 0.0);
  CHECK(speed_benchmark(m, std::vector<InputInstance>(data.begin(), data.begin() + 33), labels, 32)
            .forward_pass_count == 2);
}

TEST_CASE("experiment configuration round trip") {
  ExperimentConfig c;
  c.m = 10;
  c.seeds = {1, 2};
  c.decode.threshold = 0.3;
  nlohmann::json j = c;
  const auto back = j.get<ExperimentConfig>();
  CHECK(back.m == 10);
  CHECK(back.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(back.decode.threshold == 0.3);
  ExperimentConfig bad;
  bad.seeds.clear();
  CHECK_THROWS(bad.check());
}
