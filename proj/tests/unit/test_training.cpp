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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "glirel/error.hpp"
#include "glirel/training.hpp"
#include "support/fixtures.hpp"

using namespace glirel;

namespace {

InputInstance founded() {
  return parse_bracketed("[Apple] was founded by [Steve Jobs] . | 0 1 founded by");
}

}  // namespace

TEST_CASE("targets mark gold cells only") {
  const auto t = build_targets(founded(), {"founded by", "located in"}, PairIndexSet{{{0, 1}, {1, 0}}});
  TargetMatrix expected(2, 2);
  expected << 1, 0, 0, 0;
  CHECK(t == expected);

  auto none = founded();
  none.relations.clear();
  CHECK(build_targets(none, {"a", "b"}, enumerate_pairs(2, {})).isZero(0.0));
  CHECK_THROWS_AS(build_targets(founded(), {"located in"}, enumerate_pairs(2, {})), InvalidState);
}

TEST_CASE("targets agree with brute-force membership") {
  Rng rng(11);
  const std::vector<std::string> labels = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = testing::random_instance(rng, 10, 1 + static_cast<int>(uniform_index(rng, 5)), labels, 4);
    const auto pairs = enumerate_pairs(static_cast<int>(x.entities.size()), x.entities);
    const auto t = build_targets(x, labels, pairs);
    for (int p = 0; p < pairs.size(); ++p) {
      for (std::size_t l = 0; l < labels.size(); ++l) {
        const RelationTriple cell{pairs.pairs[p].first, pairs.pairs[p].second, labels[l]};
        const bool gold = std::find(x.relations.begin(), x.relations.end(), cell) != x.relations.end();
        CHECK(t(p, static_cast<Eigen::Index>(l)) == (gold ? 1.0 : 0.0));
      }
    }
  }
}

TEST_CASE("coreferent mentions are SELF in both directions") {
  auto doc = parse_bracketed("[Ana] met [Boris] . [She] left . | 0 1 met");
  doc.clusters = std::vector<std::vector<int>>{{0, 2}, {1}};
  const auto pairs = enumerate_pairs(3, {});
  const auto t = build_targets(doc, {"met", kSelfLabel}, pairs);
  for (int p = 0; p < pairs.size(); ++p) {
    const auto [u, v] = pairs.pairs[p];
    const bool same = (u == 0 && v == 2) || (u == 2 && v == 0);
    CHECK(t(p, 1) == (same ? 1.0 : 0.0));
  }

  TrainConfig cfg;
  cfg.coref_self_label = true;
  cfg.label_policy.shuffle = false;
  Rng rng(1);
  const auto ex = make_training_example(doc, cfg, rng);
  CHECK(std::count(ex.labels.begin(), ex.labels.end(), kSelfLabel) == 1);
  CHECK(ex.instance.clusters.has_value());

  cfg.coref_self_label = false;
  const auto plain = make_training_example(doc, cfg, rng);
  CHECK(std::count(plain.labels.begin(), plain.labels.end(), kSelfLabel) == 0);
  CHECK_FALSE(plain.instance.clusters.has_value());
}

TEST_CASE("capped-out gold labels leave with their relations") {
  auto x = parse_bracketed("[A] x [B] y [C] . | 0 1 r1; 1 2 r2; 0 2 r3");
  TrainConfig cfg;
  cfg.label_policy.max_labels = 2;
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto ex = make_training_example(x, cfg, rng);
    CHECK(ex.labels.size() == 2);
    CHECK(ex.instance.relations.size() == 2);
    for (const auto& r : ex.instance.relations) {
      CHECK(std::find(ex.labels.begin(), ex.labels.end(), r.label) != ex.labels.end());
    }
  }
}

TEST_CASE("warmup then cosine schedule") {
  const auto full = TrainConfig::full_scale_profile();
  CHECK(lr_at(0, full) == std::pair<double, double>{0.0, 0.0});
  const int warm = static_cast<int>(full.warmup_ratio * full.total_steps);
  CHECK(lr_at(warm, full) == std::pair<double, double>{1e-5, 1e-4});
  const auto end = lr_at(full.total_steps, full);
  CHECK(end.first == doctest::Approx(0.0));
  CHECK(end.second == doctest::Approx(0.0));
  CHECK(lr_multiplier(static_cast<int>(0.55 * full.total_steps), full) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lr_multiplier(warm / 2, full) == doctest::Approx(0.5).epsilon(1e-12));
  double previous = 2.0;
  for (int s = warm; s <= full.total_steps; s += 500) {
    const double m = lr_multiplier(s, full);
    CHECK(m <= previous);
    previous = m;
  }
}

TEST_CASE("AdamW first step moves each entry by the learning rate") {
  Parameter<float> w, b;
  w.value = Matrix<float>::Constant(2, 2, 1.0f);
  w.index = 0;
  b.value = Matrix<float>::Constant(1, 2, 1.0f);
  b.index = 1;
  b.decay = false;
  std::vector<Parameter<float>*> params = {&w, &b};
  AdamW opt(params, {});
  std::vector<Matrix<float>> grads = {Matrix<float>::Constant(2, 2, 0.3f), Matrix<float>::Constant(1, 2, -2.0f)};
  opt.step(params, grads, {0.1, 0.1}, 0.5);
  // Decoupled decay first: 1 * (1 - 0.1 * 0.5), then a unit Adam step.
  CHECK(w.value(0, 0) == doctest::Approx(0.95 - 0.1).epsilon(1e-5));
  CHECK(b.value(0, 0) == doctest::Approx(1.1).epsilon(1e-5));
  CHECK(opt.steps_taken() == 1);
}

TEST_CASE("identical states and batches give identical steps") {
  const auto data = overfit_suite();
  const auto labels = label_universe(data);
  const auto config = testing::small_config(16, 1, 2);
  TrainConfig cfg;
  cfg.total_steps = 10;
  auto make_state = [&] { return TrainState(testing::small_model<float>(config, data, labels, 5), 99); };
  auto a = make_state();
  auto b = make_state();
  cfg.label_policy.negative_pool = labels;
  const std::vector<InputInstance> batch(data.begin(), data.begin() + 4);
  for (int i = 0; i < 3; ++i) {
    const auto ra = train_step(batch, a, cfg);
    const auto rb = train_step(batch, b, cfg);
    CHECK(ra.loss == rb.loss);
    CHECK(ra.scored_instances == 4);
  }
  for (std::size_t i = 0; i < a.model.parameters().size(); ++i) {
    CHECK(a.model.parameters()[i]->value == b.model.parameters()[i]->value);
  }
}

TEST_CASE("threaded and serial backward passes agree") {
  const auto data = overfit_suite();
  const auto labels = label_universe(data);
  const auto config = testing::small_config(16, 1, 2);
  TrainConfig cfg;
  cfg.label_policy.negative_pool = labels;
  TrainState serial(testing::small_model<float>(config, data, labels, 6), 3);
  TrainState threaded(testing::small_model<float>(config, data, labels, 6), 3);
  const std::vector<InputInstance> batch(data.begin(), data.begin() + 8);
  const auto r1 = train_step(batch, serial, cfg);
  cfg.jobs = 3;
  const auto r2 = train_step(batch, threaded, cfg);
  CHECK(r1.loss == r2.loss);
  for (std::size_t i = 0; i < serial.model.parameters().size(); ++i) {
    CHECK(serial.model.parameters()[i]->value == threaded.model.parameters()[i]->value);
  }
}

TEST_CASE("training loss falls over the first 200 steps") {
  const auto data = overfit_suite();
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg;
    cfg.total_steps = 200;
    cfg.seed = seed;
    std::vector<double> losses;
    TrainHooks hooks;
    hooks.on_step = [&](const TrainLogEntry& e) { losses.push_back(e.loss); };
    train_model(data, ModelConfig{}, cfg, {}, hooks);
    REQUIRE(losses.size() == 200);
    const auto mean = [](auto first, auto last) {
      double s = 0;
      for (auto it = first; it != last; ++it) s += *it;
      return s / static_cast<double>(last - first);
    };
    ratios.push_back(mean(losses.end() - 10, losses.end()) / mean(losses.begin(), losses.begin() + 10));
  }
  std::sort(ratios.begin(), ratios.end());
  CHECK(ratios[2] < 0.5);
}

TEST_CASE("a non-finite loss stops the step before any update") {
  const auto data = overfit_suite();
  const auto labels = label_universe(data);
  TrainConfig cfg;
  cfg.label_policy.negative_pool = labels;
  TrainState state(testing::small_model<float>(testing::small_config(16, 1, 2), data, labels, 7), 1);
  auto& params = state.model.parameters();
  params.back()->value(0, 0) = std::numeric_limits<float>::quiet_NaN();
  const auto before = params.front()->value;
  const std::vector<InputInstance> batch(data.begin(), data.begin() + 2);
  CHECK_THROWS_AS(train_step(batch, state, cfg), NumericalError);
  CHECK(params.front()->value == before);
  CHECK(state.step == 0);
}

TEST_CASE("configuration round trip and profiles") {
  TrainConfig c;
  c.total_steps = 77;
  c.label_policy.drop_probability = 0.25;
  nlohmann::json j = c;
  const auto back = j.get<TrainConfig>();
  CHECK(back.total_steps == 77);
  CHECK(back.label_policy.drop_probability == 0.25);
  const auto full = nlohmann::json{{"profile", "full"}}.get<TrainConfig>();
  CHECK(full.encoder_lr == 1e-5);
  CHECK(full.head_lr == 1e-4);
  CHECK(full.total_steps == 20000);
  TrainConfig bad;
  bad.warmup_ratio = 0.0;
  CHECK_THROWS_AS(bad.check(), ConfigError);
}

TEST_CASE("parallel_for visits every index and forwards errors") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](int i) { hits[i]++; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                    if (i == 7) throw InvalidInput("boom");
                  }),
                  InvalidInput);
}
