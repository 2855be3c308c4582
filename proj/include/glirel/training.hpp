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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glirel/model.hpp"
#include "glirel/prompt.hpp"

namespace glirel {

inline constexpr const char* kSelfLabel = "SELF";

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Defaults are the desk-scale profile; full_scale_profile() holds the
// full-scale schedule.
struct TrainConfig {
  double encoder_lr = 1e-3;
  double head_lr = 1e-3;
  double warmup_ratio = 0.10;
  int total_steps = 1000;
  int batch_size = 8;
  double weight_decay = 0.01;
  std::uint64_t seed = 42;
  LabelPolicy label_policy{25, 0.0, true, {}};
  double threshold = 0.5;
  // Global gradient-norm clip; 0 disables.
  double max_grad_norm = 1.0;
  AdamWConfig adam;
  // Adds the SELF label (coreference) to instances that carry clusters.
  bool coref_self_label = false;
  int checkpoint_every = 0;
  int jobs = 1;

  static TrainConfig desk_profile() { return {}; }
  static TrainConfig full_scale_profile();
  void check() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const LabelPolicy& p);
void from_json(const nlohmann::json& j, LabelPolicy& p);

// targets[p][t] = 1 iff (head_p, tail_p, labels[t]) is a gold relation. When
// SELF is a candidate and the instance carries clusters, mention pairs of
// one cluster are SELF in both directions. `pairs` use instance indices.
TargetMatrix build_targets(const InputInstance& instance, const std::vector<std::string>& labels,
                           const PairIndexSet& pairs);

// Linear warmup over warmup_ratio * total_steps, then cosine decay to zero.
double lr_multiplier(int step, const TrainConfig& cfg);
std::pair<double, double> lr_at(int step, const TrainConfig& cfg);

// Decoupled-weight-decay Adam with one learning rate per parameter group.
class AdamW {
 public:
  AdamW() = default;
  AdamW(const std::vector<Parameter<float>*>& params, AdamWConfig config);

  // grads[i] belongs to params[i]; lrs[i] is its group learning rate.
  void step(const std::vector<Parameter<float>*>& params, const std::vector<Matrix<float>>& grads,
            const std::vector<double>& lrs, double weight_decay);
  long steps_taken() const { return t_; }

 private:
  AdamWConfig config_;
  std::vector<Matrix<float>> m_;
  std::vector<Matrix<float>> v_;
  long t_ = 0;
};

struct TrainState {
  Model<float> model;
  AdamW optimizer;
  int step = 0;
  Rng rng;

  TrainState(Model<float> m, std::uint64_t seed);
};

struct StepResult {
  double loss = 0.0;
  int scored_instances = 0;
  double encoder_lr = 0.0;
  double head_lr = 0.0;
};

// One forward/backward/update over a batch. Label regularization is applied
// per instance from state.rng; instances without entity pairs contribute no
// loss. Throws NumericalError instead of applying a non-finite update.
StepResult train_step(std::span<const InputInstance> batch, TrainState& state, const TrainConfig& cfg);

// Label list and gold-consistent instance for one training example.
struct TrainingExample {
  std::vector<std::string> labels;
  InputInstance instance;
};
TrainingExample make_training_example(const InputInstance& instance, const TrainConfig& cfg, Rng& rng);

struct TrainLogEntry {
  int step = 0;
  double loss = 0.0;
  double encoder_lr = 0.0;
  double head_lr = 0.0;
};

struct TrainHooks {
  std::function<void(const TrainLogEntry&)> on_step;
  std::function<void(const TrainState&)> on_checkpoint;
};

// Fresh model (vocabulary from `train`, parameters from cfg.seed) trained for
// cfg.total_steps over shuffled passes of `train`.
TrainState train_model(const std::vector<InputInstance>& train, const ModelConfig& model_config,
                       TrainConfig cfg, const VocabOptions& vocab_options = {},
                       const TrainHooks& hooks = {});

// Continues training an existing state.
void train_loop(const std::vector<InputInstance>& train, TrainState& state, const TrainConfig& cfg,
                const TrainHooks& hooks = {});

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace glirel
