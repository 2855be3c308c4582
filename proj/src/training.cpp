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

#include "glirel/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include "glirel/error.hpp"

namespace glirel {

TrainConfig TrainConfig::full_scale_profile() {
  TrainConfig c;
  c.encoder_lr = 1e-5;
  c.head_lr = 1e-4;
  c.warmup_ratio = 0.10;
  c.total_steps = 20000;
  c.batch_size = 8;
  c.weight_decay = 0.01;
  c.max_grad_norm = 0.0;
  return c;
}

void TrainConfig::check() const {
  if (!(warmup_ratio > 0.0 && warmup_ratio < 1.0)) throw ConfigError("warmup_ratio must lie in (0, 1)");
  if (!(encoder_lr > 0.0 && head_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  glirel::check(label_policy);
}

void to_json(nlohmann::json& j, const LabelPolicy& p) {
  j = {{"max_labels", p.max_labels},
       {"drop_probability", p.drop_probability},
       {"shuffle", p.shuffle},
       {"negative_pool", p.negative_pool}};
}

void from_json(const nlohmann::json& j, LabelPolicy& p) {
  LabelPolicy d;
  p.max_labels = j.value("max_labels", d.max_labels);
  p.drop_probability = j.value("drop_probability", d.drop_probability);
  p.shuffle = j.value("shuffle", d.shuffle);
  p.negative_pool = j.value("negative_pool", d.negative_pool);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"encoder_lr", c.encoder_lr},
       {"head_lr", c.head_lr},
       {"warmup_ratio", c.warmup_ratio},
       {"total_steps", c.total_steps},
       {"batch_size", c.batch_size},
       {"weight_decay", c.weight_decay},
       {"seed", c.seed},
       {"label_policy", c.label_policy},
       {"threshold", c.threshold},
       {"max_grad_norm", c.max_grad_norm},
       {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
       {"coref_self_label", c.coref_self_label},
       {"checkpoint_every", c.checkpoint_every},
       {"jobs", c.jobs}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  if (j.value("profile", std::string("desk")) == "full") d = TrainConfig::full_scale_profile();
  c.encoder_lr = j.value("encoder_lr", d.encoder_lr);
  c.head_lr = j.value("head_lr", d.head_lr);
  c.warmup_ratio = j.value("warmup_ratio", d.warmup_ratio);
  c.total_steps = j.value("total_steps", d.total_steps);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.seed = j.value("seed", d.seed);
  c.label_policy = j.contains("label_policy") ? j["label_policy"].get<LabelPolicy>() : d.label_policy;
  c.threshold = j.value("threshold", d.threshold);
  c.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  c.adam = d.adam;
  if (j.contains("adam")) {
    c.adam.beta1 = j["adam"].value("beta1", d.adam.beta1);
    c.adam.beta2 = j["adam"].value("beta2", d.adam.beta2);
    c.adam.eps = j["adam"].value("eps", d.adam.eps);
  }
  c.coref_self_label = j.value("coref_self_label", d.coref_self_label);
  c.checkpoint_every = j.value("checkpoint_every", d.checkpoint_every);
  c.jobs = j.value("jobs", d.jobs);
}

TargetMatrix build_targets(const InputInstance& instance, const std::vector<std::string>& labels,
                           const PairIndexSet& pairs) {
  std::map<std::string, int> column;
  for (std::size_t t = 0; t < labels.size(); ++t) column.emplace(labels[t], static_cast<int>(t));
  std::map<std::pair<int, int>, int> row;
  for (int p = 0; p < pairs.size(); ++p) row.emplace(pairs.pairs[p], p);

  TargetMatrix targets = TargetMatrix::Zero(pairs.size(), static_cast<Eigen::Index>(labels.size()));
  for (const auto& rel : instance.relations) {
    auto c = column.find(rel.label);
    if (c == column.end()) {
      throw InvalidState("build_targets: gold label \"" + rel.label + "\" is not a candidate");
    }
    if (auto r = row.find({rel.head, rel.tail}); r != row.end()) targets(r->second, c->second) = 1.0;
  }
  if (auto self = column.find(kSelfLabel); self != column.end() && instance.clusters) {
    std::vector<int> cluster_of(instance.entities.size(), -1);
    for (std::size_t c = 0; c < instance.clusters->size(); ++c) {
      for (int m : (*instance.clusters)[c]) cluster_of.at(m) = static_cast<int>(c);
    }
    for (int p = 0; p < pairs.size(); ++p) {
      const auto [u, v] = pairs.pairs[p];
      if (cluster_of.at(u) >= 0 && cluster_of[u] == cluster_of.at(v)) targets(p, self->second) = 1.0;
    }
  }
  return targets;
}

double lr_multiplier(int step, const TrainConfig& cfg) {
  const double total = cfg.total_steps;
  const double warmup = cfg.warmup_ratio * total;
  const double s = std::clamp(static_cast<double>(step), 0.0, total);
  if (s < warmup) return s / warmup;
  const double progress = (s - warmup) / (total - warmup);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::pair<double, double> lr_at(int step, const TrainConfig& cfg) {
  const double m = lr_multiplier(step, cfg);
  return {cfg.encoder_lr * m, cfg.head_lr * m};
}

AdamW::AdamW(const std::vector<Parameter<float>*>& params, AdamWConfig config) : config_(config) {
  for (const auto* p : params) {
    m_.push_back(Matrix<float>::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix<float>::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamW::step(const std::vector<Parameter<float>*>& params, const std::vector<Matrix<float>>& grads,
                 const std::vector<double>& lrs, double weight_decay) {
  if (params.size() != m_.size() || grads.size() != m_.size() || lrs.size() != m_.size()) {
    throw InvalidState("AdamW: parameter list changed");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const auto b1 = static_cast<float>(config_.beta1);
  const auto b2 = static_cast<float>(config_.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& value = params[i]->value;
    const auto& g = grads[i];
    m_[i] = b1 * m_[i] + (1.0f - b1) * g;
    v_[i] = b2 * v_[i] + (1.0f - b2) * g.cwiseProduct(g);
    const auto lr = static_cast<float>(lrs[i]);
    if (params[i]->decay && weight_decay > 0.0) value *= 1.0f - lr * static_cast<float>(weight_decay);
    const auto step_size = static_cast<float>(lrs[i] / c1);
    const auto inv_c2 = static_cast<float>(1.0 / std::sqrt(c2));
    const auto eps = static_cast<float>(config_.eps);
    value.array() -= step_size * m_[i].array() / (v_[i].array().sqrt() * inv_c2 + eps);
  }
}

TrainState::TrainState(Model<float> m, std::uint64_t seed)
    : model(std::move(m)), optimizer(model.parameters(), AdamWConfig{}), rng(seed) {}

TrainingExample make_training_example(const InputInstance& instance, const TrainConfig& cfg, Rng& rng) {
  auto gold = instance.gold_labels();
  const bool with_self = cfg.coref_self_label && instance.clusters.has_value();
  if (with_self) {
    for (const auto& c : *instance.clusters) {
      if (c.size() > 1) gold.insert(kSelfLabel);
    }
  }
  LabelPolicy policy = cfg.label_policy;
  if (with_self &&
      std::find(policy.negative_pool.begin(), policy.negative_pool.end(), kSelfLabel) ==
          policy.negative_pool.end()) {
    policy.negative_pool.emplace_back(kSelfLabel);
  }
  TrainingExample ex;
  ex.labels = regularize_labels(gold, policy, rng);
  ex.instance = instance;
  // Gold labels beyond the cap leave the instance with their relations.
  std::erase_if(ex.instance.relations, [&](const RelationTriple& r) {
    return std::find(ex.labels.begin(), ex.labels.end(), r.label) == ex.labels.end();
  });
  if (!with_self) ex.instance.clusters.reset();
  return ex;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += jobs) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  workers.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

StepResult train_step(std::span<const InputInstance> batch, TrainState& state, const TrainConfig& cfg) {
  if (batch.empty()) throw InvalidInput("train_step: empty batch");
  auto& model = state.model;
  const auto& params = model.parameters();

  std::vector<PreparedInput> inputs;
  std::vector<TargetMatrix> targets;
  for (const auto& instance : batch) {
    auto ex = make_training_example(instance, cfg, state.rng);
    if (ex.labels.empty()) continue;
    auto prepared = model.prepare(ex.instance, ex.labels);
    if (prepared.pairs.empty()) continue;
    targets.push_back(build_targets(ex.instance, ex.labels, prepared.pairs));
    inputs.push_back(std::move(prepared));
  }

  StepResult result;
  std::tie(result.encoder_lr, result.head_lr) = lr_at(state.step, cfg);
  result.scored_instances = static_cast<int>(inputs.size());

  std::vector<Matrix<float>> grads;
  grads.reserve(params.size());
  for (const auto* p : params) grads.push_back(Matrix<float>::Zero(p->value.rows(), p->value.cols()));

  if (!inputs.empty()) {
    const int n = static_cast<int>(inputs.size());
    std::vector<std::unique_ptr<Tape<float>>> owned;
    std::vector<Tape<float>*> tapes;
    for (int i = 0; i < n; ++i) {
      owned.push_back(std::make_unique<Tape<float>>(true));
      tapes.push_back(owned.back().get());
    }
    const auto logits = model.forward_batch(tapes, inputs);
    std::vector<double> losses(n);
    parallel_for(n, cfg.jobs, [&](int i) {
      const Var loss = tapes[i]->bce_with_logits(logits[i], targets[i].cast<float>());
      losses[i] = tapes[i]->value(loss)(0, 0);
      tapes[i]->backward(loss);
    });

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(losses[i])) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << state.step << " (instance " << i << " of batch, "
            << inputs[i].pairs.size() << " pairs, " << inputs[i].sequence.num_labels() << " labels)";
        throw NumericalError(msg.str());
      }
      total += losses[i];
      tapes[i]->for_each_param_grad(
          [&](const Parameter<float>& p, const Matrix<float>& g) { grads[p.index] += g; });
    }
    result.loss = total / n;
    const float inv = 1.0f / static_cast<float>(n);
    double norm2 = 0.0;
    for (auto& g : grads) {
      g *= inv;
      norm2 += static_cast<double>(g.squaredNorm());
    }
    if (!std::isfinite(norm2)) throw NumericalError("non-finite gradient at step " + std::to_string(state.step));
    if (cfg.max_grad_norm > 0.0 && norm2 > cfg.max_grad_norm * cfg.max_grad_norm) {
      const auto s = static_cast<float>(cfg.max_grad_norm / std::sqrt(norm2));
      for (auto& g : grads) g *= s;
    }

    std::vector<double> lrs;
    lrs.reserve(params.size());
    for (const auto* p : params) {
      lrs.push_back(model.group(*p) == ParameterGroup::kEncoder ? result.encoder_lr : result.head_lr);
    }
    state.optimizer.step(params, grads, lrs, cfg.weight_decay);
  }
  ++state.step;
  return result;
}

void train_loop(const std::vector<InputInstance>& train, TrainState& state, const TrainConfig& cfg,
                const TrainHooks& hooks) {
  cfg.check();
  if (train.empty()) throw InvalidInput("train: empty training set");
  std::vector<int> order(train.size());
  std::size_t cursor = order.size();
  std::vector<InputInstance> batch;
  while (state.step < cfg.total_steps) {
    batch.clear();
    while (static_cast<int>(batch.size()) < cfg.batch_size) {
      if (cursor == order.size()) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        shuffle(order, state.rng);
        cursor = 0;
      }
      batch.push_back(train[order[cursor++]]);
      if (static_cast<int>(batch.size()) == static_cast<int>(train.size())) break;
    }
    const auto r = train_step(batch, state, cfg);
    if (hooks.on_step) hooks.on_step({state.step, r.loss, r.encoder_lr, r.head_lr});
    if (hooks.on_checkpoint && cfg.checkpoint_every > 0 && state.step % cfg.checkpoint_every == 0) {
      hooks.on_checkpoint(state);
    }
  }
}

TrainState train_model(const std::vector<InputInstance>& train, const ModelConfig& model_config,
                       TrainConfig cfg, const VocabOptions& vocab_options, const TrainHooks& hooks) {
  if (cfg.label_policy.negative_pool.empty()) cfg.label_policy.negative_pool = label_universe(train);
  std::vector<std::string> extra = cfg.label_policy.negative_pool;
  if (cfg.coref_self_label) extra.emplace_back(kSelfLabel);
  Model<float> model(model_config, build_vocab(train, extra, vocab_options));
  model.init(cfg.seed);
  TrainState state(std::move(model), cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  train_loop(train, state, cfg, hooks);
  return state;
}

}  // namespace glirel
