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

#include "glirel/refinement.hpp"

namespace glirel {

void RefineConfig::check(int dim) const {
  if (num_layers < 0 || num_layers > kMaxLayers) {
    throw ConfigError("refinement: num_layers must be between 0 and 2");
  }
  if (num_heads < 1 || dim % num_heads != 0) {
    throw ConfigError("refinement: num_heads must divide the hidden size");
  }
}

void to_json(nlohmann::json& j, const RefineConfig& c) {
  j = {{"refine_pairs", c.refine_pairs}, {"refine_labels", c.refine_labels},
       {"num_layers", c.num_layers},     {"num_heads", c.num_heads},
       {"ffn_residual", c.ffn_residual}};
}

void from_json(const nlohmann::json& j, RefineConfig& c) {
  RefineConfig d;
  c.refine_pairs = j.value("refine_pairs", d.refine_pairs);
  c.refine_labels = j.value("refine_labels", d.refine_labels);
  c.num_layers = j.value("num_layers", d.num_layers);
  c.num_heads = j.value("num_heads", d.num_heads);
  c.ffn_residual = j.value("ffn_residual", d.ffn_residual);
}

template <typename T>
Refiner<T>::Refiner(const RefineConfig& config, int dim, Activation act) : config_(config) {
  config_.check(dim);
  for (int l = 0; l < config_.num_layers; ++l) {
    const std::string suffix = "." + std::to_string(l);
    pair_blocks_.emplace_back("head.refine.pairs" + suffix, dim, config_.num_heads, act,
                              config_.ffn_residual);
    label_blocks_.emplace_back("head.refine.labels" + suffix, dim, config_.num_heads, act,
                               config_.ffn_residual);
  }
}

template <typename T>
void Refiner<T>::init(Rng& rng) {
  for (auto& b : pair_blocks_) b.init(rng);
  for (auto& b : label_blocks_) b.init(rng);
}

template <typename T>
std::pair<Var, Var> Refiner<T>::forward(Tape<T>& tape, Var pairs, Var labels) const {
  for (int l = 0; l < config_.num_layers; ++l) {
    const Var next_pairs = config_.refine_pairs ? pair_blocks_[l].forward(tape, pairs, labels) : pairs;
    const Var next_labels =
        config_.refine_labels ? label_blocks_[l].forward(tape, labels, pairs) : labels;
    pairs = next_pairs;
    labels = next_labels;
  }
  return {pairs, labels};
}

template class Refiner<float>;
template class Refiner<double>;

}  // namespace glirel
