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

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "glirel/model.hpp"
#include "glirel/random.hpp"
#include "glirel/toy_corpus.hpp"

namespace glirel::testing {

inline std::filesystem::path data_dir() { return GLIREL_TEST_DATA_DIR; }

inline ModelConfig small_config(int dim, int layers, int heads) {
  ModelConfig c;
  c.encoder.hidden_dim = dim;
  c.encoder.num_layers = layers;
  c.encoder.num_heads = heads;
  c.encoder.ffn_dim = 2 * dim;
  c.encoder.max_positions = 128;
  return c;
}

// Model over a vocabulary built from the instances and labels.
template <typename T>
Model<T> small_model(const ModelConfig& config, const std::vector<InputInstance>& data,
                     const std::vector<std::string>& labels, std::uint64_t seed) {
  Model<T> model(config, build_vocab(data, labels, {}));
  model.init(seed);
  return model;
}

// Random single-token-entity instance over a small word list.
inline InputInstance random_instance(Rng& rng, int num_tokens, int num_entities,
                                     const std::vector<std::string>& labels, int num_relations) {
  static const std::vector<std::string> kWords = {"the", "river", "town", "of", "was", "near", "Ana",
                                                   "Brenn", "built", "by", "and", "old", "Pella"};
  InputInstance x;
  for (int i = 0; i < num_tokens; ++i) x.tokens.push_back(kWords[uniform_index(rng, kWords.size())]);
  std::vector<int> positions(num_tokens);
  for (int i = 0; i < num_tokens; ++i) positions[i] = i;
  shuffle(positions, rng);
  positions.resize(num_entities);
  std::sort(positions.begin(), positions.end());
  for (const int p : positions) x.entities.push_back({p, p});
  for (int r = 0; r < num_relations && num_entities >= 2; ++r) {
    const int h = static_cast<int>(uniform_index(rng, num_entities));
    int t = static_cast<int>(uniform_index(rng, num_entities - 1));
    if (t >= h) ++t;
    x.relations.push_back({h, t, labels[uniform_index(rng, labels.size())]});
  }
  return x;
}

}  // namespace glirel::testing
