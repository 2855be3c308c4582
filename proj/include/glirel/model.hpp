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

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "glirel/encoder.hpp"
#include "glirel/refinement.hpp"
#include "glirel/representation.hpp"
#include "glirel/scorer.hpp"
#include "glirel/tokenizer.hpp"

namespace glirel {

struct HeadConfig {
  Activation activation = Activation::kGelu;
  RefineConfig refine;
  // Token distance window for pair enumeration; unset scores all pairs.
  std::optional<int> pair_window;
};

struct ModelConfig {
  EncoderConfig encoder;
  HeadConfig head;

  void check() const;
};

void to_json(nlohmann::json& j, const HeadConfig& c);
void from_json(const nlohmann::json& j, HeadConfig& c);
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// An instance turned into model input for a fixed candidate label list.
struct PreparedInput {
  AssembledSequence sequence;
  TokenizedSequence tokens;
  // Pairs over the retained entities, in local (retained) indices.
  PairIndexSet local_pairs;
  // The same pairs in original instance entity indices.
  PairIndexSet pairs;
  std::vector<int> dropped_entities;
};

enum class ParameterGroup { kEncoder, kHead };

template <typename T>
class Model {
 public:
  Model(const ModelConfig& config, SubwordVocab vocab);

  const ModelConfig& config() const { return config_; }
  const SubwordVocab& vocab() const { return vocab_; }

  void init(std::uint64_t seed);

  // Assemble, truncate to the encoder budget, tokenize and enumerate pairs.
  PreparedInput prepare(const InputInstance& instance, const std::vector<std::string>& labels) const;

  // P x M logits for one prepared input.
  Var logits(Tape<T>& tape, const PreparedInput& input) const;

  // One batched forward pass: each input on its own tape. Counts as a
  // single encoder pass regardless of pair or label counts.
  std::vector<Var> forward_batch(std::span<Tape<T>* const> tapes,
                                 std::span<const PreparedInput> inputs) const;

  // Scores a batch without recording gradients.
  std::vector<PairScoreMatrix> score_batch(std::span<const PreparedInput> inputs) const;

  Encoder<T>& encoder() { return encoder_; }
  const Encoder<T>& encoder() const { return encoder_; }
  RepresentationLayers<T>& representation() { return representation_; }
  const RepresentationLayers<T>& representation() const { return representation_; }
  Refiner<T>& refiner() { return refiner_; }
  const Refiner<T>& refiner() const { return refiner_; }

  // Stable, indexed parameter list.
  const std::vector<Parameter<T>*>& parameters() { return parameters_; }
  std::vector<const Parameter<T>*> parameters() const;
  ParameterGroup group(const Parameter<T>& p) const;
  std::size_t parameter_count() const;

  long forward_passes() const { return forward_passes_.load(); }
  long encoded_sequences() const { return encoded_sequences_.load(); }
  void reset_counters() {
    forward_passes_ = 0;
    encoded_sequences_ = 0;
  }

  // Same architecture and parameter values at another precision.
  template <typename U>
  Model<U> cast() const {
    Model<U> out(config_, vocab_);
    auto& dst = out.parameters();
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
      dst[i]->value = parameters_[i]->value.template cast<U>();
    }
    return out;
  }

  Model(const Model& other);
  Model& operator=(const Model&) = delete;

 private:
  void register_parameters();

  ModelConfig config_;
  SubwordVocab vocab_;
  Encoder<T> encoder_;
  RepresentationLayers<T> representation_;
  Refiner<T> refiner_;
  std::vector<Parameter<T>*> parameters_;
  std::size_t first_head_parameter_ = 0;
  mutable std::atomic<long> forward_passes_{0};
  mutable std::atomic<long> encoded_sequences_{0};
};

// Builds a vocabulary from instance tokens plus label strings.
SubwordVocab build_vocab(const std::vector<InputInstance>& data,
                         const std::vector<std::string>& extra_labels, const VocabOptions& options);

extern template class Model<float>;
extern template class Model<double>;

}  // namespace glirel
