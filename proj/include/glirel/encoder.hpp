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

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "glirel/nn.hpp"
#include "glirel/prompt.hpp"
#include "glirel/tokenizer.hpp"

namespace glirel {

// Starting values of the learned position table.
enum class PositionInit { kSinusoid, kNormal };

struct EncoderConfig {
  int hidden_dim = 64;
  int num_layers = 2;
  int num_heads = 4;
  int ffn_dim = 256;
  int vocab_size = 0;
  int max_positions = 512;
  std::string subword_scheme = "wordpiece-freq-v1-uncased";
  bool final_norm = true;
  PositionInit position_init = PositionInit::kSinusoid;

  void check() const;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

// Pre-norm transformer layer: x + Att(LN(x)), then x + FFN(LN(x)).
template <typename T>
struct EncoderLayer {
  LayerNorm<T> attn_norm;
  MultiHeadAttention<T> attention;
  LayerNorm<T> ffn_norm;
  Ffn2<T> ffn;

  EncoderLayer() = default;
  EncoderLayer(const std::string& name, const EncoderConfig& cfg);

  Var forward(Tape<T>& tape, Var x) const;

  template <typename F>
  void visit(F&& f) {
    attn_norm.visit(f);
    attention.visit(f);
    ffn_norm.visit(f);
    ffn.visit(f);
  }
};

// Pooled encoder output of one assembled sequence, as plain matrices.
template <typename T>
struct EncodedSequence {
  Matrix<T> label_vectors;    // M x D, rows at label elements
  Matrix<T> word_vectors;     // N x D, rows at text elements
  Matrix<T> special_vectors;  // [REL]/[SEP] rows, in element order; unused downstream
};

// Tape handles for the pooled rows.
struct PooledVars {
  Var labels;  // M x D
  Var words;   // N x D
};

// Bidirectional self-attention encoder with learned absolute positions and
// first-subword pooling.
template <typename T>
class Encoder {
 public:
  Encoder() = default;
  explicit Encoder(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }
  void init(Rng& rng);

  // One contextual vector per subword id, L x D.
  Var forward(Tape<T>& tape, std::span<const int> ids) const;

  // First-subword pooling split into label rows and text rows.
  PooledVars pool(Tape<T>& tape, Var hidden, const TokenizedSequence& tokens,
                  const AssembledSequence& seq) const;

  // Tokenize, run, pool. Throws InvalidInput when the sequence exceeds
  // max_positions.
  EncodedSequence<T> encode(const AssembledSequence& seq, const SubwordVocab& vocab) const;

  Parameter<T>& token_embeddings() { return token_embeddings_; }
  Parameter<T>& position_embeddings() { return position_embeddings_; }
  std::vector<EncoderLayer<T>>& layers() { return layers_; }
  const std::vector<EncoderLayer<T>>& layers() const { return layers_; }

  template <typename F>
  void visit(F&& f) {
    f(token_embeddings_);
    f(position_embeddings_);
    for (auto& layer : layers_) layer.visit(f);
    if (config_.final_norm) final_norm_.visit(f);
  }

 private:
  EncoderConfig config_;
  Parameter<T> token_embeddings_;
  Parameter<T> position_embeddings_;
  std::vector<EncoderLayer<T>> layers_;
  LayerNorm<T> final_norm_;
};

extern template struct EncoderLayer<float>;
extern template struct EncoderLayer<double>;
extern template class Encoder<float>;
extern template class Encoder<double>;

}  // namespace glirel
