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

#include "glirel/encoder.hpp"

#include <cmath>

#include <numeric>

#include "glirel/error.hpp"

namespace glirel {

void EncoderConfig::check() const {
  if (hidden_dim < 1 || num_layers < 0 || num_heads < 1 || ffn_dim < 1 || max_positions < 1) {
    throw ConfigError("encoder config: dimensions must be positive");
  }
  if (hidden_dim % num_heads != 0) {
    throw ConfigError("encoder config: hidden_dim must be divisible by num_heads");
  }
  // 0 means "taken from the vocabulary".
  if (vocab_size != 0 && vocab_size < 3) {
    throw ConfigError("encoder config: vocab_size must cover the special pieces");
  }
}

void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = {{"hidden_dim", c.hidden_dim},       {"num_layers", c.num_layers},
       {"num_heads", c.num_heads},         {"ffn_dim", c.ffn_dim},
       {"vocab_size", c.vocab_size},       {"max_positions", c.max_positions},
       {"subword_scheme", c.subword_scheme}, {"final_norm", c.final_norm},
       {"position_init", c.position_init == PositionInit::kSinusoid ? "sinusoid" : "normal"}};
}

void from_json(const nlohmann::json& j, EncoderConfig& c) {
  EncoderConfig d;
  c.hidden_dim = j.value("hidden_dim", d.hidden_dim);
  c.num_layers = j.value("num_layers", d.num_layers);
  c.num_heads = j.value("num_heads", d.num_heads);
  c.ffn_dim = j.value("ffn_dim", d.ffn_dim);
  c.vocab_size = j.value("vocab_size", d.vocab_size);
  c.max_positions = j.value("max_positions", d.max_positions);
  c.subword_scheme = j.value("subword_scheme", d.subword_scheme);
  c.final_norm = j.value("final_norm", d.final_norm);
  const auto init = j.value("position_init", std::string("sinusoid"));
  if (init != "sinusoid" && init != "normal") throw ConfigError("position_init must be sinusoid or normal");
  c.position_init = init == "sinusoid" ? PositionInit::kSinusoid : PositionInit::kNormal;
}

template <typename T>
EncoderLayer<T>::EncoderLayer(const std::string& name, const EncoderConfig& cfg)
    : attn_norm(name + ".attn_norm", cfg.hidden_dim),
      attention(name + ".attn", cfg.hidden_dim, cfg.num_heads),
      ffn_norm(name + ".ffn_norm", cfg.hidden_dim),
      ffn(name + ".ffn", cfg.hidden_dim, cfg.ffn_dim, cfg.hidden_dim, Activation::kGelu) {}

template <typename T>
Var EncoderLayer<T>::forward(Tape<T>& tape, Var x) const {
  const Var normed = attn_norm.forward(tape, x);
  x = tape.add(x, attention.forward(tape, normed, normed));
  return tape.add(x, ffn.forward(tape, ffn_norm.forward(tape, x)));
}

template <typename T>
Encoder<T>::Encoder(const EncoderConfig& config) : config_(config) {
  config_.check();
  token_embeddings_.name = "encoder.token_embeddings";
  token_embeddings_.value = Matrix<T>::Zero(config_.vocab_size, config_.hidden_dim);
  token_embeddings_.decay = false;
  position_embeddings_.name = "encoder.position_embeddings";
  position_embeddings_.value = Matrix<T>::Zero(config_.max_positions, config_.hidden_dim);
  position_embeddings_.decay = false;
  for (int l = 0; l < config_.num_layers; ++l) {
    layers_.emplace_back("encoder.layers." + std::to_string(l), config_);
  }
  final_norm_ = LayerNorm<T>("encoder.final_norm", config_.hidden_dim);
}

template <typename T>
void Encoder<T>::init(Rng& rng) {
  // Special pieces share the word-embedding distribution.
  constexpr double kEmbeddingStd = 0.02;
  for (Eigen::Index i = 0; i < token_embeddings_.value.size(); ++i) {
    token_embeddings_.value.data()[i] = static_cast<T>(normal(rng, 0.0, kEmbeddingStd));
  }
  auto& pos = position_embeddings_.value;
  if (config_.position_init == PositionInit::kSinusoid) {
    // Sinusoid table rescaled to the embedding RMS; stays trainable.
    const double amplitude = kEmbeddingStd * std::sqrt(2.0);
    const int dim = static_cast<int>(pos.cols());
    for (Eigen::Index p = 0; p < pos.rows(); ++p) {
      for (int i = 0; i < dim; ++i) {
        const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
        const double angle = static_cast<double>(p) * freq;
        pos(p, i) = static_cast<T>(amplitude * (i % 2 == 0 ? std::sin(angle) : std::cos(angle)));
      }
    }
  } else {
    for (Eigen::Index i = 0; i < pos.size(); ++i) pos.data()[i] = static_cast<T>(normal(rng, 0.0, kEmbeddingStd));
  }
  for (auto& layer : layers_) {
    layer.attention.init(rng);
    layer.ffn.init(rng);
  }
}

template <typename T>
Var Encoder<T>::forward(Tape<T>& tape, std::span<const int> ids) const {
  const int length = static_cast<int>(ids.size());
  if (length == 0) throw InvalidInput("encoder: empty input");
  if (length > config_.max_positions) {
    throw InvalidInput("encoder: " + std::to_string(length) + " subwords exceed max_positions " +
                       std::to_string(config_.max_positions));
  }
  for (int id : ids) {
    if (id < 0 || id >= config_.vocab_size) throw InvalidInput("encoder: subword id out of range");
  }
  std::vector<int> positions(length);
  std::iota(positions.begin(), positions.end(), 0);
  Var x = tape.add(tape.gather_rows(tape.param(token_embeddings_), {ids.begin(), ids.end()}),
                   tape.gather_rows(tape.param(position_embeddings_), std::move(positions)));
  for (const auto& layer : layers_) x = layer.forward(tape, x);
  if (config_.final_norm) x = final_norm_.forward(tape, x);
  return x;
}

template <typename T>
PooledVars Encoder<T>::pool(Tape<T>& tape, Var hidden, const TokenizedSequence& tokens,
                            const AssembledSequence& seq) const {
  std::vector<int> label_rows;
  label_rows.reserve(seq.label_element_indices.size());
  for (int e : seq.label_element_indices) label_rows.push_back(tokens.first_subword.at(e));
  std::vector<int> word_rows;
  word_rows.reserve(seq.num_text());
  for (std::size_t e = seq.text_offset; e < seq.elements.size(); ++e) {
    word_rows.push_back(tokens.first_subword.at(e));
  }
  return {tape.gather_rows(hidden, std::move(label_rows)), tape.gather_rows(hidden, std::move(word_rows))};
}

template <typename T>
EncodedSequence<T> Encoder<T>::encode(const AssembledSequence& seq, const SubwordVocab& vocab) const {
  const auto tokens = tokenize_elements(seq, vocab);
  Tape<T> tape(false);
  const Var hidden = forward(tape, tokens.ids);
  const PooledVars pooled = pool(tape, hidden, tokens, seq);

  std::vector<int> special_rows;
  for (int e = 0; e < seq.text_offset; ++e) {
    if (e % 2 == 1 || e == seq.text_offset - 1) special_rows.push_back(tokens.first_subword[e]);
  }
  EncodedSequence<T> out;
  out.label_vectors = tape.value(pooled.labels);
  out.word_vectors = tape.value(pooled.words);
  out.special_vectors = tape.value(tape.gather_rows(hidden, std::move(special_rows)));
  return out;
}

template struct EncoderLayer<float>;
template struct EncoderLayer<double>;
template class Encoder<float>;
template class Encoder<double>;

}  // namespace glirel
