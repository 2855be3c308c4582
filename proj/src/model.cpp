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

#include "glirel/model.hpp"

#include "glirel/error.hpp"

namespace glirel {
namespace {

std::string activation_name(Activation a) { return a == Activation::kGelu ? "gelu" : "identity"; }

Activation activation_from(const std::string& name) {
  if (name == "gelu") return Activation::kGelu;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation " + name);
}

}  // namespace

void ModelConfig::check() const {
  encoder.check();
  head.refine.check(encoder.hidden_dim);
  if (head.pair_window && *head.pair_window < 0) throw ConfigError("pair_window must be >= 0");
}

void to_json(nlohmann::json& j, const HeadConfig& c) {
  j = {{"activation", activation_name(c.activation)}, {"refine", c.refine}};
  j["pair_window"] = c.pair_window ? nlohmann::json(*c.pair_window) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, HeadConfig& c) {
  c = HeadConfig{};
  if (j.contains("activation")) c.activation = activation_from(j["activation"].get<std::string>());
  if (j.contains("refine")) c.refine = j["refine"].get<RefineConfig>();
  if (j.contains("pair_window") && !j["pair_window"].is_null()) {
    c.pair_window = j["pair_window"].get<int>();
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"encoder", c.encoder}, {"head", c.head}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c = ModelConfig{};
  if (j.contains("encoder")) c.encoder = j["encoder"].get<EncoderConfig>();
  if (j.contains("head")) c.head = j["head"].get<HeadConfig>();
}

template <typename T>
Model<T>::Model(const ModelConfig& config, SubwordVocab vocab)
    : config_(config), vocab_(std::move(vocab)) {
  config_.encoder.vocab_size = vocab_.size();
  config_.encoder.subword_scheme = vocab_.scheme();
  config_.check();
  encoder_ = Encoder<T>(config_.encoder);
  representation_ = RepresentationLayers<T>(config_.encoder.hidden_dim, config_.head.activation);
  refiner_ = Refiner<T>(config_.head.refine, config_.encoder.hidden_dim, config_.head.activation);
  register_parameters();
}

template <typename T>
Model<T>::Model(const Model& other)
    : config_(other.config_),
      vocab_(other.vocab_),
      encoder_(other.encoder_),
      representation_(other.representation_),
      refiner_(other.refiner_) {
  register_parameters();
}

template <typename T>
void Model<T>::register_parameters() {
  parameters_.clear();
  auto add = [this](Parameter<T>& p) {
    p.index = static_cast<int>(parameters_.size());
    parameters_.push_back(&p);
  };
  encoder_.visit(add);
  first_head_parameter_ = parameters_.size();
  representation_.visit(add);
  refiner_.visit(add);
}

template <typename T>
std::vector<const Parameter<T>*> Model<T>::parameters() const {
  return {parameters_.begin(), parameters_.end()};
}

template <typename T>
ParameterGroup Model<T>::group(const Parameter<T>& p) const {
  return static_cast<std::size_t>(p.index) < first_head_parameter_ ? ParameterGroup::kEncoder
                                                                    : ParameterGroup::kHead;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

template <typename T>
void Model<T>::init(std::uint64_t seed) {
  Rng rng(seed);
  encoder_.init(rng);
  representation_.init(rng);
  refiner_.init(rng);
}

template <typename T>
PreparedInput Model<T>::prepare(const InputInstance& instance,
                                const std::vector<std::string>& labels) const {
  PreparedInput out;
  const int budget = config_.encoder.max_positions;
  auto cut = truncate(assemble(labels, instance), budget);
  const int fit = elements_within_subword_budget(cut.sequence, vocab_, budget);
  if (fit < static_cast<int>(cut.sequence.elements.size())) {
    auto again = truncate(cut.sequence, fit);
    cut.dropped_entities.insert(cut.dropped_entities.end(), again.dropped_entities.begin(),
                                again.dropped_entities.end());
    cut.sequence = std::move(again.sequence);
  }
  out.sequence = std::move(cut.sequence);
  out.dropped_entities = std::move(cut.dropped_entities);
  out.tokens = tokenize_elements(out.sequence, vocab_);
  out.local_pairs = enumerate_pairs(out.sequence.num_entities(), out.sequence.text_spans(),
                                    config_.head.pair_window);
  out.pairs.pairs.reserve(out.local_pairs.pairs.size());
  for (const auto& [u, v] : out.local_pairs.pairs) {
    out.pairs.pairs.emplace_back(out.sequence.entity_ids[u], out.sequence.entity_ids[v]);
  }
  return out;
}

template <typename T>
Var Model<T>::logits(Tape<T>& tape, const PreparedInput& input) const {
  encoded_sequences_.fetch_add(1);
  const Var hidden = encoder_.forward(tape, input.tokens.ids);
  const PooledVars pooled = encoder_.pool(tape, hidden, input.tokens, input.sequence);
  const Var q = representation_.label_reps(tape, pooled.labels);
  const Var e = representation_.entity_reps(tape, pooled.words, input.sequence.text_spans());
  const Var kappa = representation_.pair_reps(tape, e, input.local_pairs);
  const auto [kappa_final, q_final] = refiner_.forward(tape, kappa, q);
  return tape.matmul_nt(kappa_final, q_final);
}

template <typename T>
std::vector<Var> Model<T>::forward_batch(std::span<Tape<T>* const> tapes,
                                         std::span<const PreparedInput> inputs) const {
  if (tapes.size() != inputs.size()) throw InvalidInput("forward_batch: tape count mismatch");
  forward_passes_.fetch_add(1);
  std::vector<Var> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) out.push_back(logits(*tapes[i], inputs[i]));
  return out;
}

template <typename T>
std::vector<PairScoreMatrix> Model<T>::score_batch(std::span<const PreparedInput> inputs) const {
  std::vector<std::unique_ptr<Tape<T>>> owned;
  std::vector<Tape<T>*> tapes;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    owned.push_back(std::make_unique<Tape<T>>(false));
    tapes.push_back(owned.back().get());
  }
  const auto vars = forward_batch(tapes, inputs);
  std::vector<PairScoreMatrix> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Matrix<double> z = tapes[i]->value(vars[i]).template cast<double>();
    out.push_back(scores_from_logits(z, inputs[i].pairs, inputs[i].sequence.labels));
  }
  return out;
}

SubwordVocab build_vocab(const std::vector<InputInstance>& data,
                         const std::vector<std::string>& extra_labels, const VocabOptions& options) {
  std::vector<std::vector<std::string>> texts;
  texts.reserve(data.size() + 1);
  for (const auto& instance : data) {
    texts.push_back(instance.tokens);
    std::vector<std::string> labels;
    for (const auto& r : instance.relations) labels.push_back(r.label);
    texts.push_back(std::move(labels));
  }
  texts.push_back(extra_labels);
  return SubwordVocab::build(texts, options);
}

template class Model<float>;
template class Model<double>;

}  // namespace glirel
