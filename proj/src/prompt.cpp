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

#include "glirel/prompt.hpp"

#include <algorithm>

#include "glirel/error.hpp"

namespace glirel {

std::vector<EntitySpan> AssembledSequence::text_spans() const {
  std::vector<EntitySpan> out;
  out.reserve(entity_element_spans.size());
  for (const auto& s : entity_element_spans) out.push_back({s.start - text_offset, s.end - text_offset});
  return out;
}

AssembledSequence assemble(const std::vector<std::string>& labels, const InputInstance& instance) {
  if (labels.empty()) throw InvalidInput("assemble: label list is empty");
  validate(instance);

  const int m = static_cast<int>(labels.size());
  AssembledSequence seq;
  seq.labels = labels;
  seq.elements.reserve(prompt_length(m) + instance.tokens.size());
  for (int t = 0; t < m; ++t) {
    if (t > 0) seq.elements.emplace_back(kRelToken);
    seq.label_element_indices.push_back(static_cast<int>(seq.elements.size()));
    seq.elements.push_back(labels[t]);
  }
  seq.elements.emplace_back(kSepToken);
  seq.text_offset = static_cast<int>(seq.elements.size());
  seq.elements.insert(seq.elements.end(), instance.tokens.begin(), instance.tokens.end());

  for (std::size_t k = 0; k < instance.entities.size(); ++k) {
    const auto& span = instance.entities[k];
    seq.entity_element_spans.push_back({span.start + seq.text_offset, span.end + seq.text_offset});
    seq.entity_ids.push_back(static_cast<int>(k));
  }
  return seq;
}

void check(const LabelPolicy& policy) {
  if (policy.max_labels < 1) throw ConfigError("label policy: max_labels must be >= 1");
  if (!(policy.drop_probability >= 0.0 && policy.drop_probability < 1.0)) {
    throw ConfigError("label policy: drop_probability must lie in [0, 1)");
  }
}

std::vector<std::string> select_negatives(const std::set<std::string>& gold,
                                          const LabelPolicy& policy, std::size_t budget, Rng& rng) {
  std::vector<std::string> candidates;
  std::set<std::string> seen;
  for (const auto& label : policy.negative_pool) {
    if (!gold.contains(label) && seen.insert(label).second) candidates.push_back(label);
  }
  return sample_ordered(candidates, budget, rng);
}

std::vector<std::string> drop_negatives(std::vector<std::string> negatives, double drop_probability,
                                        Rng& rng) {
  if (drop_probability <= 0.0) return negatives;
  std::vector<std::string> kept;
  for (auto& label : negatives) {
    if (!bernoulli(rng, drop_probability)) kept.push_back(std::move(label));
  }
  return kept;
}

std::vector<std::string> regularize_labels(const std::set<std::string>& gold_labels,
                                           const LabelPolicy& policy, Rng& rng) {
  check(policy);
  const auto cap = static_cast<std::size_t>(policy.max_labels);

  std::vector<std::string> out(gold_labels.begin(), gold_labels.end());
  if (out.size() > cap) out = sample_ordered(out, cap, rng);
  const std::set<std::string> kept_gold(out.begin(), out.end());

  auto negatives = select_negatives(gold_labels, policy, cap - out.size(), rng);
  auto survivors = drop_negatives(negatives, policy.drop_probability, rng);
  // An instance without gold labels still needs one candidate to be scored.
  if (out.empty() && survivors.empty() && !negatives.empty()) survivors.push_back(negatives.front());
  out.insert(out.end(), survivors.begin(), survivors.end());

  if (policy.shuffle) shuffle(out, rng);
  return out;
}

TruncationResult truncate(const AssembledSequence& seq, int max_elements) {
  const int prompt = seq.text_offset;
  if (max_elements <= prompt) {
    throw ConfigError("truncate: " + std::to_string(seq.num_labels()) + " labels need " +
                      std::to_string(prompt) + " prompt elements plus text, but the budget is " +
                      std::to_string(max_elements));
  }
  TruncationResult result{seq, {}};
  if (static_cast<int>(seq.elements.size()) <= max_elements) return result;

  auto& out = result.sequence;
  out.elements.resize(max_elements);
  out.entity_element_spans.clear();
  out.entity_ids.clear();
  for (std::size_t k = 0; k < seq.entity_element_spans.size(); ++k) {
    if (seq.entity_element_spans[k].end < max_elements) {
      out.entity_element_spans.push_back(seq.entity_element_spans[k]);
      out.entity_ids.push_back(seq.entity_ids[k]);
    } else {
      result.dropped_entities.push_back(seq.entity_ids[k]);
    }
  }
  return result;
}

}  // namespace glirel
