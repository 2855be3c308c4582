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

#include <set>
#include <string>
#include <vector>

#include "glirel/dataset.hpp"
#include "glirel/random.hpp"

namespace glirel {

inline constexpr const char* kRelToken = "[REL]";
inline constexpr const char* kSepToken = "[SEP]";

// Joint label + text input. Layout:
//   t_0 [REL] t_1 [REL] ... t_{M-1} [SEP] x_0 ... x_{N-1}
// so label t sits at element 2t and the text starts at element 2M.
struct AssembledSequence {
  std::vector<std::string> elements;
  std::vector<int> label_element_indices;
  int text_offset = 0;
  // Entity spans in element coordinates, one per retained entity.
  std::vector<EntitySpan> entity_element_spans;
  // Original instance index of each retained entity.
  std::vector<int> entity_ids;
  std::vector<std::string> labels;

  int num_labels() const { return static_cast<int>(labels.size()); }
  int num_text() const { return static_cast<int>(elements.size()) - text_offset; }
  int num_entities() const { return static_cast<int>(entity_element_spans.size()); }

  // Entity spans in text-token coordinates.
  std::vector<EntitySpan> text_spans() const;

  friend bool operator==(const AssembledSequence&, const AssembledSequence&) = default;
};

// Number of prompt elements preceding the text for M labels.
constexpr int prompt_length(int num_labels) { return 2 * num_labels; }

AssembledSequence assemble(const std::vector<std::string>& labels, const InputInstance& instance);

struct LabelPolicy {
  int max_labels = 25;
  double drop_probability = 0.0;
  bool shuffle = true;
  // Candidate negatives, in a fixed order.
  std::vector<std::string> negative_pool;
};

void check(const LabelPolicy& policy);

// Stages of regularize_labels, exposed so that alternative pipelines can be
// composed from the same pieces.
std::vector<std::string> select_negatives(const std::set<std::string>& gold,
                                          const LabelPolicy& policy, std::size_t budget, Rng& rng);
std::vector<std::string> drop_negatives(std::vector<std::string> negatives, double drop_probability,
                                        Rng& rng);

// Gold labels (capped at max_labels) followed by sampled negatives, with each
// negative independently dropped and the result optionally shuffled. Gold
// labels are never dropped.
std::vector<std::string> regularize_labels(const std::set<std::string>& gold_labels,
                                           const LabelPolicy& policy, Rng& rng);

struct TruncationResult {
  AssembledSequence sequence;
  // Original indices of entities that crossed the cut.
  std::vector<int> dropped_entities;
};

// Cuts text from the right so that at most max_elements remain. The label
// prompt is always kept whole; throws ConfigError when it does not fit with
// at least one text element.
TruncationResult truncate(const AssembledSequence& seq, int max_elements);

}  // namespace glirel
