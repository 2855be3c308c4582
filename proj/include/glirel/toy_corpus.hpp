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
#include <string>
#include <vector>

#include "glirel/dataset.hpp"
#include "glirel/random.hpp"

namespace glirel {

// Parses one bracketed line, e.g.
//   "[Ada Lovelace] worked with [Charles Babbage] . | 0 1 worked with"
// Bracketed runs become entities in order of appearance; after the bar come
// `head tail label` triples separated by ';'.
InputInstance parse_bracketed(const std::string& line);

// 32 fixed sentences with hand-labelled relations.
std::vector<InputInstance> overfit_suite();

// Relation names of the templated corpus: every verb/preposition
// combination, e.g. "works at". Sorted.
std::vector<std::string> toy_relation_labels();

struct ToyCorpusOptions {
  int num_instances = 600;
  std::uint64_t seed = 7;
  // Probability of a second relation in the same sentence.
  double second_relation = 0.25;
  // Probability of a bystander entity that takes part in no relation.
  double distractor = 0.5;
};

// Sentences built from shared templates in which the relation name appears
// verbatim between head and tail, so that types differ only in which words
// fill the slots.
std::vector<InputInstance> make_toy_corpus(const ToyCorpusOptions& options = {});

// A random multi-sentence document with coreference clusters: each cluster
// is mentioned one or more times and relations hold between clusters.
InputInstance random_toy_document(Rng& rng, int num_sentences);

}  // namespace glirel
