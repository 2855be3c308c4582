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

#include "glirel/toy_corpus.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "glirel/error.hpp"

namespace glirel {

InputInstance parse_bracketed(const std::string& line) {
  const auto bar = line.find('|');
  const std::string text = line.substr(0, bar);
  InputInstance out;
  std::istringstream words(text);
  std::string w;
  int open = -1;
  while (words >> w) {
    bool starts = false, ends = false;
    if (w.front() == '[') {
      starts = true;
      w.erase(0, 1);
    }
    if (!w.empty() && w.back() == ']') {
      ends = true;
      w.pop_back();
    }
    if (w.empty()) throw InvalidInput("bracketed line: empty token in \"" + line + "\"");
    const int pos = static_cast<int>(out.tokens.size());
    out.tokens.push_back(w);
    if (starts) {
      if (open >= 0) throw InvalidInput("bracketed line: nested entity in \"" + line + "\"");
      open = pos;
    }
    if (ends) {
      if (open < 0) throw InvalidInput("bracketed line: unmatched ']' in \"" + line + "\"");
      out.entities.push_back({open, pos});
      open = -1;
    }
  }
  if (open >= 0) throw InvalidInput("bracketed line: unclosed '[' in \"" + line + "\"");
  if (bar != std::string::npos) {
    std::istringstream rels(line.substr(bar + 1));
    std::string item;
    while (std::getline(rels, item, ';')) {
      std::istringstream fields(item);
      RelationTriple r;
      if (!(fields >> r.head >> r.tail)) continue;
      std::string word;
      while (fields >> word) r.label += (r.label.empty() ? "" : " ") + word;
      out.relations.push_back(std::move(r));
    }
  }
  validate(out);
  return out;
}

std::vector<InputInstance> overfit_suite() {
  static const char* const kLines[] = {
      "[Steve Jobs] founded [Apple] in [Cupertino] . | 1 0 founded by; 1 2 located in",
      "[Marie Curie] was born in [Warsaw] . | 0 1 born in",
      "[Alan Turing] studied at [Cambridge] . | 0 1 educated at",
      "[Paris] is the capital of [France] . | 0 1 capital of",
      "[Ada Lovelace] worked with [Charles Babbage] in [London] . | 0 1 colleague of; 1 0 colleague of",
      "[Microsoft] was founded by [Bill Gates] . | 0 1 founded by",
      "[The Louvre] is located in [Paris] . | 0 1 located in",
      "[Albert Einstein] was born in [Ulm] and studied at [ETH Zurich] . | 0 1 born in; 0 2 educated at",
      "[Berlin] is the capital of [Germany] . | 0 1 capital of",
      "[Tim Cook] works for [Apple] . | 0 1 employee of",
      "[Frida Kahlo] married [Diego Rivera] . | 0 1 spouse of; 1 0 spouse of",
      "[Amazon] was founded by [Jeff Bezos] in [Seattle] . | 0 1 founded by; 0 2 located in",
      "[Nikola Tesla] worked for [Thomas Edison] . | 0 1 employee of",
      "[Rome] is the capital of [Italy] . | 0 1 capital of",
      "[Isaac Newton] studied at [Trinity College] . | 0 1 educated at",
      "[Mozart] was born in [Salzburg] . | 0 1 born in",
      "[Google] is located in [Mountain View] . | 0 1 located in",
      "[Larry Page] and [Sergey Brin] founded [Google] . | 2 0 founded by; 2 1 founded by",
      "[Pierre Curie] married [Marie Curie] . | 0 1 spouse of; 1 0 spouse of",
      "[Madrid] is the capital of [Spain] . | 0 1 capital of",
      "[Rosalind Franklin] worked at [King's College] . | 0 1 employee of",
      "[Frederic Chopin] was born in [Zelazowa Wola] . | 0 1 born in",
      "[Grace Hopper] studied at [Yale] . | 0 1 educated at",
      "[The Colosseum] stands in [Rome] . | 0 1 located in",
      "[Tesla] was founded by [Martin Eberhard] . | 0 1 founded by",
      "[Lisbon] is the capital of [Portugal] . | 0 1 capital of",
      "[Richard Feynman] worked with [Freeman Dyson] . | 0 1 colleague of; 1 0 colleague of",
      "[Barack Obama] married [Michelle Obama] in [Chicago] . | 0 1 spouse of; 1 0 spouse of",
      "[Johannes Kepler] was born in [Weil der Stadt] . | 0 1 born in",
      "[Sheryl Sandberg] works for [Meta] in [Menlo Park] . | 0 1 employee of; 1 2 located in",
      "[Vienna] is the capital of [Austria] . | 0 1 capital of",
      "[Katherine Johnson] studied at [West Virginia State] . | 0 1 educated at",
  };
  std::vector<InputInstance> out;
  int i = 0;
  for (const char* line : kLines) {
    out.push_back(parse_bracketed(line));
    out.back().doc_id = "overfit-" + std::to_string(i++);
  }
  return out;
}

namespace {

constexpr std::array<const char*, 4> kVerbs = {"lives", "works", "studies", "teaches"};
constexpr std::array<const char*, 3> kPreps = {"at", "in", "near"};

constexpr std::array<const char*, 24> kPeople = {
    "Ana",   "Boris", "Chen",  "Dalia", "Emil",  "Farah", "Goran", "Hana",
    "Ivo",   "Jana",  "Kofi",  "Lena",  "Mato",  "Nia",   "Oskar", "Pia",
    "Quinn", "Rafa",  "Sena",  "Tomas", "Uma",   "Vera",  "Wim",   "Yara"};
constexpr std::array<const char*, 16> kPlaces = {
    "Avlona", "Brenn",   "Corvale", "Dunmore", "Elsby", "Fenwick", "Galt",   "Harrow",
    "Istra",  "Jorvik",  "Kelso",   "Lindau",  "Marlow", "Norden", "Orvieto", "Pella"};
constexpr std::array<const char*, 4> kPlaceHeads = {"the", "old", "north", "lower"};

template <std::size_t N>
const char* pick(const std::array<const char*, N>& items, Rng& rng) {
  return items[uniform_index(rng, N)];
}

// Appends words and, for an entity, records its span.
struct Builder {
  InputInstance instance;

  void words(std::initializer_list<const char*> ws) {
    for (const char* w : ws) instance.tokens.emplace_back(w);
  }
  void word(const std::string& w) { instance.tokens.push_back(w); }

  int entity(const std::vector<std::string>& ws) {
    const int start = static_cast<int>(instance.tokens.size());
    for (const auto& w : ws) instance.tokens.push_back(w);
    instance.entities.push_back({start, static_cast<int>(instance.tokens.size()) - 1});
    return static_cast<int>(instance.entities.size()) - 1;
  }

  void relation_words(int label) {
    word(kVerbs[label / kPreps.size()]);
    word(kPreps[label % kPreps.size()]);
  }
};

std::vector<std::string> person(Rng& rng) { return {pick(kPeople, rng)}; }

std::vector<std::string> place(Rng& rng) {
  if (bernoulli(rng, 0.3)) return {pick(kPlaceHeads, rng), pick(kPlaces, rng)};
  return {pick(kPlaces, rng)};
}

std::string label_name(int label) {
  return std::string(kVerbs[label / kPreps.size()]) + " " + kPreps[label % kPreps.size()];
}

}  // namespace

std::vector<std::string> toy_relation_labels() {
  std::vector<std::string> out;
  for (int l = 0; l < static_cast<int>(kVerbs.size() * kPreps.size()); ++l) out.push_back(label_name(l));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<InputInstance> make_toy_corpus(const ToyCorpusOptions& options) {
  if (options.num_instances < 0) throw InvalidInput("num_instances must be >= 0");
  Rng rng(options.seed);
  const int num_labels = static_cast<int>(kVerbs.size() * kPreps.size());
  std::vector<InputInstance> out;
  out.reserve(options.num_instances);
  for (int i = 0; i < options.num_instances; ++i) {
    Builder b;
    const int label = static_cast<int>(uniform_index(rng, num_labels));
    const int layout = static_cast<int>(uniform_index(rng, 4));
    const bool bystander = bernoulli(rng, options.distractor);
    int distractor = -1;

    if (layout == 1) b.words({"we", "heard", "that"});
    if (layout == 2 && bystander) {
      distractor = b.entity(person(rng));
      b.words({"says", "that"});
    }
    const int head = b.entity(person(rng));
    b.relation_words(label);
    const int tail = b.entity(place(rng));
    b.instance.relations.push_back({head, tail, label_name(label)});

    if (bernoulli(rng, options.second_relation)) {
      int other = static_cast<int>(uniform_index(rng, num_labels - 1));
      if (other >= label) ++other;
      b.words({",", "and"});
      const int h2 = b.entity(person(rng));
      b.relation_words(other);
      const int t2 = b.entity(place(rng));
      b.instance.relations.push_back({h2, t2, label_name(other)});
    }
    if (layout == 3) b.words({"these", "days"});
    if (bystander && distractor < 0) {
      b.words({",", "according", "to"});
      b.entity(person(rng));
    }
    b.word(".");
    b.instance.doc_id = "toy-" + std::to_string(i);
    validate(b.instance);
    out.push_back(std::move(b.instance));
  }
  return out;
}

InputInstance random_toy_document(Rng& rng, int num_sentences) {
  if (num_sentences < 1) throw InvalidInput("num_sentences must be >= 1");
  const int num_people = 1 + static_cast<int>(uniform_index(rng, 4));
  const int num_places = 1 + static_cast<int>(uniform_index(rng, 3));
  std::vector<std::vector<std::string>> names;
  for (int p = 0; p < num_people; ++p) names.push_back(person(rng));
  for (int p = 0; p < num_places; ++p) names.push_back(place(rng));
  const int num_labels = static_cast<int>(kVerbs.size() * kPreps.size());

  Builder b;
  std::vector<std::vector<int>> mentions(names.size());
  for (int s = 0; s < num_sentences; ++s) {
    const int who = static_cast<int>(uniform_index(rng, num_people));
    const int where = num_people + static_cast<int>(uniform_index(rng, num_places));
    const int label = static_cast<int>(uniform_index(rng, num_labels));
    if (bernoulli(rng, 0.5)) b.words({"later", ","});
    const int h = b.entity(names[who]);
    mentions[who].push_back(h);
    b.relation_words(label);
    const int t = b.entity(names[where]);
    mentions[where].push_back(t);
    b.instance.relations.push_back({h, t, label_name(label)});
    b.word(".");
  }
  std::vector<std::vector<int>> clusters;
  for (auto& m : mentions) {
    if (!m.empty()) clusters.push_back(std::move(m));
  }
  b.instance.clusters = std::move(clusters);
  b.instance.doc_id = "toydoc";
  validate(b.instance);
  return b.instance;
}

}  // namespace glirel
