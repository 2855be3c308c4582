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

#include <doctest.h>

#include "glirel/tokenizer.hpp"

using namespace glirel;

namespace {

SubwordVocab participation_vocab() {
  return SubwordVocab::from_pieces({"particip", "##ation", "in", "a", "##a", "p", "##t"}, true);
}

}  // namespace

TEST_CASE("special tokens are single pieces") {
  const auto vocab = participation_vocab();
  CHECK(vocab.tokenize_element("[REL]") == std::vector<int>{SubwordVocab::kRel});
  CHECK(vocab.tokenize_element("[SEP]") == std::vector<int>{SubwordVocab::kSep});
  CHECK(vocab.piece(SubwordVocab::kUnk) == "[UNK]");
}

TEST_CASE("a multi-piece label pools at its first piece") {
  const auto vocab = participation_vocab();
  const auto ids = vocab.tokenize_element("participation in");
  REQUIRE(ids.size() == 3);
  CHECK(vocab.piece(ids[0]) == "particip");
  CHECK(vocab.piece(ids[1]) == "##ation");
  CHECK(vocab.piece(ids[2]) == "in");

  AssembledSequence seq;
  seq.elements = {"a", "[REL]", "participation in", "[SEP]", "a"};
  seq.labels = {"a", "participation in"};
  seq.label_element_indices = {0, 2};
  seq.text_offset = 4;
  const auto tok = tokenize_elements(seq, vocab);
  CHECK(tok.first_subword == std::vector<int>{0, 1, 2, 5, 6});
  CHECK(vocab.piece(tok.ids[tok.first_subword[2]]) == "particip");
  CHECK(tok.ids.size() == 7);
}

TEST_CASE("single-character element is one piece") {
  const auto vocab = participation_vocab();
  CHECK(vocab.tokenize_element("a").size() == 1);
  CHECK(vocab.tokenize_element("A") == vocab.tokenize_element("a"));
}

TEST_CASE("unknown characters map to the unknown piece and elements are never empty") {
  const auto vocab = participation_vocab();
  CHECK(vocab.tokenize_element("z") == std::vector<int>{SubwordVocab::kUnk});
  CHECK(vocab.tokenize_element("") == std::vector<int>{SubwordVocab::kUnk});
}

TEST_CASE("built vocabularies cover every training word") {
  const std::vector<std::vector<std::string>> texts = {{"Steve", "Jobs", "founded", "Apple"},
                                                       {"located in", "Cupertino", "Zürich"}};
  const auto vocab = SubwordVocab::build(texts);
  for (const auto* w : {"steve", "jobs", "founded", "apple", "located", "in", "cupertino"}) {
    CHECK(vocab.tokenize_word(w) == std::vector<int>{vocab.id(w)});
  }
  for (const auto* w : {"Zürich", "foundedapple", "unseen"}) {
    for (const int id : vocab.tokenize_word(w)) CHECK(id != SubwordVocab::kUnk);
  }
}

TEST_CASE("vocabulary size limit and JSON round trip") {
  const std::vector<std::vector<std::string>> texts = {{"alpha", "beta", "gamma", "alpha"}};
  VocabOptions small;
  small.max_size = 5;
  CHECK(SubwordVocab::build(texts, small).size() >= 3);
  const auto vocab = SubwordVocab::build(texts);
  const auto back = SubwordVocab::from_json(vocab.to_json());
  CHECK(back.pieces() == vocab.pieces());
  CHECK(back.scheme() == vocab.scheme());
  auto j = vocab.to_json();
  j["scheme"] = "other";
  CHECK_THROWS(SubwordVocab::from_json(j));
}

TEST_CASE("subword budget counts whole elements") {
  const auto vocab = participation_vocab();
  AssembledSequence seq;
  seq.elements = {"participation in", "[SEP]", "a", "a"};
  CHECK(elements_within_subword_budget(seq, vocab, 2) == 0);
  CHECK(elements_within_subword_budget(seq, vocab, 3) == 1);
  CHECK(elements_within_subword_budget(seq, vocab, 5) == 3);
  CHECK(elements_within_subword_budget(seq, vocab, 100) == 4);
}
