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

#include <map>

#include "glirel/error.hpp"
#include "glirel/prompt.hpp"
#include "support/fixtures.hpp"

using namespace glirel;

namespace {

InputInstance apple() {
  InputInstance x;
  x.tokens = {"Apple", "was", "founded", "by", "Steve", "Jobs"};
  x.entities = {{0, 0}, {4, 5}};
  x.relations = {{0, 1, "founded by"}};
  return x;
}

InputInstance words(int n) {
  InputInstance x;
  for (int i = 0; i < n; ++i) x.tokens.push_back("w" + std::to_string(i));
  return x;
}

std::vector<std::string> numbered_labels(int m) {
  std::vector<std::string> out;
  for (int i = 0; i < m; ++i) out.push_back("label " + std::to_string(i));
  return out;
}

}  // namespace

TEST_CASE("assemble lays out labels, separators and text") {
  const auto seq = assemble({"founded by", "located in"}, apple());
  CHECK(seq.elements == std::vector<std::string>{"founded by", "[REL]", "located in", "[SEP]", "Apple", "was",
                                                 "founded", "by", "Steve", "Jobs"});
  CHECK(seq.text_offset == 4);
  CHECK(seq.label_element_indices == std::vector<int>{0, 2});
  CHECK(seq.entity_element_spans == std::vector<EntitySpan>{{4, 4}, {8, 9}});
  CHECK(seq.text_spans() == apple().entities);
}

TEST_CASE("a single label has no separator") {
  InputInstance x;
  x.tokens = {"a"};
  const auto seq = assemble({"r"}, x);
  CHECK(seq.elements == std::vector<std::string>{"r", "[SEP]", "a"});
  CHECK(seq.text_offset == 2);
}

TEST_CASE("element count is twice the labels plus the text") {
  CHECK(assemble(numbered_labels(25), words(100)).elements.size() == 150);
  for (int m = 1; m <= 7; ++m) {
    for (int n = 0; n <= 5; ++n) {
      const auto seq = assemble(numbered_labels(m), words(n));
      CHECK(static_cast<int>(seq.elements.size()) == prompt_length(m) + n);
      CHECK(seq.text_offset == prompt_length(m));
      for (int t = 0; t < m; ++t) CHECK(seq.label_element_indices[t] == 2 * t);
    }
  }
}

TEST_CASE("assemble round-trips entity starts and rejects bad input") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = testing::random_instance(rng, 12, 4, {"a", "b"}, 2);
    const auto seq = assemble({"a", "b", "c"}, x);
    for (int k = 0; k < seq.num_entities(); ++k) {
      CHECK(seq.elements[seq.entity_element_spans[k].start] == x.tokens[x.entities[k].start]);
    }
    CHECK(assemble({"a", "b", "c"}, x) == seq);
  }
  CHECK_THROWS_AS(assemble({}, apple()), InvalidInput);
  auto bad = apple();
  bad.entities.push_back({5, 6});
  CHECK_THROWS_AS(assemble({"r"}, bad), InvalidInput);
}

TEST_CASE("regularize_labels fills deterministically without dropping") {
  Rng rng(1);
  LabelPolicy policy{3, 0.0, false, {"n1", "n2"}};
  CHECK(regularize_labels({"p1"}, policy, rng) == std::vector<std::string>{"p1", "n1", "n2"});

  LabelPolicy capped{2, 0.0, true, {"n1", "n2", "n3"}};
  for (int i = 0; i < 20; ++i) {
    auto out = regularize_labels({"p1", "p2"}, capped, rng);
    std::sort(out.begin(), out.end());
    CHECK(out == std::vector<std::string>{"p1", "p2"});
  }
}

TEST_CASE("regularize_labels keeps gold, stays within the cap and pads with what exists") {
  Rng rng(5);
  LabelPolicy policy{6, 0.5, true, {"a", "b", "c", "g1"}};
  for (int i = 0; i < 200; ++i) {
    const auto out = regularize_labels({"g1", "g2"}, policy, rng);
    CHECK(out.size() <= 6);
    CHECK(std::count(out.begin(), out.end(), "g1") == 1);
    CHECK(std::count(out.begin(), out.end(), "g2") == 1);
    CHECK(std::set<std::string>(out.begin(), out.end()).size() == out.size());
  }
}

TEST_CASE("each negative survives dropping at the configured rate") {
  Rng rng(2024);
  LabelPolicy policy{5, 0.5, true, {"n1", "n2", "n3", "n4"}};
  std::map<std::string, int> survived;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    for (const auto& l : regularize_labels({"p"}, policy, rng)) ++survived[l];
  }
  CHECK(survived["p"] == trials);
  for (const auto* n : {"n1", "n2", "n3", "n4"}) {
    const double rate = static_cast<double>(survived[n]) / trials;
    CHECK(rate >= 0.47);
    CHECK(rate <= 0.53);
  }
}

TEST_CASE("regularize_labels reproduces under a fixed seed") {
  LabelPolicy policy{4, 0.3, true, {"a", "b", "c", "d", "e"}};
  Rng r1(9), r2(9);
  for (int i = 0; i < 20; ++i) CHECK(regularize_labels({"g"}, policy, r1) == regularize_labels({"g"}, policy, r2));
  CHECK_THROWS_AS(regularize_labels({"g"}, LabelPolicy{0, 0.0, true, {}}, r1), ConfigError);
  CHECK_THROWS_AS(regularize_labels({"g"}, LabelPolicy{3, 1.0, true, {}}, r1), ConfigError);
}

TEST_CASE("truncate is a no-op at the boundary") {
  const auto seq = assemble(numbered_labels(25), words(101));
  REQUIRE(seq.elements.size() == 151);
  const auto result = truncate(seq, 151);
  CHECK(result.sequence == seq);
  CHECK(result.dropped_entities.empty());
}

TEST_CASE("truncate drops entities that cross the cut") {
  auto x = words(103);
  x.entities = {{0, 1}, {100, 102}};
  const auto seq = assemble(numbered_labels(25), x);
  REQUIRE(seq.entity_element_spans[1] == EntitySpan{150, 152});
  const auto result = truncate(seq, 151);
  CHECK(result.sequence.elements.size() == 151);
  CHECK(result.dropped_entities == std::vector<int>{1});
  CHECK(result.sequence.entity_ids == std::vector<int>{0});
}

TEST_CASE("truncate keeps the whole prompt and cuts text from the right") {
  const auto seq = assemble({"a", "b"}, words(600));
  const auto result = truncate(seq, 512);
  CHECK(result.sequence.num_text() == 508);
  CHECK(result.sequence.elements.back() == "w507");
  CHECK_THROWS_AS(truncate(seq, 4), ConfigError);
  CHECK_NOTHROW(truncate(seq, 5));
}
