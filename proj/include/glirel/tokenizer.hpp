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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "glirel/prompt.hpp"

namespace glirel {

struct VocabOptions {
  int max_size = 8000;
  int min_frequency = 1;
  bool lowercase = true;
};

// Greedy longest-match subword vocabulary. Word-initial pieces are stored
// bare, continuation pieces carry a "##" prefix. [REL] and [SEP] are atomic.
class SubwordVocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kRel = 1;
  static constexpr int kSep = 2;
  static constexpr std::string_view kSchemeName = "wordpiece-freq-v1";

  SubwordVocab();

  // Builds a vocabulary from whitespace-separated words: every character as
  // an initial and a continuation piece, then whole words by frequency.
  static SubwordVocab build(const std::vector<std::vector<std::string>>& texts,
                            const VocabOptions& options = {});
  // Specials are prepended when missing.
  static SubwordVocab from_pieces(const std::vector<std::string>& pieces, bool lowercase);

  int size() const { return static_cast<int>(pieces_.size()); }
  bool lowercase() const { return lowercase_; }
  const std::vector<std::string>& pieces() const { return pieces_; }
  // Returns -1 when the piece is absent.
  int id(std::string_view piece) const;
  const std::string& piece(int id) const { return pieces_.at(id); }
  // Scheme identifier stored with checkpoints.
  std::string scheme() const;

  std::vector<int> tokenize_word(std::string_view word) const;
  // Whitespace-splits the element and concatenates word pieces. Never empty.
  std::vector<int> tokenize_element(std::string_view element) const;

  nlohmann::json to_json() const;
  static SubwordVocab from_json(const nlohmann::json& j);

 private:
  void add(const std::string& piece);

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
  bool lowercase_ = true;
  std::size_t max_piece_bytes_ = 0;
};

struct TokenizedSequence {
  std::vector<int> ids;
  // Position in `ids` of the first piece of each element.
  std::vector<int> first_subword;
};

TokenizedSequence tokenize_elements(const AssembledSequence& seq, const SubwordVocab& vocab);

// Element budget such that the first `result` elements of `seq` tokenize
// to at most max_subwords pieces.
int elements_within_subword_budget(const AssembledSequence& seq, const SubwordVocab& vocab,
                                   int max_subwords);

}  // namespace glirel
