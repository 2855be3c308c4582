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

#include "glirel/tokenizer.hpp"

#include <algorithm>
#include <map>

#include "glirel/error.hpp"

namespace glirel {
namespace {

// Byte length of the UTF-8 sequence starting with `lead`.
std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

std::vector<std::string_view> split_codepoints(std::string_view word) {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < word.size();) {
    const std::size_t n = std::min(utf8_length(static_cast<unsigned char>(word[i])), word.size() - i);
    out.push_back(word.substr(i, n));
    i += n;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string fold(std::string_view s, bool lowercase) {
  std::string out(s);
  if (lowercase) {
    for (auto& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
  }
  return out;
}

}  // namespace

SubwordVocab::SubwordVocab() {
  add("[UNK]");
  add(kRelToken);
  add(kSepToken);
}

void SubwordVocab::add(const std::string& piece) {
  if (index_.contains(piece)) return;
  index_.emplace(piece, static_cast<int>(pieces_.size()));
  pieces_.push_back(piece);
  max_piece_bytes_ = std::max(max_piece_bytes_, piece.size());
}

SubwordVocab SubwordVocab::build(const std::vector<std::vector<std::string>>& texts,
                                 const VocabOptions& options) {
  SubwordVocab vocab;
  vocab.lowercase_ = options.lowercase;

  std::map<std::string, long> counts;
  for (const auto& text : texts) {
    for (const auto& element : text) {
      for (auto word : split_whitespace(element)) {
        if (word == kRelToken || word == kSepToken) continue;
        ++counts[fold(word, options.lowercase)];
      }
    }
  }

  std::map<std::string, long> chars;
  for (const auto& [word, n] : counts) {
    for (auto cp : split_codepoints(word)) chars[std::string(cp)] += n;
  }
  for (const auto& [c, n] : chars) {
    vocab.add(c);
    vocab.add("##" + c);
  }

  std::vector<std::pair<std::string, long>> words(counts.begin(), counts.end());
  std::stable_sort(words.begin(), words.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [word, n] : words) {
    if (vocab.size() >= options.max_size) break;
    if (n < options.min_frequency) break;
    vocab.add(word);
  }
  return vocab;
}

SubwordVocab SubwordVocab::from_pieces(const std::vector<std::string>& pieces, bool lowercase) {
  SubwordVocab vocab;
  vocab.lowercase_ = lowercase;
  for (const auto& p : pieces) vocab.add(p);
  return vocab;
}

int SubwordVocab::id(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  return it == index_.end() ? -1 : it->second;
}

std::string SubwordVocab::scheme() const {
  return std::string(kSchemeName) + (lowercase_ ? "-uncased" : "-cased");
}

std::vector<int> SubwordVocab::tokenize_word(std::string_view raw) const {
  if (raw == kRelToken) return {kRel};
  if (raw == kSepToken) return {kSep};
  const std::string word = fold(raw, lowercase_);
  const auto cps = split_codepoints(word);

  std::vector<int> out;
  std::size_t i = 0;  // codepoint cursor
  std::string candidate;
  while (i < cps.size()) {
    int best_id = -1;
    std::size_t best_end = i;
    candidate = (i == 0) ? "" : "##";
    for (std::size_t j = i; j < cps.size(); ++j) {
      candidate.append(cps[j]);
      if (candidate.size() > max_piece_bytes_) break;
      if (auto it = index_.find(candidate); it != index_.end()) {
        best_id = it->second;
        best_end = j + 1;
      }
    }
    if (best_id < 0) {
      out.push_back(kUnk);
      ++i;
    } else {
      out.push_back(best_id);
      i = best_end;
    }
  }
  return out;
}

std::vector<int> SubwordVocab::tokenize_element(std::string_view element) const {
  std::vector<int> out;
  for (auto word : split_whitespace(element)) {
    auto pieces = tokenize_word(word);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  if (out.empty()) out.push_back(kUnk);
  return out;
}

nlohmann::json SubwordVocab::to_json() const {
  return {{"scheme", scheme()}, {"lowercase", lowercase_}, {"pieces", pieces_}};
}

SubwordVocab SubwordVocab::from_json(const nlohmann::json& j) {
  const bool lower = j.at("lowercase").get<bool>();
  SubwordVocab vocab = from_pieces(j.at("pieces").get<std::vector<std::string>>(), lower);
  if (j.contains("scheme") && j["scheme"].get<std::string>() != vocab.scheme()) {
    throw InvalidInput("unsupported subword scheme " + j["scheme"].get<std::string>());
  }
  return vocab;
}

TokenizedSequence tokenize_elements(const AssembledSequence& seq, const SubwordVocab& vocab) {
  TokenizedSequence out;
  out.first_subword.reserve(seq.elements.size());
  for (const auto& element : seq.elements) {
    out.first_subword.push_back(static_cast<int>(out.ids.size()));
    auto pieces = vocab.tokenize_element(element);
    out.ids.insert(out.ids.end(), pieces.begin(), pieces.end());
  }
  return out;
}

int elements_within_subword_budget(const AssembledSequence& seq, const SubwordVocab& vocab,
                                   int max_subwords) {
  int total = 0;
  for (std::size_t e = 0; e < seq.elements.size(); ++e) {
    total += static_cast<int>(vocab.tokenize_element(seq.elements[e]).size());
    if (total > max_subwords) return static_cast<int>(e);
  }
  return static_cast<int>(seq.elements.size());
}

}  // namespace glirel
