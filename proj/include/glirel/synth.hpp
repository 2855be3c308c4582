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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "glirel/dataset.hpp"
#include "glirel/representation.hpp"

namespace glirel {

inline constexpr const char* kNoRelation = "NO RELATION";
inline constexpr const char* kApiKeyEnv = "GLIREL_API_KEY";

// Splits on whitespace and detaches trailing , . ; : ! ? and quotes.
std::vector<std::string> simple_tokenize(const std::string& text);

// Supplies entity spans for raw text that arrives without them.
class EntityTagger {
 public:
  virtual ~EntityTagger() = default;
  virtual std::vector<EntitySpan> tag(const std::vector<std::string>& tokens) const = 0;
};

// Longest case-insensitive match against a phrase list; with
// `capitalized_runs`, maximal runs of capitalized tokens not covered by the
// dictionary are tagged as well (sentence-initial words excluded).
class DictionaryTagger : public EntityTagger {
 public:
  explicit DictionaryTagger(const std::vector<std::string>& phrases, bool capitalized_runs = true);
  std::vector<EntitySpan> tag(const std::vector<std::string>& tokens) const override;

 private:
  std::vector<std::vector<std::string>> phrases_;
  bool capitalized_runs_;
};

// One text of the raw corpus.
struct TextRecord {
  std::string doc_id;
  std::vector<std::string> tokens;
  std::vector<EntitySpan> entities;
};

// `{text, entities}` where entities are `[start, end]` token spans or
// mention strings (first occurrence); without entities the tagger, if any,
// supplies them. `tokens` may replace `text`.
TextRecord parse_text_record(const nlohmann::json& j, const EntityTagger* tagger, int line_number);
std::vector<TextRecord> read_text_corpus(const std::filesystem::path& path, const EntityTagger* tagger);

struct AnnotationJob {
  std::string endpoint = "http://localhost:8000/v1";
  std::string model = "default";
  double temperature = 0.0;
  int max_retries = 2;
  // Requests per second; 0 disables limiting.
  double rate_limit = 2.0;
  int burst = 1;
  int jobs = 4;
  std::chrono::milliseconds timeout{60000};

  void check() const;
};

void to_json(nlohmann::json& j, const AnnotationJob& job);
void from_json(const nlohmann::json& j, AnnotationJob& job);

// Deterministic annotation prompt: the text, the numbered entities, every
// ordered pair and the required JSON answer format. No label inventory is
// given.
std::string build_prompt(const std::vector<std::string>& tokens, const std::vector<EntitySpan>& entities,
                         const PairIndexSet& pairs);

// Chat-completion request body for a prompt.
nlohmann::json build_request(const AnnotationJob& job, const std::string& prompt);

struct PairVerdict {
  int head = 0;
  int tail = 0;
  std::string label;  // kNoRelation when no relation
  // True when the response said nothing about this pair.
  bool filled = false;
};

struct ParsedResponse {
  bool ok = false;
  std::string error;
  std::vector<PairVerdict> verdicts;  // one per pair, in pair order
  std::vector<std::string> warnings;
};

// Parses a chat-completion body whose message content is
// `{"relations": [{"head", "tail", "label"}]}`. A malformed body yields
// ok=false. Pairs the answer does not cover become NO RELATION and flagged.
ParsedResponse parse_response(const std::string& raw, const PairIndexSet& pairs);

struct ChatReply {
  int status = 0;
  std::string body;
  std::string error;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatReply send(const nlohmann::json& request, const std::string& prompt) = 0;
};

// POST {endpoint}/chat/completions with a bearer key.
class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(std::string endpoint, std::string api_key, std::chrono::milliseconds timeout);
  ChatReply send(const nlohmann::json& request, const std::string& prompt) override;

 private:
  std::string host_;
  std::string path_prefix_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

// Replays recorded bodies keyed by the prompt hash; successive attempts on
// one prompt receive successive recordings. File format:
//   {"responses": [{"prompt_hash": "<hex>", "bodies": ["...", ...]}]}
class ReplayChatClient : public ChatClient {
 public:
  explicit ReplayChatClient(const nlohmann::json& recordings);
  static std::unique_ptr<ReplayChatClient> from_file(const std::filesystem::path& path);
  ChatReply send(const nlohmann::json& request, const std::string& prompt) override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::vector<std::string>> bodies_;
  std::map<std::string, std::size_t> next_;
};

std::string prompt_hash(const std::string& prompt);

// Token bucket: `rate` tokens per second, at most `burst` stored.
class RateLimiter {
 public:
  RateLimiter(double rate, int burst);
  void acquire();

 private:
  std::mutex mutex_;
  double rate_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

struct AuditEntry {
  std::string doc_id;
  std::string prompt_hash;
  std::vector<std::string> raw_responses;
  std::string status;  // "ok", "failed" or "skipped"
  std::vector<std::string> warnings;
};

nlohmann::json audit_json(const AuditEntry& entry);

struct AnnotationStats {
  int texts = 0;
  int annotated = 0;
  int failed = 0;
  int pair_verdicts = 0;
  int no_relation = 0;
  int filled = 0;
};

struct AnnotationRun {
  std::vector<InputInstance> dataset;
  std::vector<AuditEntry> audit;
  AnnotationStats stats;
};

// Annotates every text with up to `job.jobs` requests in flight. Output
// order follows input order. Texts whose retries run out are skipped.
AnnotationRun annotate_corpus(const std::vector<TextRecord>& texts, ChatClient& client, const AnnotationJob& job);

std::string case_fold(const std::string& label);

// One label per line; blank lines and lines starting with '#' are skipped.
std::set<std::string> read_label_file(const std::filesystem::path& path);

// Removes triples whose case-folded label is a benchmark label. An instance
// survives if it keeps a triple or still has two entities to give negatives.
std::vector<InputInstance> filter_benchmark_labels(const std::vector<InputInstance>& dataset,
                                                   const std::set<std::string>& benchmark_labels);

// Distinct dataset labels that case-fold to a benchmark label.
std::set<std::string> benchmark_intersections(const std::vector<InputInstance>& dataset,
                                              const std::set<std::string>& benchmark_labels);

}  // namespace glirel
