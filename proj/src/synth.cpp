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

#include "glirel/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "glirel/error.hpp"
#include "glirel/util.hpp"

namespace glirel {

namespace {

bool is_trailing_punct(char c) {
  return c == ',' || c == '.' || c == ';' || c == ':' || c == '!' || c == '?' || c == '"' || c == '\'' ||
         c == ')';
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<std::string> simple_tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) {
    std::vector<std::string> tail;
    while (w.size() > 1 && is_trailing_punct(w.back())) {
      tail.emplace_back(1, w.back());
      w.pop_back();
    }
    std::size_t lead = 0;
    while (lead + 1 < w.size() && (w[lead] == '"' || w[lead] == '(')) {
      out.emplace_back(1, w[lead]);
      ++lead;
    }
    out.push_back(w.substr(lead));
    out.insert(out.end(), tail.rbegin(), tail.rend());
  }
  return out;
}

DictionaryTagger::DictionaryTagger(const std::vector<std::string>& phrases, bool capitalized_runs)
    : capitalized_runs_(capitalized_runs) {
  for (const auto& p : phrases) {
    auto toks = simple_tokenize(p);
    if (toks.empty()) continue;
    for (auto& t : toks) t = lower(t);
    phrases_.push_back(std::move(toks));
  }
  // Longest phrases first so that the first match is the longest.
  std::stable_sort(phrases_.begin(), phrases_.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
}

std::vector<EntitySpan> DictionaryTagger::tag(const std::vector<std::string>& tokens) const {
  const int n = static_cast<int>(tokens.size());
  std::vector<std::string> folded(tokens.size());
  std::transform(tokens.begin(), tokens.end(), folded.begin(), lower);
  std::vector<EntitySpan> out;
  int i = 0;
  while (i < n) {
    int matched = 0;
    for (const auto& p : phrases_) {
      const int len = static_cast<int>(p.size());
      if (i + len <= n && std::equal(p.begin(), p.end(), folded.begin() + i)) {
        matched = len;
        break;
      }
    }
    if (matched == 0 && capitalized_runs_ && i > 0 && std::isupper(static_cast<unsigned char>(tokens[i][0]))) {
      while (i + matched < n && std::isupper(static_cast<unsigned char>(tokens[i + matched][0]))) ++matched;
    }
    if (matched > 0) {
      out.push_back({i, i + matched - 1});
      i += matched;
    } else {
      ++i;
    }
  }
  return out;
}

TextRecord parse_text_record(const nlohmann::json& j, const EntityTagger* tagger, int line_number) {
  const std::string where = "text corpus line " + std::to_string(line_number) + ": ";
  if (!j.is_object()) throw InvalidInput(where + "expected an object");
  TextRecord r;
  r.doc_id = j.value("doc_id", "text-" + std::to_string(line_number));
  if (j.contains("tokens")) {
    r.tokens = j["tokens"].get<std::vector<std::string>>();
  } else if (j.contains("text") && j["text"].is_string()) {
    r.tokens = simple_tokenize(j["text"].get<std::string>());
  } else {
    throw InvalidInput(where + "missing \"text\"");
  }
  const int n = static_cast<int>(r.tokens.size());
  if (j.contains("entities")) {
    for (const auto& e : j["entities"]) {
      if (e.is_array() && e.size() == 2) {
        r.entities.push_back({e[0].get<int>(), e[1].get<int>()});
      } else if (e.is_string()) {
        auto mention = simple_tokenize(e.get<std::string>());
        bool found = false;
        for (int i = 0; !mention.empty() && i + static_cast<int>(mention.size()) <= n; ++i) {
          if (std::equal(mention.begin(), mention.end(), r.tokens.begin() + i)) {
            r.entities.push_back({i, i + static_cast<int>(mention.size()) - 1});
            found = true;
            break;
          }
        }
        if (!found) throw InvalidInput(where + "entity \"" + e.get<std::string>() + "\" not found in text");
      } else {
        throw InvalidInput(where + "entities must be [start, end] spans or strings");
      }
    }
  } else if (tagger != nullptr) {
    r.entities = tagger->tag(r.tokens);
  }
  for (const auto& s : r.entities) {
    if (s.start < 0 || s.end < s.start || s.end >= n) {
      throw InvalidInput(where + "entity span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                         "] outside " + std::to_string(n) + " tokens");
    }
  }
  return r;
}

std::vector<TextRecord> read_text_corpus(const std::filesystem::path& path, const EntityTagger* tagger) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<TextRecord> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput(path.string() + ":" + std::to_string(line_number) + ": " + e.what());
    }
    out.push_back(parse_text_record(j, tagger, line_number));
  }
  return out;
}

void AnnotationJob::check() const {
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (rate_limit < 0.0) throw ConfigError("rate_limit must be >= 0");
  if (burst < 1) throw ConfigError("burst must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

void to_json(nlohmann::json& j, const AnnotationJob& job) {
  j = {{"endpoint", job.endpoint},     {"model", job.model},       {"temperature", job.temperature},
       {"max_retries", job.max_retries}, {"rate_limit", job.rate_limit}, {"burst", job.burst},
       {"jobs", job.jobs},               {"timeout_ms", job.timeout.count()}};
}

void from_json(const nlohmann::json& j, AnnotationJob& job) {
  AnnotationJob d;
  job.endpoint = j.value("endpoint", d.endpoint);
  job.model = j.value("model", d.model);
  job.temperature = j.value("temperature", d.temperature);
  job.max_retries = j.value("max_retries", d.max_retries);
  job.rate_limit = j.value("rate_limit", d.rate_limit);
  job.burst = j.value("burst", d.burst);
  job.jobs = j.value("jobs", d.jobs);
  job.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long long>(d.timeout.count())));
}

namespace {

std::string join(const std::vector<std::string>& tokens, int start, int end) {
  std::string out;
  for (int i = start; i <= end; ++i) {
    if (i > start) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

std::string build_prompt(const std::vector<std::string>& tokens, const std::vector<EntitySpan>& entities,
                         const PairIndexSet& pairs) {
  std::ostringstream p;
  p << "You annotate relations between entities in a text.\n\n"
    << "Text:\n" << join(tokens, 0, static_cast<int>(tokens.size()) - 1) << "\n\n"
    << "Entities:\n";
  for (std::size_t e = 0; e < entities.size(); ++e) {
    p << "  " << e << ": " << join(tokens, entities[e].start, entities[e].end) << '\n';
  }
  p << "\nFor each ordered pair (head, tail) below, decide how the text relates the head entity to the "
       "tail entity. Answer with a short free-form relation phrase read from head to tail, such as one "
       "would write in a knowledge base. If the text states no relation between them, answer \""
    << kNoRelation << "\". Most pairs have no relation.\n\nPairs:\n";
  for (const auto& [h, t] : pairs.pairs) {
    p << "  (" << h << ", " << t << "): " << join(tokens, entities[h].start, entities[h].end) << " -> "
      << join(tokens, entities[t].start, entities[t].end) << '\n';
  }
  p << "\nReply with strict JSON only, no prose, in exactly this form:\n"
    << "{\"relations\": [{\"head\": <int>, \"tail\": <int>, \"label\": <string>}]}\n"
    << "with one entry per listed pair.\n";
  return p.str();
}

nlohmann::json build_request(const AnnotationJob& job, const std::string& prompt) {
  return {{"model", job.model},
          {"temperature", job.temperature},
          {"messages",
           {{{"role", "system"}, {"content", "You are a careful relation annotator. You reply with JSON only."}},
            {{"role", "user"}, {"content", prompt}}}}};
}

ParsedResponse parse_response(const std::string& raw, const PairIndexSet& pairs) {
  ParsedResponse out;
  nlohmann::json body, content;
  try {
    body = nlohmann::json::parse(raw);
    const auto& message = body.at("choices").at(0).at("message").at("content");
    if (!message.is_string()) throw InvalidInput("message content is not a string");
    content = nlohmann::json::parse(message.get<std::string>());
  } catch (const std::exception& e) {
    out.error = std::string("malformed response: ") + e.what();
    return out;
  }
  if (!content.is_object() || !content.contains("relations") || !content["relations"].is_array()) {
    out.error = "answer lacks a \"relations\" array";
    return out;
  }

  std::map<std::pair<int, int>, std::string> given;
  for (const auto& item : content["relations"]) {
    if (!item.is_object() || !item.contains("head") || !item.contains("tail") || !item.contains("label") ||
        !item["head"].is_number_integer() || !item["tail"].is_number_integer() || !item["label"].is_string()) {
      out.error = "relation entry does not match {head:int, tail:int, label:string}: " + item.dump();
      return out;
    }
    const std::pair<int, int> key{item["head"].get<int>(), item["tail"].get<int>()};
    std::string label = item["label"].get<std::string>();
    const auto first = label.find_first_not_of(" \t\n");
    const auto last = label.find_last_not_of(" \t\n");
    label = first == std::string::npos ? std::string() : label.substr(first, last - first + 1);
    if (label.empty()) {
      out.error = "empty label for pair (" + std::to_string(key.first) + ", " + std::to_string(key.second) + ")";
      return out;
    }
    if (case_fold(label) == case_fold(kNoRelation)) label = kNoRelation;
    if (std::find(pairs.pairs.begin(), pairs.pairs.end(), key) == pairs.pairs.end()) {
      out.warnings.push_back("ignored unknown pair (" + std::to_string(key.first) + ", " +
                             std::to_string(key.second) + ")");
      continue;
    }
    if (!given.emplace(key, label).second) {
      out.warnings.push_back("duplicate verdict for pair (" + std::to_string(key.first) + ", " +
                             std::to_string(key.second) + "); first kept");
    }
  }
  for (const auto& [h, t] : pairs.pairs) {
    PairVerdict v{h, t, kNoRelation, false};
    if (auto it = given.find({h, t}); it != given.end()) {
      v.label = it->second;
    } else {
      v.filled = true;
      out.warnings.push_back("no verdict for pair (" + std::to_string(h) + ", " + std::to_string(t) +
                             "); set to " + kNoRelation);
    }
    out.verdicts.push_back(std::move(v));
  }
  out.ok = true;
  return out;
}

HttpChatClient::HttpChatClient(std::string endpoint, std::string api_key, std::chrono::milliseconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint needs a scheme: " + endpoint);
  const auto path = endpoint.find('/', scheme + 3);
  host_ = endpoint.substr(0, path);
  path_prefix_ = path == std::string::npos ? "" : endpoint.substr(path);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

ChatReply HttpChatClient::send(const nlohmann::json& request, const std::string& /*prompt*/) {
  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  client.set_read_timeout(secs.count(), 0);
  client.set_connection_timeout(secs.count(), 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  ChatReply reply;
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, request.dump(), "application/json");
  if (!res) {
    reply.error = "http error: " + httplib::to_string(res.error());
    return reply;
  }
  reply.status = res->status;
  reply.body = res->body;
  return reply;
}

std::string prompt_hash(const std::string& prompt) { return hex64(fnv1a64(prompt)); }

ReplayChatClient::ReplayChatClient(const nlohmann::json& recordings) {
  for (const auto& r : recordings.at("responses")) {
    bodies_[r.at("prompt_hash").get<std::string>()] = r.at("bodies").get<std::vector<std::string>>();
  }
}

std::unique_ptr<ReplayChatClient> ReplayChatClient::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return std::make_unique<ReplayChatClient>(nlohmann::json::parse(in));
}

ChatReply ReplayChatClient::send(const nlohmann::json& /*request*/, const std::string& prompt) {
  const auto key = prompt_hash(prompt);
  std::lock_guard lock(mutex_);
  ChatReply reply;
  auto it = bodies_.find(key);
  if (it == bodies_.end()) {
    reply.status = 404;
    reply.error = "no recording for prompt " + key;
    return reply;
  }
  auto& next = next_[key];
  if (next >= it->second.size()) {
    reply.status = 404;
    reply.error = "recordings for prompt " + key + " exhausted";
    return reply;
  }
  reply.status = 200;
  reply.body = it->second[next++];
  return reply;
}

RateLimiter::RateLimiter(double rate, int burst)
    : rate_(rate), capacity_(burst), tokens_(burst), last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (rate_ <= 0.0) return;
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    tokens_ = std::min(capacity_, tokens_ + rate_ * std::chrono::duration<double>(now - last_).count());
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

nlohmann::json audit_json(const AuditEntry& entry) {
  return {{"doc_id", entry.doc_id},
          {"prompt_hash", entry.prompt_hash},
          {"status", entry.status},
          {"raw_responses", entry.raw_responses},
          {"warnings", entry.warnings}};
}

namespace {

struct TextOutcome {
  AuditEntry audit;
  std::vector<PairVerdict> verdicts;
  bool annotated = false;
};

TextOutcome annotate_one(const TextRecord& text, ChatClient& client, const AnnotationJob& job,
                         RateLimiter& limiter) {
  TextOutcome out;
  out.audit.doc_id = text.doc_id;
  const auto pairs = enumerate_pairs(static_cast<int>(text.entities.size()), text.entities);
  const auto prompt = build_prompt(text.tokens, text.entities, pairs);
  out.audit.prompt_hash = prompt_hash(prompt);
  if (pairs.empty()) {
    out.audit.status = "skipped";
    out.audit.warnings.emplace_back("fewer than two entities");
    return out;
  }
  const auto request = build_request(job, prompt);
  for (int attempt = 0; attempt <= job.max_retries; ++attempt) {
    limiter.acquire();
    const auto reply = client.send(request, prompt);
    out.audit.raw_responses.push_back(reply.body);
    if (reply.status != 200) {
      out.audit.warnings.push_back("attempt " + std::to_string(attempt + 1) + ": status " +
                                   std::to_string(reply.status) + " " + reply.error);
      continue;
    }
    auto parsed = parse_response(reply.body, pairs);
    if (!parsed.ok) {
      out.audit.warnings.push_back("attempt " + std::to_string(attempt + 1) + ": " + parsed.error);
      continue;
    }
    out.audit.warnings.insert(out.audit.warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
    out.audit.status = "ok";
    out.verdicts = std::move(parsed.verdicts);
    out.annotated = true;
    return out;
  }
  out.audit.status = "failed";
  spdlog::warn("annotation of {} failed after {} attempts", text.doc_id, job.max_retries + 1);
  return out;
}

}  // namespace

AnnotationRun annotate_corpus(const std::vector<TextRecord>& texts, ChatClient& client, const AnnotationJob& job) {
  job.check();
  RateLimiter limiter(job.rate_limit, job.burst);
  std::vector<TextOutcome> outcomes(texts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < texts.size(); i = next++) {
      outcomes[i] = annotate_one(texts[i], client, job, limiter);
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = std::max(1, std::min<int>(job.jobs, static_cast<int>(texts.size())));
    for (int w = 0; w < n; ++w) pool.emplace_back(worker);
  }

  AnnotationRun run;
  run.stats.texts = static_cast<int>(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto& o = outcomes[i];
    if (o.audit.status == "failed") ++run.stats.failed;
    if (o.annotated) {
      ++run.stats.annotated;
      InputInstance instance;
      instance.doc_id = texts[i].doc_id;
      instance.tokens = texts[i].tokens;
      instance.entities = texts[i].entities;
      for (const auto& v : o.verdicts) {
        ++run.stats.pair_verdicts;
        if (v.filled) ++run.stats.filled;
        if (v.label == kNoRelation) {
          ++run.stats.no_relation;
        } else {
          instance.relations.push_back({v.head, v.tail, v.label});
        }
      }
      validate(instance);
      run.dataset.push_back(std::move(instance));
    }
    run.audit.push_back(std::move(o.audit));
  }
  return run;
}

std::string case_fold(const std::string& label) {
  std::string out;
  bool space = false;
  for (const char c : label) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::set<std::string> read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto folded = case_fold(line);
    if (folded.empty() || folded[0] == '#') continue;
    out.insert(folded);
  }
  return out;
}

namespace {

std::set<std::string> folded_set(const std::set<std::string>& labels) {
  std::set<std::string> out;
  for (const auto& l : labels) out.insert(case_fold(l));
  return out;
}

}  // namespace

std::vector<InputInstance> filter_benchmark_labels(const std::vector<InputInstance>& dataset,
                                                   const std::set<std::string>& benchmark_labels) {
  const auto banned = folded_set(benchmark_labels);
  std::vector<InputInstance> out;
  for (const auto& instance : dataset) {
    InputInstance kept = instance;
    std::erase_if(kept.relations, [&](const RelationTriple& r) { return banned.contains(case_fold(r.label)); });
    if (!kept.relations.empty() || kept.entities.size() >= 2) out.push_back(std::move(kept));
  }
  return out;
}

std::set<std::string> benchmark_intersections(const std::vector<InputInstance>& dataset,
                                              const std::set<std::string>& benchmark_labels) {
  const auto banned = folded_set(benchmark_labels);
  std::set<std::string> out;
  for (const auto& instance : dataset) {
    for (const auto& r : instance.relations) {
      if (banned.contains(case_fold(r.label))) out.insert(r.label);
    }
  }
  return out;
}

}  // namespace glirel
