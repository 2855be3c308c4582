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

#include "glirel/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "glirel/error.hpp"

namespace glirel {

std::set<std::string> InputInstance::gold_labels() const {
  std::set<std::string> out;
  for (const auto& r : relations) out.insert(r.label);
  return out;
}

std::string validation_error(const InputInstance& instance) {
  const int n = static_cast<int>(instance.tokens.size());
  const int e = static_cast<int>(instance.entities.size());
  for (int k = 0; k < e; ++k) {
    const auto& span = instance.entities[k];
    if (span.start < 0 || span.end < span.start || span.end >= n) {
      std::ostringstream msg;
      msg << "entity " << k << " span [" << span.start << ", " << span.end
          << "] outside [0, " << n << ")";
      return msg.str();
    }
  }
  for (std::size_t r = 0; r < instance.relations.size(); ++r) {
    const auto& rel = instance.relations[r];
    if (rel.head < 0 || rel.head >= e || rel.tail < 0 || rel.tail >= e) {
      return "relation " + std::to_string(r) + " references an unknown entity";
    }
    if (rel.head == rel.tail) {
      return "relation " + std::to_string(r) + " has head == tail";
    }
    if (rel.label.empty()) return "relation " + std::to_string(r) + " has an empty label";
  }
  if (instance.clusters) {
    std::vector<int> seen(e, 0);
    for (const auto& cluster : *instance.clusters) {
      if (cluster.empty()) return "empty coreference cluster";
      for (int m : cluster) {
        if (m < 0 || m >= e) return "cluster references unknown entity " + std::to_string(m);
        if (seen[m]++) return "entity " + std::to_string(m) + " appears in two clusters";
      }
    }
  }
  return {};
}

void validate(const InputInstance& instance) {
  if (auto err = validation_error(instance); !err.empty()) throw InvalidInput(err);
}

void to_json(nlohmann::json& j, const InputInstance& instance) {
  j = nlohmann::json::object();
  j["tokens"] = instance.tokens;
  auto ents = nlohmann::json::array();
  for (const auto& s : instance.entities) ents.push_back({s.start, s.end});
  j["entities"] = std::move(ents);
  auto rels = nlohmann::json::array();
  for (const auto& r : instance.relations) {
    rels.push_back({{"head", r.head}, {"tail", r.tail}, {"label", r.label}});
  }
  j["relations"] = std::move(rels);
  if (!instance.doc_id.empty()) j["doc_id"] = instance.doc_id;
  if (instance.clusters) j["clusters"] = *instance.clusters;
}

void from_json(const nlohmann::json& j, InputInstance& instance) {
  if (!j.is_object()) throw InvalidInput("record is not a JSON object");
  if (!j.contains("tokens") || !j["tokens"].is_array()) {
    throw InvalidInput("record lacks a `tokens` array");
  }
  instance = InputInstance{};
  for (const auto& t : j["tokens"]) {
    if (!t.is_string()) throw InvalidInput("`tokens` must contain strings");
    instance.tokens.push_back(t.get<std::string>());
  }
  if (j.contains("entities")) {
    if (!j["entities"].is_array()) throw InvalidInput("`entities` must be an array");
    for (const auto& e : j["entities"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
          !e[1].is_number_integer()) {
        throw InvalidInput("each entity must be an integer pair [start, end]");
      }
      instance.entities.push_back({e[0].get<int>(), e[1].get<int>()});
    }
  }
  if (j.contains("relations")) {
    if (!j["relations"].is_array()) throw InvalidInput("`relations` must be an array");
    for (const auto& r : j["relations"]) {
      if (!r.is_object() || !r.contains("head") || !r.contains("tail") || !r.contains("label") ||
          !r["head"].is_number_integer() || !r["tail"].is_number_integer() ||
          !r["label"].is_string()) {
        throw InvalidInput("each relation must be {head: int, tail: int, label: string}");
      }
      instance.relations.push_back(
          {r["head"].get<int>(), r["tail"].get<int>(), r["label"].get<std::string>()});
    }
  }
  if (j.contains("doc_id") && !j["doc_id"].is_null()) {
    const auto& id = j["doc_id"];
    instance.doc_id = id.is_string() ? id.get<std::string>() : id.dump();
  }
  if (j.contains("clusters") && !j["clusters"].is_null()) {
    if (!j["clusters"].is_array()) throw InvalidInput("`clusters` must be an array of arrays");
    std::vector<std::vector<int>> clusters;
    for (const auto& c : j["clusters"]) {
      if (!c.is_array()) throw InvalidInput("`clusters` must be an array of arrays");
      std::vector<int> members;
      for (const auto& m : c) {
        if (!m.is_number_integer()) throw InvalidInput("cluster members must be integers");
        members.push_back(m.get<int>());
      }
      clusters.push_back(std::move(members));
    }
    instance.clusters = std::move(clusters);
  }
}

InputInstance parse_instance(const nlohmann::json& j) {
  InputInstance instance = j.get<InputInstance>();
  validate(instance);
  return instance;
}

std::vector<InputInstance> read_jsonl(std::istream& in) {
  std::vector<InputInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_instance(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidInput& e) {
      throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<InputInstance> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, const std::vector<InputInstance>& data) {
  for (const auto& instance : data) out << nlohmann::json(instance).dump() << '\n';
}

void write_jsonl(const std::filesystem::path& path, const std::vector<InputInstance>& data) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_jsonl(out, data);
}

std::vector<std::string> label_universe(const std::vector<InputInstance>& data) {
  std::set<std::string> labels;
  for (const auto& instance : data) {
    for (const auto& r : instance.relations) labels.insert(r.label);
  }
  return {labels.begin(), labels.end()};
}

}  // namespace glirel
