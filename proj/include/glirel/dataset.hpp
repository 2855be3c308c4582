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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace glirel {

// Inclusive token span of an entity mention.
struct EntitySpan {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

// Directed, labelled relation between two entities of one instance.
struct RelationTriple {
  int head = 0;
  int tail = 0;
  std::string label;

  friend bool operator==(const RelationTriple&, const RelationTriple&) = default;
  friend auto operator<=>(const RelationTriple&, const RelationTriple&) = default;
};

// One text with its entity mentions and gold relations. `clusters` carries
// gold coreference (a partition of entity indices) for document data.
struct InputInstance {
  std::vector<std::string> tokens;
  std::vector<EntitySpan> entities;
  std::vector<RelationTriple> relations;
  std::string doc_id;
  std::optional<std::vector<std::vector<int>>> clusters;

  // Distinct gold labels, sorted.
  std::set<std::string> gold_labels() const;

  friend bool operator==(const InputInstance&, const InputInstance&) = default;
};

// Throws InvalidInput describing the first violated invariant.
void validate(const InputInstance& instance);

// Returns the empty string when valid, otherwise a description of the problem.
std::string validation_error(const InputInstance& instance);

void to_json(nlohmann::json& j, const InputInstance& instance);
void from_json(const nlohmann::json& j, InputInstance& instance);

// Parses and validates a JSON object against the dataset record schema.
InputInstance parse_instance(const nlohmann::json& j);

// JSONL helpers. Readers validate every record and report the line number
// of the first bad record.
std::vector<InputInstance> read_jsonl(std::istream& in);
std::vector<InputInstance> read_jsonl(const std::filesystem::path& path);
void write_jsonl(std::ostream& out, const std::vector<InputInstance>& data);
void write_jsonl(const std::filesystem::path& path, const std::vector<InputInstance>& data);

// Sorted distinct labels over a dataset.
std::vector<std::string> label_universe(const std::vector<InputInstance>& data);

}  // namespace glirel
