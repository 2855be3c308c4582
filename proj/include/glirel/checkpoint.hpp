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

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "glirel/model.hpp"

namespace glirel {

// Binary layout, little-endian:
//   "GLIRELCK"        8-byte magic
//   uint32            format version
//   uint64            header length in bytes
//   header            JSON: version, model_config, vocab, tensors[{name, rows,
//                     cols, offset}], metadata
//   payload           float32 values of every tensor, row-major, at `offset`
//                     (counted in floats from the payload start)
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(std::ostream& out, const Model<float>& model,
                     const nlohmann::json& metadata = nlohmann::json::object());
void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     const nlohmann::json& metadata = nlohmann::json::object());

struct LoadedCheckpoint {
  Model<float> model;
  nlohmann::json metadata;
};

LoadedCheckpoint load_checkpoint(std::istream& in);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace glirel
