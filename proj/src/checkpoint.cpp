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

#include "glirel/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "glirel/error.hpp"

namespace glirel {
namespace {

constexpr char kMagic[8] = {'G', 'L', 'I', 'R', 'E', 'L', 'C', 'K'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

template <typename U>
void write_pod(std::ostream& out, U value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

template <typename U>
U read_pod(std::istream& in) {
  U value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(U));
  if (!in) throw InvalidInput("checkpoint: truncated file");
  return value;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Model<float>& model, const nlohmann::json& metadata) {
  nlohmann::json header;
  header["version"] = kCheckpointVersion;
  header["model_config"] = model.config();
  header["vocab"] = model.vocab().to_json();
  header["metadata"] = metadata;
  auto tensors = nlohmann::json::array();
  std::size_t offset = 0;
  const auto params = model.parameters();
  for (const auto* p : params) {
    tensors.push_back(
        {{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}, {"offset", offset}});
    offset += static_cast<std::size_t>(p->value.size());
  }
  header["tensors"] = std::move(tensors);

  const std::string text = header.dump();
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : params) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  }
  if (!out) throw InvalidInput("checkpoint: write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     const nlohmann::json& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  save_checkpoint(out, model, metadata);
}

LoadedCheckpoint load_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InvalidInput("checkpoint: bad magic");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw InvalidInput("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto header_len = read_pod<std::uint64_t>(in);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw InvalidInput("checkpoint: truncated header");
  const auto header = nlohmann::json::parse(text);
  if (header.at("version").get<std::uint32_t>() != version) {
    throw InvalidInput("checkpoint: header version disagrees with preamble");
  }

  Model<float> model(header.at("model_config").get<ModelConfig>(),
                     SubwordVocab::from_json(header.at("vocab")));
  const auto& tensors = header.at("tensors");
  auto& params = model.parameters();
  if (tensors.size() != params.size()) throw InvalidInput("checkpoint: tensor count mismatch");

  std::vector<float> payload;
  std::size_t total = 0;
  for (const auto* p : params) total += static_cast<std::size_t>(p->value.size());
  payload.resize(total);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(total * sizeof(float)));
  if (!in) throw InvalidInput("checkpoint: truncated payload");

  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = tensors[i];
    auto* p = params[i];
    if (t.at("name").get<std::string>() != p->name || t.at("rows").get<long>() != p->value.rows() ||
        t.at("cols").get<long>() != p->value.cols()) {
      throw InvalidInput("checkpoint: tensor " + t.at("name").get<std::string>() +
                         " does not match the architecture");
    }
    const auto offset = t.at("offset").get<std::size_t>();
    if (offset + static_cast<std::size_t>(p->value.size()) > total) {
      throw InvalidInput("checkpoint: tensor offset out of range");
    }
    std::memcpy(p->value.data(), payload.data() + offset, p->value.size() * sizeof(float));
  }
  return {std::move(model), header.value("metadata", nlohmann::json::object())};
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return load_checkpoint(in);
}

}  // namespace glirel
