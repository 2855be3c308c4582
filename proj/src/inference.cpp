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

#include "glirel/inference.hpp"

#include <algorithm>

#include "glirel/error.hpp"

namespace glirel {

template <typename T>
std::vector<PairScoreMatrix> score_instances(const Model<T>& model, const std::vector<InputInstance>& instances,
                                             const std::vector<std::string>& labels, int batch_size) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (labels.empty()) throw InvalidInput("no candidate labels");
  std::vector<PairScoreMatrix> out;
  out.reserve(instances.size());
  for (std::size_t begin = 0; begin < instances.size(); begin += batch_size) {
    const std::size_t end = std::min(instances.size(), begin + static_cast<std::size_t>(batch_size));
    std::vector<PreparedInput> inputs;
    inputs.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) inputs.push_back(model.prepare(instances[i], labels));
    for (auto& s : model.score_batch(inputs)) out.push_back(std::move(s));
  }
  return out;
}

template <typename T>
std::vector<PredictionSet> predict(const Model<T>& model, const std::vector<InputInstance>& instances,
                                   const std::vector<std::string>& labels, int batch_size,
                                   const DecodeOptions& options) {
  std::vector<PredictionSet> out;
  out.reserve(instances.size());
  for (const auto& s : score_instances(model, instances, labels, batch_size)) out.push_back(decode(s, options));
  return out;
}

std::vector<std::string> parse_label_list(const std::string& text) {
  std::vector<std::string> labels;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(pos, comma - pos);
    const auto first = item.find_first_not_of(" \t\r\n");
    const auto last = item.find_last_not_of(" \t\r\n");
    if (first == std::string::npos) throw InvalidInput("empty label in list \"" + text + "\"");
    labels.push_back(item.substr(first, last - first + 1));
    pos = comma + 1;
  }
  return labels;
}

template std::vector<PairScoreMatrix> score_instances(const Model<float>&, const std::vector<InputInstance>&,
                                                      const std::vector<std::string>&, int);
template std::vector<PairScoreMatrix> score_instances(const Model<double>&, const std::vector<InputInstance>&,
                                                      const std::vector<std::string>&, int);
template std::vector<PredictionSet> predict(const Model<float>&, const std::vector<InputInstance>&,
                                            const std::vector<std::string>&, int, const DecodeOptions&);
template std::vector<PredictionSet> predict(const Model<double>&, const std::vector<InputInstance>&,
                                            const std::vector<std::string>&, int, const DecodeOptions&);

}  // namespace glirel
