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
#include <vector>

#include "glirel/model.hpp"
#include "glirel/scorer.hpp"

namespace glirel {

// Scores every instance against one fixed candidate label list, batch_size
// instances per encoder pass. Pair indices refer to instance entities.
template <typename T>
std::vector<PairScoreMatrix> score_instances(const Model<T>& model, const std::vector<InputInstance>& instances,
                                             const std::vector<std::string>& labels, int batch_size);

template <typename T>
std::vector<PredictionSet> predict(const Model<T>& model, const std::vector<InputInstance>& instances,
                                   const std::vector<std::string>& labels, int batch_size,
                                   const DecodeOptions& options = {});

// Comma-separated label list; surrounding whitespace is trimmed and empty
// items are rejected.
std::vector<std::string> parse_label_list(const std::string& text);

}  // namespace glirel
