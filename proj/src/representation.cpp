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

#include "glirel/representation.hpp"

#include <cstdlib>

namespace glirel {

int pair_distance(const EntitySpan& head, const EntitySpan& tail) {
  return std::abs(tail.start - head.end);
}

PairIndexSet enumerate_pairs(int num_entities, const std::vector<EntitySpan>& spans,
                             std::optional<int> window) {
  if (num_entities < 0) throw InvalidInput("enumerate_pairs: negative entity count");
  if (window && static_cast<int>(spans.size()) < num_entities) {
    throw InvalidInput("enumerate_pairs: windowing needs one span per entity");
  }
  PairIndexSet out;
  if (num_entities > 1) out.pairs.reserve(static_cast<std::size_t>(num_entities) * (num_entities - 1));
  for (int u = 0; u < num_entities; ++u) {
    for (int v = 0; v < num_entities; ++v) {
      if (u == v) continue;
      if (window && pair_distance(spans[u], spans[v]) > *window) continue;
      out.pairs.emplace_back(u, v);
    }
  }
  return out;
}

}  // namespace glirel
