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

// Brute-force reference implementations used as test oracles. They share no
// code with the library beyond the plain data types.

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "glirel/dataset.hpp"
#include "glirel/scorer.hpp"

namespace glirel::oracle {

// Every ordered pair of distinct entities, filtered by token distance.
inline std::vector<std::pair<int, int>> all_pairs(int num_entities, const std::vector<EntitySpan>& spans,
                                                  std::optional<int> window) {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < num_entities; ++u) {
    for (int v = 0; v < num_entities; ++v) {
      if (u == v) continue;
      if (window && std::abs(spans[v].start - spans[u].end) > *window) continue;
      out.emplace_back(u, v);
    }
  }
  return out;
}

// Partition by breadth-first reachability over undirected edges, as a set of
// member sets.
inline std::set<std::set<int>> reachability_partition(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::set<std::set<int>> out;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::set<int> component;
    std::queue<int> frontier;
    frontier.push(s);
    seen[s] = true;
    while (!frontier.empty()) {
      const int x = frontier.front();
      frontier.pop();
      component.insert(x);
      for (const int y : adj[x]) {
        if (!seen[y]) {
          seen[y] = true;
          frontier.push(y);
        }
      }
    }
    out.insert(component);
  }
  return out;
}

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Confusion counts label by label from explicit triple sets, then the plain
// average.
inline Prf macro_by_counting(const std::vector<PredictionSet>& predictions, const std::vector<InputInstance>& golds,
                             const std::vector<std::string>& labels) {
  Prf sum;
  for (const auto& label : labels) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
      std::set<std::pair<int, int>> predicted, gold;
      for (const auto& p : predictions[i].relations) {
        if (p.label == label) predicted.insert({p.head, p.tail});
      }
      for (const auto& r : golds[i].relations) {
        if (r.label == label) gold.insert({r.head, r.tail});
      }
      for (const auto& x : predicted) (gold.count(x) ? tp : fp) += 1;
      for (const auto& x : gold) fn += predicted.count(x) ? 0 : 1;
    }
    const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double f = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    sum.precision += p;
    sum.recall += r;
    sum.f1 += f;
  }
  const double n = static_cast<double>(labels.size());
  return {sum.precision / n, sum.recall / n, sum.f1 / n};
}

}  // namespace glirel::oracle
