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

#include "glirel/coref.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include "glirel/error.hpp"
#include "glirel/inference.hpp"

namespace glirel {

CorefClusterSet CorefClusterSet::from_partition(std::vector<std::vector<int>> partition, int num_mentions) {
  CorefClusterSet out;
  out.mention_to_cluster.assign(num_mentions, -1);
  for (auto& c : partition) {
    if (c.empty()) throw InvalidInput("coreference cluster is empty");
    std::sort(c.begin(), c.end());
  }
  std::sort(partition.begin(), partition.end());
  for (std::size_t k = 0; k < partition.size(); ++k) {
    for (int m : partition[k]) {
      if (m < 0 || m >= num_mentions) throw InvalidInput("cluster mention " + std::to_string(m) + " out of range");
      if (out.mention_to_cluster[m] != -1) {
        throw InvalidInput("mention " + std::to_string(m) + " is in two clusters");
      }
      out.mention_to_cluster[m] = static_cast<int>(k);
    }
  }
  for (int m = 0; m < num_mentions; ++m) {
    if (out.mention_to_cluster[m] == -1) throw InvalidInput("mention " + std::to_string(m) + " has no cluster");
  }
  out.clusters = std::move(partition);
  return out;
}

CorefClusterSet CorefClusterSet::singletons(int num_mentions) {
  std::vector<std::vector<int>> parts(num_mentions);
  for (int m = 0; m < num_mentions; ++m) parts[m] = {m};
  return from_partition(std::move(parts), num_mentions);
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

CorefClusterSet cluster_self_edges(const PredictionSet& predictions, int num_mentions,
                                   const std::string& self_label) {
  std::vector<int> parent(num_mentions);
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& p : predictions.relations) {
    if (p.label != self_label) continue;
    if (p.head < 0 || p.head >= num_mentions || p.tail < 0 || p.tail >= num_mentions) {
      throw InvalidInput("SELF edge references a mention out of range");
    }
    const int a = find_root(parent, p.head);
    const int b = find_root(parent, p.tail);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<int, std::vector<int>> groups;
  for (int m = 0; m < num_mentions; ++m) groups[find_root(parent, m)].push_back(m);
  std::vector<std::vector<int>> parts;
  parts.reserve(groups.size());
  for (auto& [root, members] : groups) parts.push_back(std::move(members));
  return CorefClusterSet::from_partition(std::move(parts), num_mentions);
}

CorefClusterSet gold_clusters(const InputInstance& doc) {
  const int n = static_cast<int>(doc.entities.size());
  if (!doc.clusters) return CorefClusterSet::singletons(n);
  return CorefClusterSet::from_partition(*doc.clusters, n);
}

DocPrediction aggregate(const CorefClusterSet& clusters, const PredictionSet& predictions,
                        const std::string& self_label) {
  std::map<std::tuple<int, int, std::string>, double> best;
  for (const auto& p : predictions.relations) {
    if (p.label == self_label) continue;
    const int h = clusters.mention_to_cluster.at(p.head);
    const int t = clusters.mention_to_cluster.at(p.tail);
    if (h == t) continue;
    auto [it, inserted] = best.try_emplace({h, t, p.label}, p.score);
    if (!inserted) it->second = std::max(it->second, p.score);
  }
  DocPrediction out;
  out.relations.reserve(best.size());
  for (const auto& [key, score] : best) {
    out.relations.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), score});
  }
  return out;
}

namespace {

DocWindow cut_window(const InputInstance& doc, int offset, int length) {
  DocWindow w;
  w.offset = offset;
  w.instance.doc_id = doc.doc_id;
  w.instance.tokens.assign(doc.tokens.begin() + offset, doc.tokens.begin() + offset + length);
  std::vector<int> local(doc.entities.size(), -1);
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    const auto& s = doc.entities[e];
    if (s.start >= offset && s.end < offset + length) {
      local[e] = static_cast<int>(w.entity_map.size());
      w.entity_map.push_back(static_cast<int>(e));
      w.instance.entities.push_back({s.start - offset, s.end - offset});
    }
  }
  for (const auto& r : doc.relations) {
    if (local[r.head] >= 0 && local[r.tail] >= 0) {
      w.instance.relations.push_back({local[r.head], local[r.tail], r.label});
    }
  }
  if (doc.clusters) {
    std::vector<std::vector<int>> clusters;
    for (const auto& c : *doc.clusters) {
      std::vector<int> kept;
      for (int m : c) {
        if (local[m] >= 0) kept.push_back(local[m]);
      }
      if (!kept.empty()) clusters.push_back(std::move(kept));
    }
    w.instance.clusters = std::move(clusters);
  }
  return w;
}

}  // namespace

std::vector<DocWindow> window_document(const InputInstance& doc, int window_tokens, int stride) {
  if (stride <= 0 || window_tokens < stride) {
    throw ConfigError("window_document: need window >= stride > 0 (window=" + std::to_string(window_tokens) +
                      ", stride=" + std::to_string(stride) + ")");
  }
  const int n = static_cast<int>(doc.tokens.size());
  std::vector<DocWindow> out;
  if (n <= window_tokens) {
    DocWindow w;
    w.instance = doc;
    w.entity_map.resize(doc.entities.size());
    std::iota(w.entity_map.begin(), w.entity_map.end(), 0);
    out.push_back(std::move(w));
    return out;
  }
  int offset = 0;
  for (; offset + window_tokens < n; offset += stride) out.push_back(cut_window(doc, offset, window_tokens));
  const int last = n - window_tokens;
  if (out.empty() || out.back().offset != last) out.push_back(cut_window(doc, last, window_tokens));
  return out;
}

PredictionSet merge_window_predictions(const std::vector<PredictionSet>& per_window,
                                       const std::vector<DocWindow>& windows) {
  if (per_window.size() != windows.size()) throw InvalidInput("one prediction set per window is required");
  std::map<std::tuple<int, int, std::string>, double> best;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto& map = windows[w].entity_map;
    for (const auto& p : per_window[w].relations) {
      auto [it, inserted] = best.try_emplace({map.at(p.head), map.at(p.tail), p.label}, p.score);
      if (!inserted) it->second = std::max(it->second, p.score);
    }
  }
  PredictionSet out;
  out.relations.reserve(best.size());
  for (const auto& [key, score] : best) {
    out.relations.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), score});
  }
  return out;
}

DocResult document_pipeline(const InputInstance& doc, const std::vector<std::string>& labels,
                            const InstanceScorer& scorer, const DocPipelineOptions& options) {
  std::vector<std::string> candidates = labels;
  const bool has_self = std::find(labels.begin(), labels.end(), options.self_label) != labels.end();
  if (options.mode == CorefMode::kPredicted && !has_self) candidates.push_back(options.self_label);

  std::vector<DocWindow> windows;
  if (options.window_tokens) {
    windows = window_document(doc, *options.window_tokens, options.stride);
  } else {
    windows = window_document(doc, std::max<int>(1, static_cast<int>(doc.tokens.size())), 1);
  }
  std::vector<InputInstance> inputs;
  inputs.reserve(windows.size());
  for (const auto& w : windows) inputs.push_back(w.instance);

  DocResult result;
  result.mentions = merge_window_predictions(scorer(inputs, candidates), windows);
  const int n = static_cast<int>(doc.entities.size());
  result.clusters = options.mode == CorefMode::kGold
                        ? gold_clusters(doc)
                        : cluster_self_edges(result.mentions, n, options.self_label);
  result.relations = aggregate(result.clusters, result.mentions, options.self_label);
  return result;
}

template <typename T>
InstanceScorer model_scorer(const Model<T>& model, int batch_size, const DecodeOptions& decode_options) {
  return [&model, batch_size, decode_options](const std::vector<InputInstance>& inputs,
                                              const std::vector<std::string>& labels) {
    return predict(model, inputs, labels, batch_size, decode_options);
  };
}

template InstanceScorer model_scorer(const Model<float>&, int, const DecodeOptions&);
template InstanceScorer model_scorer(const Model<double>&, int, const DecodeOptions&);

}  // namespace glirel
