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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "glirel/dataset.hpp"
#include "glirel/model.hpp"
#include "glirel/scorer.hpp"

namespace glirel {

// A partition of mention indices. Members of a cluster are sorted and
// clusters are ordered by their smallest member.
struct CorefClusterSet {
  std::vector<std::vector<int>> clusters;
  std::vector<int> mention_to_cluster;

  int num_mentions() const { return static_cast<int>(mention_to_cluster.size()); }
  int size() const { return static_cast<int>(clusters.size()); }

  // Canonicalizes and validates a partition of [0, num_mentions).
  static CorefClusterSet from_partition(std::vector<std::vector<int>> partition, int num_mentions);
  static CorefClusterSet singletons(int num_mentions);

  friend bool operator==(const CorefClusterSet&, const CorefClusterSet&) = default;
};

// Connected components of the graph whose edges are the pairs predicted as
// `self_label` in either direction.
CorefClusterSet cluster_self_edges(const PredictionSet& predictions, int num_mentions,
                                   const std::string& self_label = "SELF");

// Gold clusters of a document, or singletons when it has none.
CorefClusterSet gold_clusters(const InputInstance& doc);

struct ClusterRelation {
  int head_cluster = 0;
  int tail_cluster = 0;
  std::string label;
  double score = 0.0;

  friend bool operator==(const ClusterRelation&, const ClusterRelation&) = default;
};

// Cluster-level relations sorted by (head_cluster, tail_cluster, label).
struct DocPrediction {
  std::vector<ClusterRelation> relations;

  friend bool operator==(const DocPrediction&, const DocPrediction&) = default;
};

// Lifts mention-level triples to clusters: SELF and intra-cluster triples are
// dropped, duplicates keep their highest score.
DocPrediction aggregate(const CorefClusterSet& clusters, const PredictionSet& predictions,
                        const std::string& self_label = "SELF");

// One token window of a document. entity_map[i] is the document mention
// index of window entity i.
struct DocWindow {
  InputInstance instance;
  int offset = 0;
  std::vector<int> entity_map;
};

// Windows start at 0, stride, 2*stride, ... and a final window is aligned to
// the document end. Only entities lying fully inside a window are kept. A
// document no longer than the window yields a single copy of itself.
std::vector<DocWindow> window_document(const InputInstance& doc, int window_tokens, int stride);

// Maps window predictions to document mentions and keeps the highest score
// per (head, tail, label). Output is sorted by (head, tail, label).
PredictionSet merge_window_predictions(const std::vector<PredictionSet>& per_window,
                                       const std::vector<DocWindow>& windows);

enum class CorefMode { kGold, kPredicted };

struct DocPipelineOptions {
  // Unset scores the whole document at once.
  std::optional<int> window_tokens = 256;
  int stride = 128;
  CorefMode mode = CorefMode::kPredicted;
  std::string self_label = "SELF";
};

struct DocResult {
  PredictionSet mentions;
  CorefClusterSet clusters;
  DocPrediction relations;
};

// Scores a list of instances against the candidate labels.
using InstanceScorer =
    std::function<std::vector<PredictionSet>(const std::vector<InputInstance>&, const std::vector<std::string>&)>;

// Window, score, merge, cluster and aggregate one document. In predicted
// mode the SELF label is added to the candidates and drives clustering; in
// gold mode the document's own clusters are used.
DocResult document_pipeline(const InputInstance& doc, const std::vector<std::string>& labels,
                            const InstanceScorer& scorer, const DocPipelineOptions& options);

template <typename T>
InstanceScorer model_scorer(const Model<T>& model, int batch_size, const DecodeOptions& decode_options);

}  // namespace glirel
