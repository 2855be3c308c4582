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

#include <json.hpp>

#include "glirel/autograd.hpp"
#include "glirel/representation.hpp"

namespace glirel {

// phi(u, v, t) = sigmoid(k_uv . q_t) for every pair row and label column.
// Logits are kept so that losses can be evaluated in logit form.
struct PairScoreMatrix {
  Matrix<double> logits;  // P x M
  Matrix<double> scores;  // P x M, sigmoid(logits)
  PairIndexSet pairs;
  std::vector<std::string> labels;

  int num_pairs() const { return static_cast<int>(scores.rows()); }
  int num_labels() const { return static_cast<int>(scores.cols()); }
};

// Binary targets aligned with a PairScoreMatrix.
using TargetMatrix = Matrix<double>;

struct Prediction {
  int head = 0;
  int tail = 0;
  std::string label;
  double score = 0.0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Decoded relations of one instance. Pairs decoded as NO_RELATION are absent.
struct PredictionSet {
  std::vector<Prediction> relations;

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

struct DecodeOptions {
  double threshold = 0.5;
  // Always emit the arg-max label, ignoring the threshold.
  bool force_choice = false;
  // Emit every label at or above the threshold instead of the arg-max only.
  bool multi_label = false;
};

double sigmoid(double x);

PairScoreMatrix scores_from_logits(const Matrix<double>& logits, PairIndexSet pairs,
                                   std::vector<std::string> labels);

template <typename T>
PairScoreMatrix score(const Matrix<T>& kappa, const Matrix<T>& q, PairIndexSet pairs = {},
                      std::vector<std::string> labels = {}) {
  if (kappa.cols() != q.cols()) throw InvalidInput("score: representation sizes differ");
  // Each cell is its own dot product so that a score does not depend on the
  // position of its row or column in the blocked matrix product.
  const Matrix<double> k = kappa.template cast<double>();
  const Matrix<double> l = q.template cast<double>();
  Matrix<double> logits(k.rows(), l.rows());
  for (Eigen::Index j = 0; j < l.rows(); ++j) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) logits(i, j) = k.row(i).dot(l.row(j));
  }
  return scores_from_logits(logits, std::move(pairs), std::move(labels));
}

// Mean BCE over all P x M cells, evaluated from logits.
double bce_loss(const PairScoreMatrix& scores, const TargetMatrix& targets);

// Per pair: the highest-scoring label (lowest index on ties) when its score
// reaches the threshold, otherwise NO_RELATION.
PredictionSet decode(const PairScoreMatrix& scores, const DecodeOptions& options = {});

// `{doc_id, predictions: [{head, tail, label, score}]}`
nlohmann::json prediction_record(const std::string& doc_id, const PredictionSet& predictions);
PredictionSet predictions_from_record(const nlohmann::json& record);

}  // namespace glirel
