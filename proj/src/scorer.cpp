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

#include "glirel/scorer.hpp"

#include <cmath>

namespace glirel {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

PairScoreMatrix scores_from_logits(const Matrix<double>& logits, PairIndexSet pairs,
                                   std::vector<std::string> labels) {
  if (!pairs.empty() && pairs.size() != logits.rows()) {
    throw InvalidInput("score: pair list does not match the number of rows");
  }
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != logits.cols()) {
    throw InvalidInput("score: label list does not match the number of columns");
  }
  PairScoreMatrix out;
  out.logits = logits;
  out.scores = logits.unaryExpr([](double z) { return sigmoid(z); });
  out.pairs = std::move(pairs);
  out.labels = std::move(labels);
  return out;
}

double bce_loss(const PairScoreMatrix& scores, const TargetMatrix& targets) {
  const auto& z = scores.logits;
  if (z.rows() != targets.rows() || z.cols() != targets.cols()) {
    throw InvalidInput("bce_loss: target shape does not match scores");
  }
  if (z.size() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double x = z(i, j);
      total += std::max(x, 0.0) - x * targets(i, j) + std::log1p(std::exp(-std::abs(x)));
    }
  }
  return total / static_cast<double>(z.size());
}

PredictionSet decode(const PairScoreMatrix& scores, const DecodeOptions& options) {
  if (!options.force_choice && !(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw InvalidInput("decode: threshold must lie in (0, 1)");
  }
  auto label_name = [&](int t) {
    return t < static_cast<int>(scores.labels.size()) ? scores.labels[t] : std::to_string(t);
  };
  auto pair_at = [&](int p) {
    return p < scores.pairs.size() ? scores.pairs.pairs[p] : std::pair<int, int>{-1, -1};
  };

  PredictionSet out;
  for (int p = 0; p < scores.num_pairs(); ++p) {
    const auto [head, tail] = pair_at(p);
    if (options.multi_label) {
      for (int t = 0; t < scores.num_labels(); ++t) {
        if (scores.scores(p, t) >= options.threshold) {
          out.relations.push_back({head, tail, label_name(t), scores.scores(p, t)});
        }
      }
      continue;
    }
    int best = -1;
    for (int t = 0; t < scores.num_labels(); ++t) {
      if (best < 0 || scores.scores(p, t) > scores.scores(p, best)) best = t;
    }
    if (best < 0) continue;
    if (options.force_choice || scores.scores(p, best) >= options.threshold) {
      out.relations.push_back({head, tail, label_name(best), scores.scores(p, best)});
    }
  }
  return out;
}

nlohmann::json prediction_record(const std::string& doc_id, const PredictionSet& predictions) {
  auto preds = nlohmann::json::array();
  for (const auto& r : predictions.relations) {
    preds.push_back({{"head", r.head}, {"tail", r.tail}, {"label", r.label}, {"score", r.score}});
  }
  return {{"doc_id", doc_id}, {"predictions", std::move(preds)}};
}

PredictionSet predictions_from_record(const nlohmann::json& record) {
  PredictionSet out;
  for (const auto& p : record.at("predictions")) {
    out.relations.push_back({p.at("head").get<int>(), p.at("tail").get<int>(),
                             p.at("label").get<std::string>(), p.at("score").get<double>()});
  }
  return out;
}

}  // namespace glirel
