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

#include <optional>
#include <utility>
#include <vector>

#include "glirel/dataset.hpp"
#include "glirel/nn.hpp"

namespace glirel {

// Ordered (head, tail) entity pairs, never containing a self-pair.
struct PairIndexSet {
  std::vector<std::pair<int, int>> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
  bool empty() const { return pairs.empty(); }
  friend bool operator==(const PairIndexSet&, const PairIndexSet&) = default;
};

// Token distance used by pair windowing: |tail.start - head.end|.
int pair_distance(const EntitySpan& head, const EntitySpan& tail);

// All ordered pairs u != v in lexicographic order; with a window, only those
// whose pair_distance is at most `window`.
PairIndexSet enumerate_pairs(int num_entities, const std::vector<EntitySpan>& spans,
                             std::optional<int> window = std::nullopt);

// The three projection networks that place labels and entity pairs in one
// latent space:
//   q      = FFN(p)
//   e_u    = FFN(h_start ; h_end)
//   k_uv   = FFN(e_u ; e_v)
template <typename T>
struct RepresentationLayers {
  Ffn2<T> label_ffn;
  Ffn2<T> entity_ffn;
  Ffn2<T> pair_ffn;

  RepresentationLayers() = default;
  RepresentationLayers(int dim, Activation act)
      : label_ffn("head.label_ffn", dim, dim, dim, act),
        entity_ffn("head.entity_ffn", 2 * dim, dim, dim, act),
        pair_ffn("head.pair_ffn", 2 * dim, dim, dim, act) {}

  void init(Rng& rng) {
    label_ffn.init(rng);
    entity_ffn.init(rng);
    pair_ffn.init(rng);
  }

  Var label_reps(Tape<T>& tape, Var p) const { return label_ffn.forward(tape, p); }

  Var entity_reps(Tape<T>& tape, Var h, const std::vector<EntitySpan>& spans) const {
    const auto n = tape.value(h).rows();
    std::vector<int> starts, ends;
    starts.reserve(spans.size());
    ends.reserve(spans.size());
    for (const auto& s : spans) {
      if (s.start < 0 || s.end < s.start || s.end >= n) {
        throw InvalidInput("entity_reps: span outside the text");
      }
      starts.push_back(s.start);
      ends.push_back(s.end);
    }
    const Var both = tape.concat_cols(tape.gather_rows(h, std::move(starts)),
                                      tape.gather_rows(h, std::move(ends)));
    return entity_ffn.forward(tape, both);
  }

  Var pair_reps(Tape<T>& tape, Var e, const PairIndexSet& pairs) const {
    const auto n = tape.value(e).rows();
    std::vector<int> heads, tails;
    heads.reserve(pairs.pairs.size());
    tails.reserve(pairs.pairs.size());
    for (const auto& [u, v] : pairs.pairs) {
      if (u < 0 || v < 0 || u >= n || v >= n || u == v) throw InvalidInput("pair_reps: bad pair index");
      heads.push_back(u);
      tails.push_back(v);
    }
    const Var both = tape.concat_cols(tape.gather_rows(e, std::move(heads)),
                                      tape.gather_rows(e, std::move(tails)));
    return pair_ffn.forward(tape, both);
  }

  template <typename F>
  void visit(F&& f) {
    label_ffn.visit(f);
    entity_ffn.visit(f);
    pair_ffn.visit(f);
  }
};

// Plain-matrix forms of the three projections.
template <typename T>
Matrix<T> label_reps(const Matrix<T>& p, const RepresentationLayers<T>& layers) {
  Tape<T> tape(false);
  return tape.value(layers.label_reps(tape, tape.constant(p)));
}

template <typename T>
Matrix<T> entity_reps(const Matrix<T>& h, const std::vector<EntitySpan>& spans,
                      const RepresentationLayers<T>& layers) {
  Tape<T> tape(false);
  return tape.value(layers.entity_reps(tape, tape.constant(h), spans));
}

template <typename T>
Matrix<T> pair_reps(const Matrix<T>& e, const PairIndexSet& pairs,
                    const RepresentationLayers<T>& layers) {
  Tape<T> tape(false);
  return tape.value(layers.pair_reps(tape, tape.constant(e), pairs));
}

}  // namespace glirel
