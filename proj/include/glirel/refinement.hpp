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

#include <utility>
#include <vector>

#include <json.hpp>

#include "glirel/nn.hpp"

namespace glirel {

struct RefineConfig {
  bool refine_pairs = false;
  bool refine_labels = false;
  int num_layers = 0;  // at most two
  int num_heads = 1;
  // Adds a residual around the final FFN. Off: x_final = FFN(x'').
  bool ffn_residual = false;

  static constexpr int kMaxLayers = 2;
  void check(int dim) const;
  bool active() const { return num_layers > 0 && (refine_pairs || refine_labels); }
};

void to_json(nlohmann::json& j, const RefineConfig& c);
void from_json(const nlohmann::json& j, RefineConfig& c);

// One refinement step for one side:
//   x'  = x + CrossAtt(x, other)
//   x'' = x' + SelfAtt(x')
//   out = FFN(x'')            (or x'' + FFN(x'') with ffn_residual)
template <typename T>
struct RefineBlock {
  MultiHeadAttention<T> cross;
  MultiHeadAttention<T> self;
  Ffn2<T> ffn;
  bool ffn_residual = false;

  RefineBlock() = default;
  RefineBlock(const std::string& name, int dim, int heads, Activation act, bool residual)
      : cross(name + ".cross", dim, heads),
        self(name + ".self", dim, heads),
        ffn(name + ".ffn", dim, dim, dim, act),
        ffn_residual(residual) {}

  void init(Rng& rng) {
    cross.init(rng);
    self.init(rng);
    ffn.init(rng);
  }

  Var forward(Tape<T>& tape, Var x, Var other) const {
    const Var x1 = tape.add(x, cross.forward(tape, x, other));
    const Var x2 = tape.add(x1, self.forward(tape, x1, x1));
    const Var out = ffn.forward(tape, x2);
    return ffn_residual ? tape.add(x2, out) : out;
  }

  template <typename F>
  void visit(F&& f) {
    cross.visit(f);
    self.visit(f);
    ffn.visit(f);
  }
};

// Stack of refinement layers over pair and label representations. Both
// sides get parameters for every layer; a disabled side passes through.
// Within a layer both sides attend to the other side's layer input.
template <typename T>
class Refiner {
 public:
  Refiner() = default;
  Refiner(const RefineConfig& config, int dim, Activation act);

  const RefineConfig& config() const { return config_; }
  void init(Rng& rng);

  std::pair<Var, Var> forward(Tape<T>& tape, Var pairs, Var labels) const;

  std::vector<RefineBlock<T>>& pair_blocks() { return pair_blocks_; }
  std::vector<RefineBlock<T>>& label_blocks() { return label_blocks_; }

  template <typename F>
  void visit(F&& f) {
    for (auto& b : pair_blocks_) b.visit(f);
    for (auto& b : label_blocks_) b.visit(f);
  }

 private:
  RefineConfig config_;
  std::vector<RefineBlock<T>> pair_blocks_;
  std::vector<RefineBlock<T>> label_blocks_;
};

// Plain-matrix form: returns refined (pairs, labels).
template <typename T>
std::pair<Matrix<T>, Matrix<T>> refine(const Matrix<T>& pairs, const Matrix<T>& labels,
                                       const Refiner<T>& refiner) {
  Tape<T> tape(false);
  auto [p, l] = refiner.forward(tape, tape.constant(pairs), tape.constant(labels));
  return {tape.value(p), tape.value(l)};
}

extern template class Refiner<float>;
extern template class Refiner<double>;

}  // namespace glirel
