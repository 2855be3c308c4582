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

#include <cmath>
#include <string>
#include <vector>

#include "glirel/autograd.hpp"
#include "glirel/error.hpp"
#include "glirel/random.hpp"

namespace glirel {

// Row-vector convention: y = x W + b with W stored in_dim x out_dim.
template <typename T>
struct Linear {
  Parameter<T> weight;
  Parameter<T> bias;

  Linear() = default;
  Linear(const std::string& name, int in_dim, int out_dim) {
    weight.name = name + ".weight";
    weight.value = Matrix<T>::Zero(in_dim, out_dim);
    bias.name = name + ".bias";
    bias.value = Matrix<T>::Zero(1, out_dim);
    bias.decay = false;
  }

  int in_dim() const { return static_cast<int>(weight.value.rows()); }
  int out_dim() const { return static_cast<int>(weight.value.cols()); }

  // Glorot-uniform weights, zero bias.
  void init(Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(in_dim() + out_dim()));
    for (Eigen::Index i = 0; i < weight.value.size(); ++i) {
      weight.value.data()[i] = static_cast<T>((2.0 * uniform01(rng) - 1.0) * a);
    }
    bias.value.setZero();
  }

  Var forward(Tape<T>& tape, Var x) const {
    return tape.add_bias(tape.matmul(x, tape.param(weight)), tape.param(bias));
  }

  template <typename F>
  void visit(F&& f) {
    f(weight);
    f(bias);
  }
};

template <typename T>
struct LayerNorm {
  Parameter<T> gamma;
  Parameter<T> beta;
  T eps = T(1e-5);

  LayerNorm() = default;
  LayerNorm(const std::string& name, int dim) {
    gamma.name = name + ".gamma";
    gamma.value = Matrix<T>::Ones(1, dim);
    gamma.decay = false;
    beta.name = name + ".beta";
    beta.value = Matrix<T>::Zero(1, dim);
    beta.decay = false;
  }

  Var forward(Tape<T>& tape, Var x) const {
    return tape.layer_norm(x, tape.param(gamma), tape.param(beta), eps);
  }

  template <typename F>
  void visit(F&& f) {
    f(gamma);
    f(beta);
  }
};

// Two linear layers with one nonlinearity between them.
template <typename T>
struct Ffn2 {
  Linear<T> first;
  Linear<T> second;
  Activation activation = Activation::kGelu;

  static constexpr int kNumLayers = 2;

  Ffn2() = default;
  Ffn2(const std::string& name, int in_dim, int hidden_dim, int out_dim, Activation act)
      : first(name + ".0", in_dim, hidden_dim),
        second(name + ".1", hidden_dim, out_dim),
        activation(act) {}

  void init(Rng& rng) {
    first.init(rng);
    second.init(rng);
  }

  Var forward(Tape<T>& tape, Var x) const {
    return second.forward(tape, tape.activate(first.forward(tape, x), activation));
  }

  // Test configuration: identity weights, zero biases, identity activation.
  // Requires square layers.
  void set_identity() {
    if (first.in_dim() != first.out_dim() || second.in_dim() != second.out_dim()) {
      throw InvalidInput("Ffn2::set_identity needs square layers");
    }
    first.weight.value.setIdentity();
    second.weight.value.setIdentity();
    first.bias.value.setZero();
    second.bias.value.setZero();
    activation = Activation::kIdentity;
  }

  template <typename F>
  void visit(F&& f) {
    first.visit(f);
    second.visit(f);
  }
};

// Scaled dot-product attention with `heads` heads. Queries come from one
// row set, keys and values from another (the same one for self-attention).
// No positional information is added.
template <typename T>
struct MultiHeadAttention {
  Linear<T> wq, wk, wv, wo;
  int heads = 1;

  MultiHeadAttention() = default;
  MultiHeadAttention(const std::string& name, int dim, int num_heads)
      : wq(name + ".q", dim, dim),
        wk(name + ".k", dim, dim),
        wv(name + ".v", dim, dim),
        wo(name + ".o", dim, dim),
        heads(num_heads) {
    if (num_heads < 1 || dim % num_heads != 0) {
      throw ConfigError("attention: dim " + std::to_string(dim) + " not divisible by " +
                        std::to_string(num_heads) + " heads");
    }
  }

  int dim() const { return wq.in_dim(); }

  void init(Rng& rng) {
    wq.init(rng);
    wk.init(rng);
    wv.init(rng);
    wo.init(rng);
  }

  // Zero output projection: the block then contributes nothing.
  void zero_output() {
    wo.weight.value.setZero();
    wo.bias.value.setZero();
  }

  Var forward(Tape<T>& tape, Var queries, Var keys_values) const {
    const auto nq = tape.value(queries).rows();
    const auto nk = tape.value(keys_values).rows();
    if (nk == 0 || nq == 0) return tape.constant(Matrix<T>::Zero(nq, dim()));

    const Var q = wq.forward(tape, queries);
    const Var k = wk.forward(tape, keys_values);
    const Var v = wv.forward(tape, keys_values);
    const int dh = dim() / heads;
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));
    std::vector<Var> outputs;
    outputs.reserve(heads);
    for (int h = 0; h < heads; ++h) {
      Var qh = heads == 1 ? q : tape.slice_cols(q, h * dh, dh);
      Var kh = heads == 1 ? k : tape.slice_cols(k, h * dh, dh);
      Var vh = heads == 1 ? v : tape.slice_cols(v, h * dh, dh);
      Var weights = tape.softmax_rows(tape.scale(tape.matmul_nt(qh, kh), scale));
      outputs.push_back(tape.matmul(weights, vh));
    }
    Var merged = heads == 1 ? outputs[0] : tape.hconcat(outputs);
    return wo.forward(tape, merged);
  }

  template <typename F>
  void visit(F&& f) {
    wq.visit(f);
    wk.visit(f);
    wv.visit(f);
    wo.visit(f);
  }
};

}  // namespace glirel
