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

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace glirel {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A trainable tensor. `index` is its position in the owning model's
// parameter list and keys gradient buffers.
template <typename T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  int index = -1;
  bool decay = true;
};

// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class Activation { kGelu, kIdentity };

// Reverse-mode autodiff over row-major matrices. One tape per forward pass;
// values and gradients of nodes stay addressable until the tape dies.
template <typename T>
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Matrix<T> value);
  Var param(const Parameter<T>& p);

  const Matrix<T>& value(Var v) const;
  // Lazily zero-initialized gradient of v.
  Matrix<T>& grad(Var v);
  bool has_grad(Var v) const;

  // Seeds d(out)/d(out) = 1 for a 1x1 node and back-propagates.
  void backward(Var out);

  // Invokes f(parameter, gradient) for every parameter node reached by the
  // last backward pass. A parameter used twice yields two calls.
  template <typename F>
  void for_each_param_grad(F&& f) const {
    for (const auto& node : nodes_) {
      if (node.param != nullptr && node.grad.size() > 0) f(*node.param, node.grad);
    }
  }

  Var matmul(Var a, Var b);     // a * b
  Var matmul_nt(Var a, Var b);  // a * b^T
  Var add(Var a, Var b);
  Var add_bias(Var a, Var bias);  // bias: 1 x cols, broadcast over rows
  Var scale(Var a, T s);
  Var activate(Var a, Activation kind);
  Var layer_norm(Var x, Var gamma, Var beta, T eps);
  Var softmax_rows(Var a);
  Var gather_rows(Var a, std::vector<int> rows);
  Var concat_cols(Var a, Var b);
  Var hconcat(std::span<const Var> parts);
  Var slice_cols(Var a, int start, int count);
  // Mean binary cross-entropy over all cells, from logits.
  Var bce_with_logits(Var logits, const Matrix<T>& targets);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Matrix<T> owned;
    const Matrix<T>* ref = nullptr;
    Matrix<T> grad;
    bool requires_grad = false;
    const Parameter<T>* param = nullptr;
    std::function<void()> backward;

    const Matrix<T>& value() const { return ref != nullptr ? *ref : owned; }
  };

  Var push(Matrix<T> value, bool requires_grad, std::function<void()> backward);
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  bool any_needs(std::initializer_list<Var> vs) const;

  bool record_;
  std::deque<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace glirel
