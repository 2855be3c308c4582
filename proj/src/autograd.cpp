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

#include "glirel/autograd.hpp"

#include <cmath>

#include "glirel/error.hpp"

namespace glirel {
namespace {

template <typename T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                       std::to_string(b.cols()));
  }
}

template <typename T>
T gelu(T x) {
  constexpr T kInvSqrt2 = T(0.70710678118654752440);
  return T(0.5) * x * (T(1) + std::erf(x * kInvSqrt2));
}

template <typename T>
T gelu_grad(T x) {
  constexpr T kInvSqrt2 = T(0.70710678118654752440);
  constexpr T kInvSqrt2Pi = T(0.39894228040143267794);
  const T cdf = T(0.5) * (T(1) + std::erf(x * kInvSqrt2));
  return cdf + x * kInvSqrt2Pi * std::exp(T(-0.5) * x * x);
}

}  // namespace

template <typename T>
Var Tape<T>::push(Matrix<T> value, bool requires_grad, std::function<void()> backward) {
  Node node;
  node.owned = std::move(value);
  node.requires_grad = requires_grad && record_;
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
bool Tape<T>::any_needs(std::initializer_list<Var> vs) const {
  if (!record_) return false;
  for (Var v : vs) {
    if (nodes_[v.id].requires_grad) return true;
  }
  return false;
}

template <typename T>
Var Tape<T>::constant(Matrix<T> value) {
  return push(std::move(value), false, nullptr);
}

template <typename T>
Var Tape<T>::param(const Parameter<T>& p) {
  Node node;
  node.ref = &p.value;
  node.param = &p;
  node.requires_grad = record_;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
const Matrix<T>& Tape<T>::value(Var v) const {
  return nodes_.at(v.id).value();
}

template <typename T>
Matrix<T>& Tape<T>::grad(Var v) {
  Node& node = nodes_.at(v.id);
  if (node.grad.size() == 0) {
    const auto& val = node.value();
    node.grad = Matrix<T>::Zero(val.rows(), val.cols());
  }
  return node.grad;
}

template <typename T>
bool Tape<T>::has_grad(Var v) const {
  return nodes_.at(v.id).grad.size() > 0;
}

template <typename T>
void Tape<T>::backward(Var out) {
  const auto& v = value(out);
  if (v.rows() != 1 || v.cols() != 1) throw InvalidInput("backward: output must be 1x1");
  if (!record_) throw InvalidState("backward on a non-recording tape");
  grad(out)(0, 0) += T(1);
  for (int id = out.id; id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.backward && node.grad.size() > 0) node.backward();
  }
}

template <typename T>
Var Tape<T>::matmul(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.cols() != B.rows()) throw InvalidInput("matmul: inner dimensions differ");
  Matrix<T> C = A * B;
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(C), any_needs({a, b}), [this, a, b, out] {
    const auto& G = nodes_[out.id].grad;
    if (needs(a)) grad(a).noalias() += G * value(b).transpose();
    if (needs(b)) grad(b).noalias() += value(a).transpose() * G;
  });
}

template <typename T>
Var Tape<T>::matmul_nt(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.cols() != B.cols()) throw InvalidInput("matmul_nt: inner dimensions differ");
  Matrix<T> C = A * B.transpose();
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(C), any_needs({a, b}), [this, a, b, out] {
    const auto& G = nodes_[out.id].grad;
    if (needs(a)) grad(a).noalias() += G * value(b);
    if (needs(b)) grad(b).noalias() += G.transpose() * value(a);
  });
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Matrix<T> C = value(a) + value(b);
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(C), any_needs({a, b}), [this, a, b, out] {
    const auto& G = nodes_[out.id].grad;
    if (needs(a)) grad(a) += G;
    if (needs(b)) grad(b) += G;
  });
}

template <typename T>
Var Tape<T>::add_bias(Var a, Var bias) {
  const auto& A = value(a);
  const auto& B = value(bias);
  if (B.rows() != 1 || B.cols() != A.cols()) throw InvalidInput("add_bias: bias must be 1 x cols");
  Matrix<T> C = A.rowwise() + B.row(0);
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(C), any_needs({a, bias}), [this, a, bias, out] {
    const auto& G = nodes_[out.id].grad;
    if (needs(a)) grad(a) += G;
    if (needs(bias)) grad(bias) += G.colwise().sum();
  });
}

template <typename T>
Var Tape<T>::scale(Var a, T s) {
  Matrix<T> C = value(a) * s;
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(C), any_needs({a}), [this, a, s, out] {
    grad(a) += nodes_[out.id].grad * s;
  });
}

template <typename T>
Var Tape<T>::activate(Var a, Activation kind) {
  if (kind == Activation::kIdentity) return a;
  Matrix<T> C = value(a).unaryExpr([](T x) { return gelu(x); });
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(C), any_needs({a}), [this, a, out] {
    const auto& G = nodes_[out.id].grad;
    grad(a).array() += G.array() * value(a).unaryExpr([](T x) { return gelu_grad(x); }).array();
  });
}

template <typename T>
Var Tape<T>::layer_norm(Var x, Var gamma, Var beta, T eps) {
  const auto& X = value(x);
  const auto& g = value(gamma);
  const auto& b = value(beta);
  const Eigen::Index n = X.cols();
  if (g.rows() != 1 || g.cols() != n || b.rows() != 1 || b.cols() != n) {
    throw InvalidInput("layer_norm: gamma/beta must be 1 x cols");
  }
  Matrix<T> xhat(X.rows(), n);
  Eigen::Matrix<T, Eigen::Dynamic, 1> rstd(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const T mean = X.row(r).mean();
    const T var = (X.row(r).array() - mean).square().mean();
    rstd(r) = T(1) / std::sqrt(var + eps);
    xhat.row(r) = (X.row(r).array() - mean) * rstd(r);
  }
  Matrix<T> Y = (xhat.array().rowwise() * g.row(0).array()).rowwise() + b.row(0).array();
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(Y), any_needs({x, gamma, beta}),
              [this, x, gamma, beta, out, xhat = std::move(xhat), rstd = std::move(rstd)] {
                const auto& G = nodes_[out.id].grad;
                if (needs(gamma)) grad(gamma) += (G.array() * xhat.array()).colwise().sum().matrix();
                if (needs(beta)) grad(beta) += G.colwise().sum();
                if (needs(x)) {
                  const auto& gm = value(gamma);
                  const T inv_n = T(1) / static_cast<T>(xhat.cols());
                  auto& dX = grad(x);
                  for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
                    Eigen::Array<T, 1, Eigen::Dynamic> dxhat = G.row(r).array() * gm.row(0).array();
                    const T sum1 = dxhat.sum();
                    const T sum2 = (dxhat * xhat.row(r).array()).sum();
                    dX.row(r).array() +=
                        rstd(r) * (dxhat - inv_n * sum1 - xhat.row(r).array() * (inv_n * sum2));
                  }
                }
              });
}

template <typename T>
Var Tape<T>::softmax_rows(Var a) {
  const auto& A = value(a);
  Matrix<T> S(A.rows(), A.cols());
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    if (A.cols() == 0) continue;
    const T mx = A.row(r).maxCoeff();
    S.row(r) = (A.row(r).array() - mx).exp();
    S.row(r) /= S.row(r).sum();
  }
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(S), any_needs({a}), [this, a, out] {
    const auto& G = nodes_[out.id].grad;
    const auto& Sv = nodes_[out.id].value();
    auto& dA = grad(a);
    for (Eigen::Index r = 0; r < Sv.rows(); ++r) {
      const T dot = (G.row(r).array() * Sv.row(r).array()).sum();
      dA.row(r).array() += Sv.row(r).array() * (G.row(r).array() - dot);
    }
  });
}

template <typename T>
Var Tape<T>::gather_rows(Var a, std::vector<int> rows) {
  const auto& A = value(a);
  Matrix<T> C(static_cast<Eigen::Index>(rows.size()), A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= A.rows()) throw InvalidInput("gather_rows: index out of range");
    C.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
  }
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(C), any_needs({a}), [this, a, out, rows = std::move(rows)] {
    const auto& G = nodes_[out.id].grad;
    auto& dA = grad(a);
    for (std::size_t i = 0; i < rows.size(); ++i) dA.row(rows[i]) += G.row(static_cast<Eigen::Index>(i));
  });
}

template <typename T>
Var Tape<T>::concat_cols(Var a, Var b) {
  const Var parts[] = {a, b};
  return hconcat(parts);
}

template <typename T>
Var Tape<T>::hconcat(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidInput("hconcat: no parts");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool tracked = false;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw InvalidInput("hconcat: row counts differ");
    cols += value(p).cols();
    tracked = tracked || (record_ && needs(p));
  }
  Matrix<T> C(rows, cols);
  Eigen::Index offset = 0;
  for (Var p : parts) {
    const auto& P = value(p);
    C.middleCols(offset, P.cols()) = P;
    offset += P.cols();
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(C), tracked, [this, out, saved = std::move(saved)] {
    const auto& G = nodes_[out.id].grad;
    Eigen::Index off = 0;
    for (Var p : saved) {
      const Eigen::Index c = value(p).cols();
      if (needs(p)) grad(p) += G.middleCols(off, c);
      off += c;
    }
  });
}

template <typename T>
Var Tape<T>::slice_cols(Var a, int start, int count) {
  const auto& A = value(a);
  if (start < 0 || count < 0 || start + count > A.cols()) throw InvalidInput("slice_cols: out of range");
  Matrix<T> C = A.middleCols(start, count);
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(C), any_needs({a}), [this, a, start, count, out] {
    grad(a).middleCols(start, count) += nodes_[out.id].grad;
  });
}

template <typename T>
Var Tape<T>::bce_with_logits(Var logits, const Matrix<T>& targets) {
  const auto& Z = value(logits);
  require_same_shape(Z, targets, "bce_with_logits");
  if (Z.size() == 0) throw InvalidInput("bce_with_logits: empty input");
  T total = 0;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
      const T z = Z(i, j);
      const T y = targets(i, j);
      total += std::max(z, T(0)) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
  }
  const T inv = T(1) / static_cast<T>(Z.size());
  Matrix<T> L(1, 1);
  L(0, 0) = total * inv;
  Var out{static_cast<int>(nodes_.size())};
  return push(std::move(L), any_needs({logits}), [this, logits, targets, inv, out] {
    const T g = nodes_[out.id].grad(0, 0) * inv;
    const auto& Zv = value(logits);
    auto& dZ = grad(logits);
    for (Eigen::Index i = 0; i < Zv.rows(); ++i) {
      for (Eigen::Index j = 0; j < Zv.cols(); ++j) {
        const T sig = T(1) / (T(1) + std::exp(-Zv(i, j)));
        dZ(i, j) += g * (sig - targets(i, j));
      }
    }
  });
}

template class Tape<float>;
template class Tape<double>;

}  // namespace glirel
