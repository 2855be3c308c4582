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

#include <doctest.h>

#include <cmath>
#include <functional>

#include "glirel/autograd.hpp"
#include "glirel/nn.hpp"

using namespace glirel;

namespace {

using M = Matrix<double>;
using Build = std::function<Var(Tape<double>&, std::vector<Var>&)>;

M random_matrix(Rng& rng, int rows, int cols) {
  M m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng, 0.0, 1.0);
  return m;
}

// sum(out .* weights), built row by row from tape ops.
double reduce(Tape<double>& tape, Var out, const M& weights, Var* loss) {
  Var total;
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    const Var term = tape.matmul_nt(tape.gather_rows(out, {static_cast<int>(i)}), tape.constant(weights.row(i)));
    total = total.valid() ? tape.add(total, term) : term;
  }
  *loss = total;
  return tape.value(total)(0, 0);
}

// Checks the gradient of sum(op(inputs) * W) against central differences.
double worst_error(const std::vector<M>& inputs, const Build& op, std::uint64_t seed) {
  Rng rng(seed);
  M weights;
  {
    Tape<double> probe(false);
    std::vector<Var> vars;
    for (const auto& x : inputs) vars.push_back(probe.constant(x));
    const auto& out = probe.value(op(probe, vars));
    weights = random_matrix(rng, static_cast<int>(out.rows()), static_cast<int>(out.cols()));
  }
  std::vector<Parameter<double>> params(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    params[i].value = inputs[i];
    params[i].index = static_cast<int>(i);
  }
  auto evaluate = [&](bool record, std::vector<M>* grads) {
    Tape<double> tape(record);
    std::vector<Var> vars;
    for (const auto& p : params) vars.push_back(tape.param(p));
    Var loss;
    const double value = reduce(tape, op(tape, vars), weights, &loss);
    if (grads != nullptr) {
      tape.backward(loss);
      for (auto& g : *grads) g.setZero();
      tape.for_each_param_grad([&](const Parameter<double>& p, const M& g) { (*grads)[p.index] += g; });
    }
    return value;
  };
  std::vector<M> grads;
  for (const auto& x : inputs) grads.push_back(M::Zero(x.rows(), x.cols()));
  evaluate(true, &grads);

  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (Eigen::Index k = 0; k < params[i].value.size(); ++k) {
      const double old = params[i].value.data()[k];
      params[i].value.data()[k] = old + h;
      const double up = evaluate(false, nullptr);
      params[i].value.data()[k] = old - h;
      const double down = evaluate(false, nullptr);
      params[i].value.data()[k] = old;
      const double fd = (up - down) / (2 * h);
      const double an = grads[i].data()[k];
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

constexpr double kTolerance = 1e-6;

}  // namespace

TEST_CASE("elementwise and matrix ops have exact gradients") {
  Rng rng(1);
  const M a = random_matrix(rng, 3, 4), b = random_matrix(rng, 3, 4), c = random_matrix(rng, 4, 2);
  const M row = random_matrix(rng, 1, 4);
  CHECK(worst_error({a, c}, [](auto& t, auto& v) { return t.matmul(v[0], v[1]); }, 1) < kTolerance);
  CHECK(worst_error({a, b}, [](auto& t, auto& v) { return t.matmul_nt(v[0], v[1]); }, 2) < kTolerance);
  CHECK(worst_error({a, b}, [](auto& t, auto& v) { return t.add(v[0], v[1]); }, 3) < kTolerance);
  CHECK(worst_error({a, row}, [](auto& t, auto& v) { return t.add_bias(v[0], v[1]); }, 4) < kTolerance);
  CHECK(worst_error({a}, [](auto& t, auto& v) { return t.scale(v[0], 0.37); }, 5) < kTolerance);
  CHECK(worst_error({a}, [](auto& t, auto& v) { return t.activate(v[0], Activation::kGelu); }, 6) < kTolerance);
  CHECK(worst_error({a}, [](auto& t, auto& v) { return t.softmax_rows(v[0]); }, 7) < kTolerance);
}

TEST_CASE("structural ops route gradients to the right entries") {
  Rng rng(2);
  const M a = random_matrix(rng, 4, 3), b = random_matrix(rng, 4, 2);
  CHECK(worst_error({a}, [](auto& t, auto& v) { return t.gather_rows(v[0], {3, 0, 3, 1}); }, 8) < kTolerance);
  CHECK(worst_error({a, b}, [](auto& t, auto& v) { return t.concat_cols(v[0], v[1]); }, 9) < kTolerance);
  CHECK(worst_error({a, b, a},
                    [](auto& t, auto& v) { return t.hconcat(std::vector<Var>{v[0], v[1], v[2]}); }, 10) <
        kTolerance);
  CHECK(worst_error({a}, [](auto& t, auto& v) { return t.slice_cols(v[0], 1, 2); }, 11) < kTolerance);
}

TEST_CASE("layer norm and BCE have exact gradients") {
  Rng rng(3);
  const M x = random_matrix(rng, 3, 5), gamma = random_matrix(rng, 1, 5), beta = random_matrix(rng, 1, 5);
  CHECK(worst_error({x, gamma, beta},
                    [](auto& t, auto& v) { return t.layer_norm(v[0], v[1], v[2], 1e-5); }, 12) < kTolerance);
  M targets(3, 5);
  for (Eigen::Index i = 0; i < targets.size(); ++i) targets.data()[i] = (i % 3 == 0) ? 1.0 : 0.0;
  CHECK(worst_error({x}, [&](auto& t, auto& v) { return t.bce_with_logits(v[0], targets); }, 13) < kTolerance);
}

TEST_CASE("a reused node accumulates gradient from every use") {
  Rng rng(4);
  const M a = random_matrix(rng, 2, 2);
  CHECK(worst_error({a}, [](auto& t, auto& v) { return t.matmul(v[0], v[0]); }, 14) < kTolerance);
  CHECK(worst_error({a}, [](auto& t, auto& v) { return t.add(v[0], t.scale(v[0], 2.0)); }, 15) < kTolerance);
}

TEST_CASE("BCE from logits is stable for large magnitudes") {
  Tape<double> tape(false);
  M logits(1, 2);
  logits << 800.0, -800.0;
  M targets(1, 2);
  targets << 1.0, 0.0;
  const double loss = tape.value(tape.bce_with_logits(tape.constant(logits), targets))(0, 0);
  CHECK(std::isfinite(loss));
  CHECK(loss < 1e-12);
}

TEST_CASE("a non-recording tape keeps values but no graph") {
  Tape<float> tape(false);
  Parameter<float> p;
  p.value = Matrix<float>::Ones(2, 2);
  const Var v = tape.param(p);
  CHECK(tape.value(tape.scale(v, 2.0f))(1, 1) == doctest::Approx(2.0));
  CHECK_FALSE(tape.recording());
}
