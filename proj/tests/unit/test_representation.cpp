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

#include "glirel/error.hpp"
#include "glirel/representation.hpp"
#include "support/oracles.hpp"

using namespace glirel;

namespace {

using M = Matrix<double>;

RepresentationLayers<double> random_layers(int dim, std::uint64_t seed) {
  RepresentationLayers<double> layers(dim, Activation::kGelu);
  Rng rng(seed);
  layers.init(rng);
  return layers;
}

M random_matrix(Rng& rng, int rows, int cols) {
  M m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng, 0.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("label projection shapes and the identity configuration") {
  auto layers = random_layers(4, 1);
  Rng rng(1);
  const M p = random_matrix(rng, 1, 4);
  CHECK(label_reps(p, layers).rows() == 1);

  auto zero = layers;
  zero.label_ffn.first.weight.value.setZero();
  zero.label_ffn.second.weight.value.setZero();
  CHECK(label_reps(M(M::Zero(3, 4)), zero).isZero(0.0));

  layers.label_ffn.set_identity();
  const M many = random_matrix(rng, 5, 4);
  CHECK(label_reps(many, layers) == many);
}

TEST_CASE("entity vectors concatenate span start and end") {
  auto layers = random_layers(2, 2);
  M h(3, 2);
  h << 1, 2, 3, 4, 5, 6;
  // First layer weight is [A; B] in row-vector form: out = start*A + end*B.
  M w(4, 2);
  w << 1, 0, 0, 1, 10, 0, 0, 10;
  layers.entity_ffn.first.weight.value = w;
  layers.entity_ffn.first.bias.value.setZero();
  layers.entity_ffn.second.weight.value.setIdentity();
  layers.entity_ffn.second.bias.value.setZero();
  layers.entity_ffn.activation = Activation::kIdentity;
  const M e = entity_reps(h, {{0, 2}, {1, 1}}, layers);
  CHECK(e(0, 0) == 1 + 10 * 5);
  CHECK(e(0, 1) == 2 + 10 * 6);
  CHECK(e(1, 0) == 3 + 10 * 3);
  CHECK(e(1, 1) == 4 + 10 * 4);

  CHECK(entity_reps(h, {}, layers).rows() == 0);
  CHECK_THROWS_AS(entity_reps(h, {{2, 3}}, layers), InvalidInput);
}

TEST_CASE("pair enumeration order and counts") {
  const auto three = enumerate_pairs(3, {});
  CHECK(three.pairs == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}});
  CHECK(enumerate_pairs(4, {}).size() == 12);
  CHECK(enumerate_pairs(0, {}).empty());
  CHECK(enumerate_pairs(1, {}).empty());

  const auto windowed = enumerate_pairs(3, {{0, 0}, {5, 5}, {100, 100}}, 10);
  CHECK(windowed.pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
}

TEST_CASE("pair enumeration agrees with the brute-force filter") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const int e = static_cast<int>(uniform_index(rng, 9));
    std::vector<EntitySpan> spans;
    for (int k = 0; k < e; ++k) {
      const int start = static_cast<int>(uniform_index(rng, 40));
      spans.push_back({start, start + static_cast<int>(uniform_index(rng, 3))});
    }
    const std::optional<int> window =
        bernoulli(rng, 0.5) ? std::optional<int>(static_cast<int>(uniform_index(rng, 20))) : std::nullopt;
    CHECK(enumerate_pairs(e, spans, window).pairs == oracle::all_pairs(e, spans, window));
  }
}

TEST_CASE("pair vectors keep pair order and symmetric weights give symmetric pairs") {
  auto layers = random_layers(3, 4);
  Rng rng(4);
  const M e = random_matrix(rng, 2, 3);
  const auto pairs = enumerate_pairs(2, {});
  const M k = pair_reps(e, pairs, layers);
  CHECK(k.rows() == 2);
  CHECK(pair_reps(e, PairIndexSet{}, layers).rows() == 0);

  // First layer [A; A]: the pair input is e_u A + e_v A, symmetric in u, v.
  const M a = layers.pair_ffn.first.weight.value.topRows(3);
  layers.pair_ffn.first.weight.value.bottomRows(3) = a;
  const M three = random_matrix(rng, 3, 3);
  const M sym = pair_reps(three, enumerate_pairs(3, {}), layers);
  CHECK(sym.row(0).isApprox(sym.row(2), 1e-12));  // (0,1) vs (1,0)
  CHECK(sym.row(1).isApprox(sym.row(4), 1e-12));  // (0,2) vs (2,0)
  CHECK(sym.row(3).isApprox(sym.row(5), 1e-12));  // (1,2) vs (2,1)

  CHECK_THROWS_AS(pair_reps(e, PairIndexSet{{{0, 0}}}, layers), InvalidInput);
  CHECK_THROWS_AS(pair_reps(e, PairIndexSet{{{0, 2}}}, layers), InvalidInput);
}

TEST_CASE("pair distance is measured from head end to tail start") {
  CHECK(pair_distance({0, 2}, {5, 6}) == 3);
  CHECK(pair_distance({5, 6}, {0, 2}) == 6);
}
