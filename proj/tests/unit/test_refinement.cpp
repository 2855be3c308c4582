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
#include "glirel/refinement.hpp"

using namespace glirel;

namespace {

using M = Matrix<double>;

M random_matrix(Rng& rng, int rows, int cols) {
  M m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng, 0.0, 1.0);
  return m;
}

Refiner<double> make(RefineConfig cfg, int dim, std::uint64_t seed) {
  Refiner<double> r(cfg, dim, Activation::kGelu);
  Rng rng(seed);
  r.init(rng);
  return r;
}

}  // namespace

TEST_CASE("zero refinement layers pass both sides through bitwise") {
  Rng rng(1);
  RefineConfig cfg;
  cfg.refine_pairs = cfg.refine_labels = true;
  cfg.num_layers = 0;
  const auto refiner = make(cfg, 4, 1);
  const M k = random_matrix(rng, 5, 4), q = random_matrix(rng, 3, 4);
  const auto [k2, q2] = refine(k, q, refiner);
  CHECK(k2 == k);
  CHECK(q2 == q);
  CHECK_FALSE(cfg.active());
}

TEST_CASE("a disabled side is left untouched") {
  Rng rng(2);
  RefineConfig cfg;
  cfg.refine_pairs = true;
  cfg.refine_labels = false;
  cfg.num_layers = 2;
  const auto refiner = make(cfg, 4, 2);
  const M k = random_matrix(rng, 5, 4), q = random_matrix(rng, 3, 4);
  const auto [k2, q2] = refine(k, q, refiner);
  CHECK(q2 == q);
  CHECK(k2 != k);

  cfg.refine_pairs = false;
  cfg.refine_labels = true;
  const auto [k3, q3] = refine(k, q, make(cfg, 4, 2));
  CHECK(k3 == k);
  CHECK(q3 != q);
}

TEST_CASE("silent attention and identity FFN leave vectors unchanged") {
  RefineConfig cfg;
  cfg.refine_pairs = cfg.refine_labels = true;
  cfg.num_layers = 1;
  auto refiner = make(cfg, 2, 3);
  for (auto* blocks : {&refiner.pair_blocks(), &refiner.label_blocks()}) {
    for (auto& b : *blocks) {
      b.cross.zero_output();
      b.self.zero_output();
      b.ffn.set_identity();
    }
  }
  M k(1, 2), q(1, 2);
  k << 0.3, -1.2;
  q << 2.0, 0.5;
  const auto [k2, q2] = refine(k, q, refiner);
  CHECK(k2 == k);
  CHECK(q2 == q);
}

TEST_CASE("one refinement step matches a hand-built residual chain") {
  RefineConfig cfg;
  cfg.refine_pairs = true;
  cfg.num_layers = 1;
  cfg.ffn_residual = true;
  auto refiner = make(cfg, 2, 4);
  auto& block = refiner.pair_blocks()[0];
  // Single key: attention weights are 1, so cross-attention returns the
  // projected value of that key.
  block.self.zero_output();
  block.ffn.set_identity();
  M k(1, 2), q(1, 2);
  k << 1.0, 2.0;
  q << -0.5, 0.25;
  const M v = q * block.cross.wv.weight.value + block.cross.wv.bias.value;
  const M cross = v * block.cross.wo.weight.value + block.cross.wo.bias.value;
  const M x1 = k + cross;
  const M expected = x1 + x1;  // residual around the identity FFN
  const auto [k2, q2] = refine(k, q, refiner);
  CHECK(k2.isApprox(expected, 1e-12));
  CHECK(q2 == q);
}

TEST_CASE("refinement rejects more than two layers and bad head counts") {
  RefineConfig cfg;
  cfg.num_layers = 3;
  CHECK_THROWS_AS(cfg.check(4), ConfigError);
  cfg.num_layers = 1;
  cfg.num_heads = 3;
  CHECK_THROWS_AS(cfg.check(4), ConfigError);
  RefineConfig round;
  round.refine_labels = true;
  round.num_layers = 2;
  nlohmann::json j = round;
  const auto back = j.get<RefineConfig>();
  CHECK(back.refine_labels);
  CHECK(back.num_layers == 2);
}
