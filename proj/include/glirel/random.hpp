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
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace glirel {

// All stochastic code draws from this engine. The helpers below avoid the
// implementation-defined std distributions so that seeded runs reproduce
// across standard libraries.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Box-Muller, one draw per call.
inline double normal(Rng& rng, double mean, double stddev) {
  double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

// Order-preserving uniform sample of k items (selection sampling).
template <typename T>
std::vector<T> sample_ordered(const std::vector<T>& items, std::size_t k, Rng& rng) {
  if (k >= items.size()) return items;
  std::vector<T> out;
  out.reserve(k);
  std::size_t remaining = items.size();
  for (const auto& item : items) {
    if (out.size() == k) break;
    if (uniform01(rng) * static_cast<double>(remaining) < static_cast<double>(k - out.size())) {
      out.push_back(item);
    }
    --remaining;
  }
  return out;
}

}  // namespace glirel
