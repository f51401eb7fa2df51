// Copyright 2026 The dualgate Authors
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

// Draws built directly on std::mt19937_64 output so seeded streams are the
// same on every standard library (the std:: distributions are not).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace dualgate::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1).
inline double uniform01(Engine& e) {
  return static_cast<double>(e() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n), n > 0. Rejection keeps it unbiased.
inline std::uint64_t uniform_index(Engine& e, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = e();
  } while (x >= limit);
  return x % n;
}

inline double standard_normal(Engine& e) {
  const double u1 = 1.0 - uniform01(e);  // (0, 1]
  const double u2 = uniform01(e);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Index drawn with probability proportional to weights[i].
inline std::size_t weighted_index(Engine& e, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = uniform01(e) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return i;
  }
  return weights.size() - 1;
}

// +1 or -1 with equal probability.
inline int random_sign(Engine& e) { return (e() >> 63) != 0 ? 1 : -1; }

}  // namespace dualgate::rng
