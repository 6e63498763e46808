// Copyright 2026 The qnode Authors
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

// rng.hpp: Philox4x32-10 counter-based generator.
//
// A generator is fully determined by a 64-bit key (the user seed) and two
// 32-bit stream words. Streams never overlap, so work can be split across
// replicates, settings or shots without coordinating state.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace qnode::rng {

class Philox {
 public:
  using result_type = std::uint32_t;

  Philox(std::uint64_t seed, std::uint32_t stream_a = 0, std::uint32_t stream_b = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// One Philox4x32-10 block for the given counter and key.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

/// Binomial draw; p is clamped to [0, 1] so that rounding dust in
/// Born probabilities never reaches the distribution constructor.
template <typename Gen>
long long binomial(long long n, double p, Gen& gen) {
  p = std::clamp(p, 0.0, 1.0);
  if (n <= 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  return std::binomial_distribution<long long>(n, p)(gen);
}

template <typename Gen>
long long poisson(double mean, Gen& gen) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<long long>(mean)(gen);
}

/// Multinomial draw by sequential conditional binomials. Probabilities
/// need not be normalized; negative entries are treated as zero.
template <typename Gen>
void multinomial(long long n, std::span<const double> probs, std::span<long long> out, Gen& gen) {
  double mass = 0.0;
  for (double p : probs) mass += std::max(p, 0.0);
  long long left = n;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double p = std::max(probs[k], 0.0);
    if (k + 1 == probs.size()) {
      out[k] = left;
      break;
    }
    if (mass <= 0.0) {
      out[k] = 0;
      continue;
    }
    out[k] = binomial(left, p / mass, gen);
    left -= out[k];
    mass -= p;
  }
}

/// Geometric number of trials up to and including the first success (>= 1).
template <typename Gen>
long long trials_until_success(double p, Gen& gen) {
  return std::geometric_distribution<long long>(p)(gen) + 1;
}

}  // namespace qnode::rng
