// Copyright 2026 The lutgemm Authors.
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

#include <cstddef>
#include <cstdint>

#include "lutgemm/bcq_tensor.hpp"

namespace lutgemm {

/// SplitMix64. Used for every synthetic input so that a seed names the same
/// data on every platform (std:: distributions are implementation-defined).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return bound == 0 ? 0 : next() % bound; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double gaussian();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);
DenseVector gaussian_vector(std::size_t n, std::uint64_t seed);

/// A BCQ tensor with uniformly random planes, scales drawn from
/// |N(0, 1)| / 2^i for plane i and, if requested, N(0, 1) biases.
BcqTensor random_bcq(std::size_t rows, std::size_t cols, std::size_t bits, std::size_t group_size,
                     bool with_bias, std::uint64_t seed);

}  // namespace lutgemm
