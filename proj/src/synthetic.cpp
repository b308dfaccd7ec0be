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

#include "lutgemm/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace lutgemm {

double SplitMix64::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(theta);
  has_spare_ = true;
  return radius * std::cos(theta);
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DenseMatrix m(rows, cols);
  for (float& v : m.values) v = static_cast<float>(rng.gaussian());
  return m;
}

DenseVector gaussian_vector(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DenseVector v(n);
  for (float& e : v) e = static_cast<float>(rng.gaussian());
  return v;
}

BcqTensor random_bcq(std::size_t rows, std::size_t cols, std::size_t bits, std::size_t group_size,
                     bool with_bias, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const std::size_t g = group_size == 0 ? cols : group_size;
  const std::size_t groups = g == 0 ? 0 : (cols + g - 1) / g;
  std::vector<std::uint32_t> planes(bits * rows * words_per_row(cols));
  for (std::size_t k = 0; k < planes.size(); k += 2) {
    const std::uint64_t r = rng.next();
    planes[k] = static_cast<std::uint32_t>(r);
    if (k + 1 < planes.size()) planes[k + 1] = static_cast<std::uint32_t>(r >> 32);
  }
  std::vector<float> scales(rows * groups * bits);
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const int plane = static_cast<int>(k % bits);
    scales[k] = static_cast<float>(std::ldexp(std::abs(rng.gaussian()), -plane));
  }
  std::optional<std::vector<float>> biases;
  if (with_bias) {
    biases.emplace(rows * groups);
    for (float& z : *biases) z = static_cast<float>(rng.gaussian());
  }
  return BcqTensor(rows, cols, bits, group_size, std::move(planes), std::move(scales),
                   std::move(biases));
}

}  // namespace lutgemm
