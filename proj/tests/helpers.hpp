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
#include <optional>
#include <vector>

#include "lutgemm/bcq_tensor.hpp"
#include "lutgemm/synthetic.hpp"

namespace testing {

/// Builds a tensor from explicit signs given as [plane][row][col] in
/// row-major order.
inline lutgemm::BcqTensor make_tensor(std::size_t rows, std::size_t cols, std::size_t bits,
                                      std::size_t group_size, const std::vector<int>& signs,
                                      std::vector<float> scales,
                                      std::optional<std::vector<float>> biases = std::nullopt) {
  std::vector<lutgemm::SignMatrix> planes;
  for (std::size_t i = 0; i < bits; ++i) {
    lutgemm::SignMatrix p{rows, cols, {}};
    for (std::size_t k = 0; k < rows * cols; ++k) {
      p.values.push_back(static_cast<std::int8_t>(signs[i * rows * cols + k]));
    }
    planes.push_back(std::move(p));
  }
  return lutgemm::BcqTensor(rows, cols, bits, group_size, lutgemm::pack_planes(planes),
                            std::move(scales), std::move(biases));
}

/// The 4 x 6 sign matrix used throughout the examples.
inline const std::vector<int> kExampleSigns = {
    +1, +1, -1, -1, -1, +1,  //
    +1, +1, -1, +1, +1, -1,  //
    +1, +1, -1, -1, -1, -1,  //
    -1, -1, +1, -1, -1, +1,
};

inline std::vector<float> iota_vector(std::size_t n) {
  std::vector<float> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<float>(i + 1);
  return x;
}

}  // namespace testing
