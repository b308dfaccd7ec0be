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
#include <string>
#include <vector>

#include "lutgemm/bcq_tensor.hpp"

namespace lutgemm {

/// Asymmetric uniform quantization: w_hat = scale * code + zero_offset, with
/// one (scale, zero_offset) pair per (row, group).
struct UniformQuant {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t bits = 0;
  std::size_t group_size = 0;  // 0 = row-wise
  std::vector<std::uint8_t> codes;  // [row][col], each < 2^bits
  std::vector<float> scale;         // [row][group]
  std::vector<float> zero_offset;   // [row][group]

  std::size_t effective_group_size() const { return group_size == 0 ? cols : group_size; }
  std::size_t group_count() const;
  float dequantized_value(std::size_t row, std::size_t col) const;
  DenseMatrix dequantize() const;
};

struct QuantMethod {
  enum class Kind { rtn_uniform, bcq_greedy, bcq_alternating };
  Kind kind = Kind::bcq_greedy;
  std::size_t iters = 3;  // bcq_alternating only

  static QuantMethod rtn() { return {Kind::rtn_uniform, 0}; }
  static QuantMethod greedy() { return {Kind::bcq_greedy, 0}; }
  static QuantMethod alternating(std::size_t iters = 3) { return {Kind::bcq_alternating, iters}; }

  /// "rtn", "greedy" or "alternating".
  std::string name() const;
  static QuantMethod parse(const std::string& name, std::size_t iters = 3);
};

/// Min-max round-to-nearest. q in [1, 8]. A constant group gets scale 1,
/// codes 0 and zero_offset equal to the constant, so it dequantizes exactly.
UniformQuant quantize_rtn(const DenseMatrix& w, std::size_t bits, std::size_t group_size);

/// Re-expresses a uniform quantization as extended BCQ:
/// alpha_i = 2^(i-1) * s, z = sum_i alpha_i + zero_offset, plane i = bit i of
/// the code.
BcqTensor uniform_to_bcq(const UniformQuant& u);

/// Greedy residual fitting: for each bit b_i = sign(r) with sign(0) = +1,
/// alpha_i = mean |r|, r -= alpha_i * b_i. No bias.
BcqTensor quantize_bcq_greedy(const DenseMatrix& w, std::size_t bits, std::size_t group_size);

/// Alternating refinement seeded by the greedy solution. Each iteration
/// solves the q x q normal equations for the scales with the planes fixed,
/// then picks the best of the 2^q sign patterns for every weight with the
/// scales fixed. An iteration that would increase the group's squared error
/// (which only happens through rounding) is discarded, as is a scale update
/// whose normal matrix is singular.
BcqTensor quantize_bcq_alternating(const DenseMatrix& w, std::size_t bits,
                                   std::size_t group_size, std::size_t iters);

/// Dispatches on `method`; rtn goes through uniform_to_bcq.
BcqTensor quantize(const DenseMatrix& w, std::size_t bits, std::size_t group_size,
                   const QuantMethod& method);

struct QuantError {
  double mse = 0.0;
  double rel_fro = 0.0;
  double max_abs = 0.0;
};

QuantError quantization_error(const DenseMatrix& w, const DenseMatrix& w_hat);
QuantError quantization_error(const DenseMatrix& w, const BcqTensor& t);

}  // namespace lutgemm
