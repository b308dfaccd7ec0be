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
#include <cstring>
#include <span>

#include "lutgemm/bcq_tensor.hpp"

namespace lutgemm {

/// y[r] = sum_c W[r][c] * x[c], accumulated from zero in ascending c.
DenseVector dense_gemv(const DenseMatrix& w, std::span<const float> x, unsigned threads = 1);

/// Dequantize-then-multiply baseline. Weights are expanded 64 rows at a time
/// into a scratch tile and multiplied there, so the full matrix is never
/// materialized. Bit-identical to dense_gemv(dequantize(t), x).
DenseVector dequant_gemv(const BcqTensor& t, std::span<const float> x, unsigned threads = 1);

/// Per-bit BCQ product without tables: every chunk value is summed directly
/// from signed activations. `mu` only fixes the chunking of the summation,
/// which follows the order documented in lut_kernel.hpp; the result equals
/// lut_gemv with the same mu bit for bit.
DenseVector bcq_gemv_naive(const BcqTensor& t, std::span<const float> x, std::size_t mu = 8);

/// max_r |y_r - ref_r| / max_r sum_c |W_hat[r][c] * x_c|.
///
/// Normalizing by the magnitude of the summed terms rather than by |ref_r|
/// keeps the measure meaningful for rows whose exact value cancels to ~0.
double gemv_relative_deviation(std::span<const float> y, std::span<const float> ref,
                               const BcqTensor& t, std::span<const float> x);

/// Equality of the bit patterns (distinguishes -0 from +0).
inline bool bitwise_equal(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);
}

}  // namespace lutgemm
