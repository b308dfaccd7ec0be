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

namespace lutgemm {

/// Storage accounting for a quantized m x n matrix.
///
/// The bit counts follow the usual model where every scaling factor (and
/// bias) is a 16-bit value, so binary_bits + scale_bits reproduces
/// m*n*q*(1 + 16/g). `as_built_bytes` is the size of the same tensor in the
/// on-disk format, which stores 32-bit reals and word-padded rows.
struct FootprintReport {
  std::uint64_t binary_bits = 0;  // S_b
  std::uint64_t scale_bits = 0;   // S_alpha, including the bias when present
  std::uint64_t total_bits = 0;   // S
  std::uint64_t bytes = 0;        // ceil(S / 8)
  double compression_ratio = 0.0;  // 16 * m * n / S
  std::uint64_t as_built_bytes = 0;
  double as_built_compression_ratio = 0.0;  // 2 * m * n / as_built_bytes
};

inline constexpr unsigned kScaleBitsAccounted = 16;

/// `group_size` 0 means row-wise.
FootprintReport memory_footprint(std::size_t m, std::size_t n, std::size_t q,
                                 std::size_t group_size, bool bias_present);

struct CostModel {
  std::uint64_t c_build = 0;
  std::uint64_t c_read = 0;
  std::uint64_t dense_macs = 0;
  double reduction_factor = 0.0;  // dense_macs / c_read
};

CostModel cost_model(std::size_t m, std::size_t n, std::size_t q, std::size_t mu);

}  // namespace lutgemm
