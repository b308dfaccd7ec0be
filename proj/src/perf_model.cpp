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

#include "lutgemm/perf_model.hpp"

#include "lutgemm/error.hpp"
#include "lutgemm/io.hpp"

namespace lutgemm {

FootprintReport memory_footprint(std::size_t m, std::size_t n, std::size_t q,
                                 std::size_t group_size, bool bias_present) {
  if (m == 0 || n == 0 || q == 0) throw ConfigError("memory_footprint: dimensions must be positive");
  if (group_size > n) throw ConfigError("memory_footprint: group size exceeds column count");
  const std::uint64_t g = group_size == 0 ? n : group_size;
  const std::uint64_t groups = (n + g - 1) / g;

  FootprintReport f;
  f.binary_bits = std::uint64_t{m} * n * q;
  f.scale_bits = kScaleBitsAccounted * std::uint64_t{m} * groups * q;
  if (bias_present) f.scale_bits += kScaleBitsAccounted * std::uint64_t{m} * groups;
  f.total_bits = f.binary_bits + f.scale_bits;
  f.bytes = (f.total_bits + 7) / 8;
  const double dense_bits = 16.0 * static_cast<double>(m) * static_cast<double>(n);
  f.compression_ratio = dense_bits / static_cast<double>(f.total_bits);
  f.as_built_bytes = qtensor_file_size(m, n, q, group_size, bias_present);
  f.as_built_compression_ratio = dense_bits / 8.0 / static_cast<double>(f.as_built_bytes);
  return f;
}

CostModel cost_model(std::size_t m, std::size_t n, std::size_t q, std::size_t mu) {
  if (m == 0 || n == 0 || q == 0 || mu == 0) {
    throw ConfigError("cost_model: dimensions must be positive");
  }
  if (mu >= 63) throw ConfigError("cost_model: mu too large");
  const std::uint64_t tables = (n + mu - 1) / mu;
  CostModel c;
  c.c_build = (std::uint64_t{1} << mu) * tables;
  c.c_read = std::uint64_t{m} * tables * q;
  c.dense_macs = std::uint64_t{m} * n;
  c.reduction_factor = static_cast<double>(c.dense_macs) / static_cast<double>(c.c_read);
  return c;
}

}  // namespace lutgemm
