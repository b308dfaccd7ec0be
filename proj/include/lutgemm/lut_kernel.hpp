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

/*
 * Lookup-table GEMV over BCQ weights.
 *
 * The activation vector x is cut into chunks of mu consecutive elements. For
 * every chunk one table of 2^mu entries is precomputed:
 *
 *     table[k] = sum_{j < mu} sigma_j(k) * x[chunk * mu + j],
 *     sigma_j(k) = +1 if bit j of k is set, else -1,
 *
 * with x past the end treated as zero. A plane row then contributes to the
 * product through one table read per chunk, keyed by the mu packed bits of
 * that chunk, instead of mu multiply-adds.
 *
 * Accumulation order (shared with bcq_gemv_naive, which makes the two agree
 * bit for bit). For each row r:
 *
 *   - chunk value: the signed terms are added left to right,
 *     ((s_0 x_0 + s_1 x_1) + s_2 x_2) + ...
 *   - per plane i and group j: P = 0; P += chunk value, chunks ascending;
 *     then S_i += alpha[r][j][i] * P. Groups ascending, S_i starts at 0.
 *   - bias (if any): Z = 0; Z += z[r][j] * sum_j, groups ascending, where
 *     sum_j = 0 + chunk totals of x over the group, chunks ascending.
 *   - y = S_0 + S_1 + ... + S_{q-1} (+ Z), left to right.
 *
 * The row state (P, S) is carried across column tiles, so the tile width only
 * changes loop blocking, never the result. Row tiles are distributed over
 * workers and each worker owns its output rows, so the thread count does not
 * change the result either.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lutgemm/bcq_tensor.hpp"

namespace lutgemm {

inline constexpr std::size_t kMinMu = 1;
inline constexpr std::size_t kMaxMu = 12;

/// Operation counts gathered by an instrumented kernel run.
struct OpCounters {
  std::uint64_t lut_build_adds = 0;  // one per table entry produced
  std::uint64_t lut_reads = 0;
  std::uint64_t scale_mults = 0;

  friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

struct LutBank {
  std::size_t mu = 0;
  std::size_t length = 0;      // len(x)
  std::size_t num_tables = 0;  // ceil(length / mu)
  std::vector<float> tables;   // [num_tables][2^mu]
  /// Group size the sums below were computed for (0 = row-wise).
  std::size_t group_size = 0;
  std::vector<float> group_sums;

  std::size_t table_size() const { return std::size_t{1} << mu; }
  std::span<const float> table(std::size_t t) const {
    return {tables.data() + t * table_size(), table_size()};
  }
  std::size_t bytes() const { return tables.size() * sizeof(float); }
};

struct KernelConfig {
  std::size_t mu = 8;
  /// Rows per tile; 0 picks 2048 for tall matrices and the full height
  /// otherwise.
  std::size_t tile_rows = 0;
  /// Tables per column tile (tile width = luts_per_tile * mu).
  std::size_t luts_per_tile = 64;
  /// Worker threads; 0 = hardware concurrency.
  unsigned threads = 0;
  /// When set, the kernel counts table reads and scale multiplies into it.
  OpCounters* counters = nullptr;

  std::size_t effective_tile_rows(std::size_t rows) const;
  void validate() const;
};

/// Builds ceil(len(x) / mu) tables. Each table is grown one activation at a
/// time: the 2^(j+1)-entry table over x_0..x_j is the 2^j-entry table with
/// x_j added (upper half) or subtracted (lower half), for O(2^mu) work per
/// table. `group_size` selects the layout of the precomputed group sums.
LutBank build_luts(std::span<const float> x, std::size_t mu, std::size_t group_size = 0,
                   OpCounters* counters = nullptr);

/// y = W_hat x through table lookups.
DenseVector lut_gemv(const BcqTensor& t, const LutBank& bank, const KernelConfig& cfg);

/// out += W_hat x. Requires out.size() == t.rows().
void lut_gemv_into(const BcqTensor& t, const LutBank& bank, const KernelConfig& cfg,
                   std::span<float> out);

struct OpCountModel {
  std::uint64_t lut_build_adds = 0;
  std::uint64_t lut_reads = 0;
  std::uint64_t scale_mults = 0;
};

/// Counts predicted for one table build plus one kernel call.
OpCountModel op_counts(std::size_t m, std::size_t n, std::size_t q, std::size_t mu,
                       std::size_t group_size = 0);

/// Reads the mu-bit key starting at column `bit_offset` of a packed row.
/// Keys may straddle a word boundary; bits past the row are zero.
inline std::uint32_t extract_key(std::span<const std::uint32_t> row, std::size_t bit_offset,
                                 std::size_t mu) {
  const std::size_t word = bit_offset / 32;
  const std::size_t shift = bit_offset % 32;
  std::uint64_t v = row[word] >> shift;
  if (shift + mu > 32 && word + 1 < row.size()) {
    v |= static_cast<std::uint64_t>(row[word + 1]) << (32 - shift);
  }
  return static_cast<std::uint32_t>(v & ((std::uint64_t{1} << mu) - 1));
}

}  // namespace lutgemm
