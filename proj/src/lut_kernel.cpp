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

#include "lutgemm/lut_kernel.hpp"

#include <algorithm>
#include <mutex>
#include <string>

#include "lutgemm/error.hpp"
#include "lutgemm/parallel.hpp"

namespace lutgemm {

namespace {

constexpr std::size_t kDefaultTileRows = 2048;
constexpr std::size_t kRowBlock = 4;

void check_mu(std::size_t mu) {
  if (mu < kMinMu || mu > kMaxMu) {
    throw ConfigError("mu must be in [1, 12], got " + std::to_string(mu));
  }
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Chunk layout of a group structure: chunk c belongs to group c / per_group.
std::size_t chunks_per_group(std::size_t group_size, std::size_t mu, std::size_t num_tables) {
  return group_size == 0 ? num_tables : group_size / mu;
}

std::vector<float> compute_group_sums(const LutBank& bank, std::size_t group_size) {
  const std::size_t per_group = chunks_per_group(group_size, bank.mu, bank.num_tables);
  const std::size_t all_ones = bank.table_size() - 1;
  std::vector<float> sums;
  if (per_group == 0) return sums;
  sums.reserve(ceil_div(bank.num_tables, per_group));
  for (std::size_t c0 = 0; c0 < bank.num_tables; c0 += per_group) {
    const std::size_t c1 = std::min(bank.num_tables, c0 + per_group);
    float s = 0.0f;
    for (std::size_t c = c0; c < c1; ++c) s += bank.tables[c * bank.table_size() + all_ones];
    sums.push_back(s);
  }
  return sums;
}

template <std::size_t kMu>
inline std::uint32_t chunk_key(const std::uint32_t* row, std::size_t words, std::size_t chunk,
                               std::size_t mu) {
  if constexpr (kMu != 0 && 32 % kMu == 0) {
    constexpr std::size_t per_word = 32 / kMu;
    return (row[chunk / per_word] >> ((chunk % per_word) * kMu)) & ((1u << kMu) - 1u);
  } else {
    return extract_key({row, words}, chunk * mu, mu);
  }
}

struct KernelArgs {
  const BcqTensor* tensor;
  const LutBank* bank;
  std::span<const float> group_sums;
  std::size_t tile_rows;
  std::size_t tile_chunks;
  std::size_t per_group;
  unsigned threads;
  std::span<float> out;
};

template <std::size_t kMu, bool kCount>
void run_kernel(const KernelArgs& a, OpCounters* counters) {
  const BcqTensor& t = *a.tensor;
  const LutBank& bank = *a.bank;
  const std::size_t m = t.rows();
  const std::size_t q = t.bits();
  const std::size_t words = t.words_per_row();
  const std::size_t num_tables = bank.num_tables;
  const std::size_t table_size = bank.table_size();
  const std::size_t mu = bank.mu;
  const float* tables = bank.tables.data();
  const std::size_t row_tiles = ceil_div(m, a.tile_rows);
  std::mutex counter_mutex;

  parallel_for(row_tiles, a.threads, [&](std::size_t tile_begin, std::size_t tile_end) {
    std::vector<float> partial(a.tile_rows * q);  // P, per row and plane
    std::vector<float> scaled(a.tile_rows * q);   // S, per row and plane
    std::uint64_t reads = 0;
    std::uint64_t mults = 0;

    for (std::size_t tile = tile_begin; tile < tile_end; ++tile) {
      const std::size_t r0 = tile * a.tile_rows;
      const std::size_t r1 = std::min(m, r0 + a.tile_rows);
      std::fill(partial.begin(), partial.end(), 0.0f);
      std::fill(scaled.begin(), scaled.end(), 0.0f);

      for (std::size_t c0 = 0; c0 < num_tables; c0 += a.tile_chunks) {
        const std::size_t c1 = std::min(num_tables, c0 + a.tile_chunks);
        for (std::size_t rb = r0; rb < r1; rb += kRowBlock) {
          const std::size_t nr = std::min(kRowBlock, r1 - rb);
          std::size_t c = c0;
          while (c < c1) {
            const std::size_t group = c / a.per_group;
            const std::size_t group_end = std::min(num_tables, (group + 1) * a.per_group);
            const std::size_t seg_end = std::min(c1, group_end);
            for (std::size_t i = 0; i < q; ++i) {
              if (nr == kRowBlock) {
                // Four independent rows; each row's own order is unchanged.
                const std::uint32_t* w0 = t.plane_row(i, rb + 0).data();
                const std::uint32_t* w1 = t.plane_row(i, rb + 1).data();
                const std::uint32_t* w2 = t.plane_row(i, rb + 2).data();
                const std::uint32_t* w3 = t.plane_row(i, rb + 3).data();
                float p0 = partial[(rb + 0 - r0) * q + i];
                float p1 = partial[(rb + 1 - r0) * q + i];
                float p2 = partial[(rb + 2 - r0) * q + i];
                float p3 = partial[(rb + 3 - r0) * q + i];
                for (std::size_t cc = c; cc < seg_end; ++cc) {
                  const float* tbl = tables + cc * table_size;
                  p0 += tbl[chunk_key<kMu>(w0, words, cc, mu)];
                  p1 += tbl[chunk_key<kMu>(w1, words, cc, mu)];
                  p2 += tbl[chunk_key<kMu>(w2, words, cc, mu)];
                  p3 += tbl[chunk_key<kMu>(w3, words, cc, mu)];
                }
                if constexpr (kCount) reads += 4 * (seg_end - c);
                partial[(rb + 0 - r0) * q + i] = p0;
                partial[(rb + 1 - r0) * q + i] = p1;
                partial[(rb + 2 - r0) * q + i] = p2;
                partial[(rb + 3 - r0) * q + i] = p3;
              } else {
                for (std::size_t r = rb; r < rb + nr; ++r) {
                  const std::uint32_t* w = t.plane_row(i, r).data();
                  float p = partial[(r - r0) * q + i];
                  for (std::size_t cc = c; cc < seg_end; ++cc) {
                    p += tables[cc * table_size + chunk_key<kMu>(w, words, cc, mu)];
                    if constexpr (kCount) ++reads;
                  }
                  partial[(r - r0) * q + i] = p;
                }
              }
            }
            if (seg_end == group_end) {
              for (std::size_t r = rb; r < rb + nr; ++r) {
                float* p = &partial[(r - r0) * q];
                float* s = &scaled[(r - r0) * q];
                for (std::size_t i = 0; i < q; ++i) {
                  s[i] += t.scale(r, group, i) * p[i];
                  p[i] = 0.0f;
                  if constexpr (kCount) ++mults;
                }
              }
            }
            c = seg_end;
          }
        }
      }

      for (std::size_t r = r0; r < r1; ++r) {
        const float* s = &scaled[(r - r0) * q];
        float y = s[0];
        for (std::size_t i = 1; i < q; ++i) y += s[i];
        if (t.has_bias()) {
          float z = 0.0f;
          for (std::size_t j = 0; j < t.group_count(); ++j) z += t.bias(r, j) * a.group_sums[j];
          y += z;
        }
        a.out[r] += y;
      }
    }

    if constexpr (kCount) {
      std::lock_guard lock(counter_mutex);
      counters->lut_reads += reads;
      counters->scale_mults += mults;
    }
  });
}

template <std::size_t kMu>
void dispatch_count(const KernelArgs& a, OpCounters* counters) {
  if (counters != nullptr) {
    run_kernel<kMu, true>(a, counters);
  } else {
    run_kernel<kMu, false>(a, nullptr);
  }
}

}  // namespace

std::size_t KernelConfig::effective_tile_rows(std::size_t rows) const {
  if (tile_rows != 0) return tile_rows;
  return rows >= kDefaultTileRows ? kDefaultTileRows : std::max<std::size_t>(rows, 1);
}

void KernelConfig::validate() const {
  check_mu(mu);
  if (luts_per_tile < 1) throw ConfigError("luts_per_tile must be >= 1");
}

LutBank build_luts(std::span<const float> x, std::size_t mu, std::size_t group_size,
                   OpCounters* counters) {
  check_mu(mu);
  if (x.empty()) throw DimensionError("build_luts: empty activation vector");
  if (group_size > x.size()) throw ConfigError("build_luts: group size exceeds vector length");
  if (group_size != 0 && group_size % mu != 0) {
    throw ConfigError("build_luts: group size " + std::to_string(group_size) +
                      " is not a multiple of mu " + std::to_string(mu));
  }
  LutBank bank;
  bank.mu = mu;
  bank.length = x.size();
  bank.num_tables = ceil_div(x.size(), mu);
  bank.group_size = group_size;
  const std::size_t size = bank.table_size();
  bank.tables.assign(bank.num_tables * size, 0.0f);

  for (std::size_t t = 0; t < bank.num_tables; ++t) {
    float* tbl = bank.tables.data() + t * size;
    const std::size_t base = t * mu;
    auto act = [&](std::size_t j) { return base + j < x.size() ? x[base + j] : 0.0f; };
    tbl[0] = -act(0);
    tbl[1] = act(0);
    for (std::size_t j = 1, half = 2; j < mu; ++j, half *= 2) {
      const float xj = act(j);
      for (std::size_t k = 0; k < half; ++k) {
        tbl[k + half] = tbl[k] + xj;
        tbl[k] = tbl[k] - xj;
      }
    }
  }
  if (counters != nullptr) counters->lut_build_adds += bank.num_tables * size;
  bank.group_sums = compute_group_sums(bank, group_size);
  return bank;
}

void lut_gemv_into(const BcqTensor& t, const LutBank& bank, const KernelConfig& cfg,
                   std::span<float> out) {
  cfg.validate();
  if (bank.mu != cfg.mu) {
    throw ConfigError("lut_gemv: bank built with mu=" + std::to_string(bank.mu) +
                      " but config has mu=" + std::to_string(cfg.mu));
  }
  if (bank.length != t.cols()) {
    throw DimensionError("lut_gemv: vector length " + std::to_string(bank.length) +
                         " does not match tensor columns " + std::to_string(t.cols()));
  }
  if (out.size() != t.rows()) {
    throw DimensionError("lut_gemv: output length " + std::to_string(out.size()) +
                         " does not match tensor rows " + std::to_string(t.rows()));
  }
  if (t.group_size() != 0 && t.group_size() % cfg.mu != 0) {
    throw ConfigError("lut_gemv: group size " + std::to_string(t.group_size()) +
                      " is not a multiple of mu " + std::to_string(cfg.mu));
  }
  if (t.rows() == 0) return;

  std::vector<float> local_sums;
  std::span<const float> group_sums = bank.group_sums;
  if (t.has_bias()) {
    const std::size_t bank_g = bank.group_size == 0 ? bank.length : bank.group_size;
    if (bank_g != t.effective_group_size()) {
      local_sums = compute_group_sums(bank, t.group_size());
      group_sums = local_sums;
    }
  }

  KernelArgs args{&t,
                  &bank,
                  group_sums,
                  cfg.effective_tile_rows(t.rows()),
                  cfg.luts_per_tile,
                  chunks_per_group(t.group_size(), cfg.mu, bank.num_tables),
                  cfg.threads,
                  out};
  switch (cfg.mu) {
    case 1:
      dispatch_count<1>(args, cfg.counters);
      break;
    case 2:
      dispatch_count<2>(args, cfg.counters);
      break;
    case 4:
      dispatch_count<4>(args, cfg.counters);
      break;
    case 8:
      dispatch_count<8>(args, cfg.counters);
      break;
    default:
      dispatch_count<0>(args, cfg.counters);
      break;
  }
}

DenseVector lut_gemv(const BcqTensor& t, const LutBank& bank, const KernelConfig& cfg) {
  DenseVector y(t.rows(), 0.0f);
  lut_gemv_into(t, bank, cfg, y);
  return y;
}

OpCountModel op_counts(std::size_t m, std::size_t n, std::size_t q, std::size_t mu,
                       std::size_t group_size) {
  check_mu(mu);
  const std::size_t g = group_size == 0 ? n : group_size;
  OpCountModel c;
  c.lut_build_adds = (std::uint64_t{1} << mu) * ceil_div(n, mu);
  c.lut_reads = static_cast<std::uint64_t>(m) * ceil_div(n, mu) * q;
  c.scale_mults = static_cast<std::uint64_t>(m) * (g == 0 ? 0 : ceil_div(n, g)) * q;
  return c;
}

}  // namespace lutgemm
