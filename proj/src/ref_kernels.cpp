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

#include "lutgemm/ref_kernels.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lutgemm/error.hpp"
#include "lutgemm/lut_kernel.hpp"
#include "lutgemm/parallel.hpp"

namespace lutgemm {

namespace {

constexpr std::size_t kDequantTileRows = 64;
constexpr std::size_t kDequantTileCols = 1024;  // multiple of 32
constexpr std::size_t kRowBlock = 4;

static_assert(std::endian::native == std::endian::little,
              "byte-wise plane access assumes little-endian words");

// kSignTable[b][k] is +1 when bit k of b is set, -1 otherwise.
constexpr auto kSignTable = [] {
  std::array<std::array<float, 8>, 256> t{};
  for (std::size_t b = 0; b < 256; ++b) {
    for (std::size_t k = 0; k < 8; ++k) t[b][k] = ((b >> k) & 1u) ? 1.0f : -1.0f;
  }
  return t;
}();

// acc[k] += sum_c w_k[c] * x[c] over [c0, c1), c ascending, for kRowBlock rows.
inline void dot_rows4(const float* w0, const float* w1, const float* w2, const float* w3,
                      const float* x, std::size_t c0, std::size_t c1, float* acc) {
  float a0 = acc[0], a1 = acc[1], a2 = acc[2], a3 = acc[3];
  for (std::size_t c = c0; c < c1; ++c) {
    const float xc = x[c];
    a0 += w0[c] * xc;
    a1 += w1[c] * xc;
    a2 += w2[c] * xc;
    a3 += w3[c] * xc;
  }
  acc[0] = a0;
  acc[1] = a1;
  acc[2] = a2;
  acc[3] = a3;
}

inline void dot_row(const float* w, const float* x, std::size_t c0, std::size_t c1, float& acc) {
  float a = acc;
  for (std::size_t c = c0; c < c1; ++c) a += w[c] * x[c];
  acc = a;
}

}  // namespace

DenseVector dense_gemv(const DenseMatrix& w, std::span<const float> x, unsigned threads) {
  if (x.size() != w.cols) {
    throw DimensionError("dense_gemv: vector length " + std::to_string(x.size()) +
                         " does not match matrix columns " + std::to_string(w.cols));
  }
  DenseVector y(w.rows, 0.0f);
  const std::size_t blocks = (w.rows + kRowBlock - 1) / kRowBlock;
  parallel_for(blocks, threads, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t r = b * kRowBlock;
      if (r + kRowBlock <= w.rows) {
        float acc[kRowBlock] = {0.0f, 0.0f, 0.0f, 0.0f};
        dot_rows4(w.row(r).data(), w.row(r + 1).data(), w.row(r + 2).data(),
                  w.row(r + 3).data(), x.data(), 0, w.cols, acc);
        std::copy(acc, acc + kRowBlock, y.begin() + static_cast<std::ptrdiff_t>(r));
      } else {
        for (std::size_t rr = r; rr < w.rows; ++rr) {
          float acc = 0.0f;
          dot_row(w.row(rr).data(), x.data(), 0, w.cols, acc);
          y[rr] = acc;
        }
      }
    }
  });
  return y;
}

DenseVector dequant_gemv(const BcqTensor& t, std::span<const float> x, unsigned threads) {
  if (x.size() != t.cols()) {
    throw DimensionError("dequant_gemv: vector length " + std::to_string(x.size()) +
                         " does not match tensor columns " + std::to_string(t.cols()));
  }
  const std::size_t m = t.rows();
  const std::size_t n = t.cols();
  const std::size_t q = t.bits();
  const std::size_t g = t.effective_group_size();
  DenseVector y(m, 0.0f);
  const std::size_t tiles = (m + kDequantTileRows - 1) / kDequantTileRows;

  parallel_for(tiles, threads, [&](std::size_t tile_begin, std::size_t tile_end) {
    std::vector<float> buf(kDequantTileRows * kDequantTileCols);
    float acc[kDequantTileRows];
    for (std::size_t tile = tile_begin; tile < tile_end; ++tile) {
      const std::size_t r0 = tile * kDequantTileRows;
      const std::size_t r1 = std::min(m, r0 + kDequantTileRows);
      std::fill(acc, acc + kDequantTileRows, 0.0f);

      for (std::size_t c0 = 0; c0 < n; c0 += kDequantTileCols) {
        const std::size_t c1 = std::min(n, c0 + kDequantTileCols);
        const std::size_t width = c1 - c0;

        // Expand the tile with the same per-element order as dequantized_value.
        for (std::size_t r = r0; r < r1; ++r) {
          float* dst = buf.data() + (r - r0) * kDequantTileCols;
          std::fill(dst, dst + width, 0.0f);
          for (std::size_t s0 = c0; s0 < c1;) {
            const std::size_t group = s0 / g;
            const std::size_t s1 = std::min(c1, (group + 1) * g);
            for (std::size_t i = 0; i < q; ++i) {
              const float a = t.scale(r, group, i);
              const std::uint32_t abits = std::bit_cast<std::uint32_t>(a);
              const auto* bytes = reinterpret_cast<const unsigned char*>(t.plane_row(i, r).data());
              std::size_t c = s0;
              // Whole bytes go through the sign table; a * (+-1) is exact.
              if (c % 8 == 0) {
                for (; c + 8 <= s1; c += 8) {
                  const float* sg = kSignTable[bytes[c / 8]].data();
                  float* d = dst + (c - c0);
                  for (std::size_t k = 0; k < 8; ++k) d[k] += a * sg[k];
                }
              }
              for (; c < s1; ++c) {
                const std::uint32_t bit = (bytes[c / 8] >> (c % 8)) & 1u;
                dst[c - c0] += std::bit_cast<float>(abits ^ ((bit ^ 1u) << 31));
              }
            }
            if (t.has_bias()) {
              const float z = t.bias(r, group);
              for (std::size_t c = s0; c < s1; ++c) dst[c - c0] += z;
            }
            s0 = s1;
          }
        }

        const float* xs = x.data() + c0;
        std::size_t r = r0;
        for (; r + kRowBlock <= r1; r += kRowBlock) {
          const float* base = buf.data() + (r - r0) * kDequantTileCols;
          dot_rows4(base, base + kDequantTileCols, base + 2 * kDequantTileCols,
                    base + 3 * kDequantTileCols, xs, 0, width, acc + (r - r0));
        }
        for (; r < r1; ++r) {
          dot_row(buf.data() + (r - r0) * kDequantTileCols, xs, 0, width, acc[r - r0]);
        }
      }
      std::copy(acc, acc + (r1 - r0), y.begin() + static_cast<std::ptrdiff_t>(r0));
    }
  });
  return y;
}

DenseVector bcq_gemv_naive(const BcqTensor& t, std::span<const float> x, std::size_t mu) {
  if (mu < kMinMu || mu > kMaxMu) throw ConfigError("bcq_gemv_naive: mu must be in [1, 12]");
  if (x.size() != t.cols()) {
    throw DimensionError("bcq_gemv_naive: vector length " + std::to_string(x.size()) +
                         " does not match tensor columns " + std::to_string(t.cols()));
  }
  if (t.group_size() != 0 && t.group_size() % mu != 0) {
    throw ConfigError("bcq_gemv_naive: group size is not a multiple of mu");
  }
  const std::size_t n = t.cols();
  const std::size_t q = t.bits();
  const std::size_t g = t.effective_group_size();
  DenseVector y(t.rows(), 0.0f);
  std::vector<float> plane_sums(q);

  for (std::size_t r = 0; r < t.rows(); ++r) {
    std::fill(plane_sums.begin(), plane_sums.end(), 0.0f);
    float bias_sum = 0.0f;
    for (std::size_t j = 0; j < t.group_count(); ++j) {
      const std::size_t g0 = j * g;
      const std::size_t g1 = std::min(n, g0 + g);
      for (std::size_t i = 0; i < q; ++i) {
        float p = 0.0f;
        for (std::size_t c0 = g0; c0 < g1; c0 += mu) {
          const std::size_t c1 = std::min(g1, c0 + mu);
          float chunk = t.sign(i, r, c0) > 0 ? x[c0] : -x[c0];
          for (std::size_t c = c0 + 1; c < c1; ++c) chunk += t.sign(i, r, c) > 0 ? x[c] : -x[c];
          p += chunk;
        }
        plane_sums[i] += t.scale(r, j, i) * p;
      }
      if (t.has_bias()) {
        float xs = 0.0f;
        for (std::size_t c0 = g0; c0 < g1; c0 += mu) {
          const std::size_t c1 = std::min(g1, c0 + mu);
          float chunk = x[c0];
          for (std::size_t c = c0 + 1; c < c1; ++c) chunk += x[c];
          xs += chunk;
        }
        bias_sum += t.bias(r, j) * xs;
      }
    }
    float acc = plane_sums[0];
    for (std::size_t i = 1; i < q; ++i) acc += plane_sums[i];
    if (t.has_bias()) acc += bias_sum;
    y[r] += acc;
  }
  return y;
}

double gemv_relative_deviation(std::span<const float> y, std::span<const float> ref,
                               const BcqTensor& t, std::span<const float> x) {
  if (y.size() != t.rows() || ref.size() != t.rows() || x.size() != t.cols()) {
    throw DimensionError("gemv_relative_deviation: shape mismatch");
  }
  double max_dev = 0.0;
  double magnitude = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    max_dev = std::max(max_dev, std::abs(static_cast<double>(y[r]) - ref[r]));
    double row = 0.0;
    for (std::size_t c = 0; c < t.cols(); ++c) {
      row += std::abs(static_cast<double>(dequantized_value(t, r, c)) * x[c]);
    }
    magnitude = std::max(magnitude, row);
  }
  if (max_dev == 0.0) return 0.0;
  if (magnitude == 0.0) return std::numeric_limits<double>::infinity();
  return max_dev / magnitude;
}

}  // namespace lutgemm
