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

#include "lutgemm/quantizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

#include "lutgemm/error.hpp"
#include "lutgemm/parallel.hpp"

namespace lutgemm {

namespace {

constexpr std::size_t kMaxAlternatingBits = 8;
constexpr double kMaxCondition = 1e12;

void check_group_size(std::size_t group_size, std::size_t cols, const char* who) {
  if (cols == 0) throw ConfigError(std::string(who) + ": empty group (matrix has no columns)");
  if (group_size > cols) throw ConfigError(std::string(who) + ": group size exceeds column count");
}

std::size_t group_count_for(std::size_t cols, std::size_t group_size) {
  const std::size_t g = group_size == 0 ? cols : group_size;
  return g == 0 ? 0 : (cols + g - 1) / g;
}

// Per-group BCQ fit: `signs` holds, for every element, a mask whose bit i is
// set when plane i is +1.
struct GroupFit {
  std::vector<float> alpha;
  std::vector<std::uint32_t> signs;
};

// Same summation order as dequantized_value (no bias).
float reconstruct(std::span<const float> alpha, std::uint32_t mask) {
  float v = 0.0f;
  for (std::size_t i = 0; i < alpha.size(); ++i) v += ((mask >> i) & 1u) ? alpha[i] : -alpha[i];
  return v;
}

double group_sse(std::span<const float> w, const GroupFit& fit) {
  double sse = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double d = static_cast<double>(w[k]) - reconstruct(fit.alpha, fit.signs[k]);
    sse += d * d;
  }
  return sse;
}

GroupFit fit_greedy(std::span<const float> w, std::size_t bits) {
  GroupFit fit;
  fit.alpha.assign(bits, 0.0f);
  fit.signs.assign(w.size(), 0u);
  std::vector<double> residual(w.begin(), w.end());
  for (std::size_t i = 0; i < bits; ++i) {
    double abs_sum = 0.0;
    for (double r : residual) abs_sum += std::abs(r);
    const float alpha = static_cast<float>(abs_sum / static_cast<double>(w.size()));
    fit.alpha[i] = alpha;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (residual[k] >= 0.0) {
        fit.signs[k] |= 1u << i;
        residual[k] -= alpha;
      } else {
        residual[k] += alpha;
      }
    }
  }
  return fit;
}

// Least-squares scales for fixed planes via an LDL^T factorization of B^T B.
// Returns false when the normal matrix is singular or its pivot spread
// exceeds kMaxCondition. For q = 1 the solution is exactly sum(b * w) / g,
// the same value the greedy fit computes.
bool solve_scales(std::span<const float> w, std::span<const std::uint32_t> signs, std::size_t q,
                  std::vector<float>& alpha) {
  std::array<double, kMaxAlternatingBits * kMaxAlternatingBits> gram{};
  std::array<double, kMaxAlternatingBits> rhs{};
  for (std::size_t k = 0; k < w.size(); ++k) {
    const std::uint32_t m = signs[k];
    for (std::size_t i = 0; i < q; ++i) {
      const double si = ((m >> i) & 1u) ? 1.0 : -1.0;
      rhs[i] += si * w[k];
      for (std::size_t j = 0; j <= i; ++j) {
        gram[i * q + j] += si * (((m >> j) & 1u) ? 1.0 : -1.0);
      }
    }
  }
  // In place: unit lower factor below the diagonal, D on it.
  double min_pivot = std::numeric_limits<double>::infinity();
  double max_pivot = 0.0;
  for (std::size_t j = 0; j < q; ++j) {
    double d = gram[j * q + j];
    for (std::size_t p = 0; p < j; ++p) d -= gram[j * q + p] * gram[j * q + p] * gram[p * q + p];
    if (!(d > 0.0)) return false;
    gram[j * q + j] = d;
    min_pivot = std::min(min_pivot, d);
    max_pivot = std::max(max_pivot, d);
    for (std::size_t i = j + 1; i < q; ++i) {
      double sum = gram[i * q + j];
      for (std::size_t p = 0; p < j; ++p) sum -= gram[i * q + p] * gram[j * q + p] * gram[p * q + p];
      gram[i * q + j] = sum / d;
    }
  }
  if (max_pivot / min_pivot > kMaxCondition) return false;

  std::array<double, kMaxAlternatingBits> y{};
  for (std::size_t i = 0; i < q; ++i) {
    double sum = rhs[i];
    for (std::size_t p = 0; p < i; ++p) sum -= gram[i * q + p] * y[p];
    y[i] = sum;
  }
  for (std::size_t i = 0; i < q; ++i) y[i] /= gram[i * q + i];
  for (std::size_t i = q; i-- > 0;) {
    for (std::size_t p = i + 1; p < q; ++p) y[i] -= gram[p * q + i] * y[p];
  }
  for (std::size_t i = 0; i < q; ++i) {
    if (!std::isfinite(y[i])) return false;
    alpha[i] = static_cast<float>(y[i]);
  }
  return true;
}

// Best sign pattern per element. Patterns are scanned from all-(+1) down so
// that exact ties resolve towards +1, matching sign(0) = +1.
void assign_signs(std::span<const float> w, std::span<const float> alpha,
                  std::vector<std::uint32_t>& signs) {
  const std::uint32_t patterns = 1u << alpha.size();
  std::array<float, 1u << kMaxAlternatingBits> value{};
  for (std::uint32_t k = 0; k < patterns; ++k) value[k] = reconstruct(alpha, k);
  for (std::size_t e = 0; e < w.size(); ++e) {
    std::uint32_t best = patterns - 1;
    double best_err = std::abs(static_cast<double>(w[e]) - value[best]);
    for (std::uint32_t k = patterns - 1; k-- > 0;) {
      const double err = std::abs(static_cast<double>(w[e]) - value[k]);
      if (err < best_err) {
        best_err = err;
        best = k;
      }
    }
    signs[e] = best;
  }
}

GroupFit fit_alternating(std::span<const float> w, std::size_t bits, std::size_t iters) {
  GroupFit best = fit_greedy(w, bits);
  double best_sse = group_sse(w, best);
  GroupFit cur = best;
  for (std::size_t it = 0; it < iters; ++it) {
    solve_scales(w, cur.signs, bits, cur.alpha);  // singular: keep previous scales
    assign_signs(w, cur.alpha, cur.signs);
    const double sse = group_sse(w, cur);
    if (sse > best_sse) break;
    best = cur;
    best_sse = sse;
  }
  return best;
}

template <typename FitFn>
BcqTensor quantize_groups(const DenseMatrix& w, std::size_t bits, std::size_t group_size,
                          FitFn&& fit_fn) {
  const std::size_t rows = w.rows;
  const std::size_t cols = w.cols;
  const std::size_t g = group_size == 0 ? cols : group_size;
  const std::size_t groups = group_count_for(cols, group_size);
  const std::size_t words = words_per_row(cols);
  std::vector<std::uint32_t> planes(bits * rows * words, 0u);
  std::vector<float> scales(rows * groups * bits, 0.0f);

  // Each row writes only its own scales and plane words.
  parallel_for(rows, 0, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      for (std::size_t j = 0; j < groups; ++j) {
        const std::size_t c0 = j * g;
        const std::size_t c1 = std::min(cols, c0 + g);
        const GroupFit fit = fit_fn(w.row(r).subspan(c0, c1 - c0));
        for (std::size_t i = 0; i < bits; ++i) {
          scales[(r * groups + j) * bits + i] = fit.alpha[i];
          std::uint32_t* dst = planes.data() + (i * rows + r) * words;
          for (std::size_t c = c0; c < c1; ++c) {
            if ((fit.signs[c - c0] >> i) & 1u) dst[c / 32] |= 1u << (c % 32);
          }
        }
      }
    }
  });
  return BcqTensor(rows, cols, bits, group_size, std::move(planes), std::move(scales));
}

}  // namespace

std::size_t UniformQuant::group_count() const { return group_count_for(cols, group_size); }

float UniformQuant::dequantized_value(std::size_t row, std::size_t col) const {
  const std::size_t idx = row * group_count() + col / effective_group_size();
  return scale[idx] * static_cast<float>(codes[row * cols + col]) + zero_offset[idx];
}

DenseMatrix UniformQuant::dequantize() const {
  DenseMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = dequantized_value(r, c);
  }
  return out;
}

std::string QuantMethod::name() const {
  switch (kind) {
    case Kind::rtn_uniform:
      return "rtn";
    case Kind::bcq_greedy:
      return "greedy";
    case Kind::bcq_alternating:
      return "alternating";
  }
  return "?";
}

QuantMethod QuantMethod::parse(const std::string& name, std::size_t iters) {
  if (name == "rtn") return rtn();
  if (name == "greedy") return greedy();
  if (name == "alternating") return alternating(iters);
  throw ConfigError("unknown quantization method '" + name + "'");
}

UniformQuant quantize_rtn(const DenseMatrix& w, std::size_t bits, std::size_t group_size) {
  if (bits < 1 || bits > 8) throw ConfigError("quantize_rtn: bits must be in [1, 8]");
  check_group_size(group_size, w.cols, "quantize_rtn");
  UniformQuant u;
  u.rows = w.rows;
  u.cols = w.cols;
  u.bits = bits;
  u.group_size = group_size;
  const std::size_t g = u.effective_group_size();
  const std::size_t groups = u.group_count();
  const int max_code = (1 << bits) - 1;
  u.codes.assign(w.rows * w.cols, 0);
  u.scale.assign(w.rows * groups, 1.0f);
  u.zero_offset.assign(w.rows * groups, 0.0f);

  for (std::size_t r = 0; r < w.rows; ++r) {
    for (std::size_t j = 0; j < groups; ++j) {
      const std::size_t c0 = j * g;
      const std::size_t c1 = std::min(w.cols, c0 + g);
      const auto seg = w.row(r).subspan(c0, c1 - c0);
      const auto [lo, hi] = std::minmax_element(seg.begin(), seg.end());
      const std::size_t idx = r * groups + j;
      u.zero_offset[idx] = *lo;
      if (*hi == *lo) {
        u.scale[idx] = 1.0f;  // codes stay 0
        continue;
      }
      const double range = static_cast<double>(*hi) - *lo;
      u.scale[idx] = static_cast<float>(range / max_code);
      // Codes come from the unrounded step so that exact halves round up.
      for (std::size_t c = c0; c < c1; ++c) {
        const double code = std::round((static_cast<double>(w(r, c)) - *lo) * max_code / range);
        u.codes[r * w.cols + c] =
            static_cast<std::uint8_t>(std::clamp(code, 0.0, static_cast<double>(max_code)));
      }
    }
  }
  return u;
}

BcqTensor uniform_to_bcq(const UniformQuant& u) {
  const std::size_t groups = u.group_count();
  const std::size_t words = words_per_row(u.cols);
  std::vector<std::uint32_t> planes(u.bits * u.rows * words, 0u);
  std::vector<float> scales(u.rows * groups * u.bits);
  std::vector<float> biases(u.rows * groups);

  for (std::size_t r = 0; r < u.rows; ++r) {
    for (std::size_t j = 0; j < groups; ++j) {
      const std::size_t idx = r * groups + j;
      float sum = 0.0f;
      for (std::size_t i = 0; i < u.bits; ++i) {
        const float a = std::ldexp(u.scale[idx], static_cast<int>(i) - 1);
        scales[idx * u.bits + i] = a;
        sum += a;
      }
      biases[idx] = sum + u.zero_offset[idx];
    }
    for (std::size_t c = 0; c < u.cols; ++c) {
      const std::uint32_t code = u.codes[r * u.cols + c];
      for (std::size_t i = 0; i < u.bits; ++i) {
        if ((code >> i) & 1u) planes[(i * u.rows + r) * words + c / 32] |= 1u << (c % 32);
      }
    }
  }
  return BcqTensor(u.rows, u.cols, u.bits, u.group_size, std::move(planes), std::move(scales),
                   std::move(biases));
}

BcqTensor quantize_bcq_greedy(const DenseMatrix& w, std::size_t bits, std::size_t group_size) {
  if (bits < 1) throw ConfigError("quantize_bcq_greedy: bits must be >= 1");
  if (bits > 32) throw ConfigError("quantize_bcq_greedy: bits must be <= 32");
  check_group_size(group_size, w.cols, "quantize_bcq_greedy");
  return quantize_groups(w, bits, group_size,
                         [bits](std::span<const float> seg) { return fit_greedy(seg, bits); });
}

BcqTensor quantize_bcq_alternating(const DenseMatrix& w, std::size_t bits,
                                   std::size_t group_size, std::size_t iters) {
  if (bits < 1 || bits > kMaxAlternatingBits) {
    throw ConfigError("quantize_bcq_alternating: bits must be in [1, 8]");
  }
  if (iters < 1) throw ConfigError("quantize_bcq_alternating: iters must be >= 1");
  check_group_size(group_size, w.cols, "quantize_bcq_alternating");
  return quantize_groups(w, bits, group_size, [bits, iters](std::span<const float> seg) {
    return fit_alternating(seg, bits, iters);
  });
}

BcqTensor quantize(const DenseMatrix& w, std::size_t bits, std::size_t group_size,
                   const QuantMethod& method) {
  switch (method.kind) {
    case QuantMethod::Kind::rtn_uniform:
      return uniform_to_bcq(quantize_rtn(w, bits, group_size));
    case QuantMethod::Kind::bcq_greedy:
      return quantize_bcq_greedy(w, bits, group_size);
    case QuantMethod::Kind::bcq_alternating:
      return quantize_bcq_alternating(w, bits, group_size, method.iters);
  }
  throw ConfigError("quantize: unknown method");
}

QuantError quantization_error(const DenseMatrix& w, const DenseMatrix& w_hat) {
  if (w.rows != w_hat.rows || w.cols != w_hat.cols) {
    throw DimensionError("quantization_error: shape mismatch");
  }
  QuantError e;
  double sse = 0.0;
  double norm = 0.0;
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    const double d = static_cast<double>(w.values[k]) - w_hat.values[k];
    sse += d * d;
    norm += static_cast<double>(w.values[k]) * w.values[k];
    e.max_abs = std::max(e.max_abs, std::abs(d));
  }
  if (!w.values.empty()) e.mse = sse / static_cast<double>(w.values.size());
  if (norm > 0.0) {
    e.rel_fro = std::sqrt(sse / norm);
  } else {
    e.rel_fro = sse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return e;
}

QuantError quantization_error(const DenseMatrix& w, const BcqTensor& t) {
  if (w.rows != t.rows() || w.cols != t.cols()) {
    throw DimensionError("quantization_error: shape mismatch");
  }
  return quantization_error(w, dequantize(t));
}

}  // namespace lutgemm
