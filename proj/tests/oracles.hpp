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

// Independent reference computations for the tests. Nothing here calls into
// the library's kernels; values are evaluated straight from the defining
// formulas, mostly in double precision.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lutgemm/bcq_tensor.hpp"

namespace oracle {

/// Neumaier-compensated sum of double terms.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// One table entry by enumeration: sum_j sigma_j(key) * x[base + j].
inline double lut_entry(std::span<const float> x, std::size_t table, std::uint32_t key,
                        std::size_t mu) {
  double s = 0.0;
  for (std::size_t j = 0; j < mu; ++j) {
    const std::size_t idx = table * mu + j;
    const double v = idx < x.size() ? x[idx] : 0.0;
    s += ((key >> j) & 1u) ? v : -v;
  }
  return s;
}

/// The same entry summed in float, left to right.
inline float lut_entry_float(std::span<const float> x, std::size_t table, std::uint32_t key,
                             std::size_t mu) {
  float s = 0.0f;
  for (std::size_t j = 0; j < mu; ++j) {
    const std::size_t idx = table * mu + j;
    const float v = idx < x.size() ? x[idx] : 0.0f;
    s = j == 0 ? (((key >> j) & 1u) ? v : -v) : s + (((key >> j) & 1u) ? v : -v);
  }
  return s;
}

/// Reconstructed weight in double: sum_i alpha_i * b_i + z.
inline double weight(const lutgemm::BcqTensor& t, std::size_t r, std::size_t c) {
  const std::size_t g = t.group_size() == 0 ? t.cols() : t.group_size();
  const std::size_t j = c / g;
  double v = 0.0;
  for (std::size_t i = 0; i < t.bits(); ++i) {
    const std::uint32_t word = t.planes()[(i * t.rows() + r) * ((t.cols() + 31) / 32) + c / 32];
    const double sign = ((word >> (c % 32)) & 1u) ? 1.0 : -1.0;
    v += static_cast<double>(t.scales()[(r * t.group_count() + j) * t.bits() + i]) * sign;
  }
  if (t.has_bias()) v += t.biases()[r * t.group_count() + j];
  return v;
}

/// y = W_hat x, compensated double accumulation of exact double products.
inline std::vector<double> bcq_gemv(const lutgemm::BcqTensor& t, std::span<const float> x) {
  std::vector<double> y(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    CompensatedSum s;
    for (std::size_t c = 0; c < t.cols(); ++c) s.add(weight(t, r, c) * x[c]);
    y[r] = s.value();
  }
  return y;
}

/// max_r sum_c |W_hat[r][c] x[c]|, the scale for relative deviations.
inline double gemv_magnitude(const lutgemm::BcqTensor& t, std::span<const float> x) {
  double mag = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < t.cols(); ++c) s += std::abs(weight(t, r, c) * x[c]);
    mag = std::max(mag, s);
  }
  return mag;
}

/// max_r |y_r - ref_r| / magnitude (0 when both are exactly equal).
template <typename A, typename B>
double relative_deviation(const A& y, const B& ref, double magnitude) {
  double dev = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    dev = std::max(dev, std::abs(static_cast<double>(y[r]) - static_cast<double>(ref[r])));
  }
  if (dev == 0.0) return 0.0;
  return dev / magnitude;
}

/// Uniform reconstruction s * code + z_hat.
inline double uniform_value(double s, std::uint32_t code, double z_hat) { return s * code + z_hat; }

/// Dense product in double with compensated summation.
inline std::vector<double> dense_gemv(const lutgemm::DenseMatrix& w, std::span<const float> x) {
  std::vector<double> y(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) {
    CompensatedSum s;
    for (std::size_t c = 0; c < w.cols; ++c) s.add(static_cast<double>(w(r, c)) * x[c]);
    y[r] = s.value();
  }
  return y;
}

}  // namespace oracle
