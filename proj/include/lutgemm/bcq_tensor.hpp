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
 * Binary-coding quantized (BCQ) weights.
 *
 * A row segment w of length g is represented as
 *
 *     w_hat = sum_i alpha_i * b_i + z,   b_i in {-1, +1}^g
 *
 * with one alpha per (row, group, bit-plane) and an optional bias z per
 * (row, group). The bit-planes b_i are stored packed: bit value 1 means +1,
 * bit value 0 means -1. Each row of a plane occupies ceil(n / 32) 32-bit
 * words; column c lives in word c / 32 at bit c % 32. Bits past column n
 * are always zero.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lutgemm {

using DenseVector = std::vector<float>;

/// Row-major m x n matrix of 32-bit reals.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0f) {}
  DenseMatrix(std::size_t r, std::size_t c, std::vector<float> v);

  float& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  float operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const float> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  std::span<float> row(std::size_t r) { return {values.data() + r * cols, cols}; }
};

/// An m x n matrix with entries in {-1, +1}.
struct SignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int8_t> values;

  std::int8_t operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

constexpr std::size_t words_per_row(std::size_t cols) { return (cols + 31) / 32; }

/// Packs q sign planes into the [plane][row][word] bit layout described above.
/// Throws DimensionError if the planes disagree in shape and ConfigError if an
/// entry is not exactly +1 or -1.
std::vector<std::uint32_t> pack_planes(std::span<const SignMatrix> planes);

/// Inverse of pack_planes. Padding bits are ignored.
std::vector<SignMatrix> unpack_planes(std::span<const std::uint32_t> packed, std::size_t bits,
                                      std::size_t rows, std::size_t cols);

class BcqTensor {
 public:
  /// `group_size` 0 means row-wise (one group spanning all columns).
  /// `planes` must hold bits * rows * words_per_row(cols) words; padding bits
  /// are cleared. `scales` is [row][group][bit]; `biases`, when given, is
  /// [row][group]. Every scale and bias must be finite.
  BcqTensor(std::size_t rows, std::size_t cols, std::size_t bits, std::size_t group_size,
            std::vector<std::uint32_t> planes, std::vector<float> scales,
            std::optional<std::vector<float>> biases = std::nullopt);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t bits() const { return bits_; }
  /// As given at construction; 0 for row-wise.
  std::size_t group_size() const { return group_size_; }
  /// Number of columns covered by a full group (cols() when row-wise).
  std::size_t effective_group_size() const { return group_size_ == 0 ? cols_ : group_size_; }
  std::size_t group_count() const { return groups_; }
  std::size_t words_per_row() const { return words_; }
  bool has_bias() const { return biases_.has_value(); }

  std::span<const std::uint32_t> planes() const { return planes_; }
  std::span<const std::uint32_t> plane_row(std::size_t plane, std::size_t row) const {
    return {planes_.data() + (plane * rows_ + row) * words_, words_};
  }
  bool bit(std::size_t plane, std::size_t row, std::size_t col) const {
    return (plane_row(plane, row)[col / 32] >> (col % 32)) & 1u;
  }
  int sign(std::size_t plane, std::size_t row, std::size_t col) const {
    return bit(plane, row, col) ? 1 : -1;
  }

  std::span<const float> scales() const { return scales_; }
  float scale(std::size_t row, std::size_t group, std::size_t plane) const {
    return scales_[(row * groups_ + group) * bits_ + plane];
  }
  std::span<const float> biases() const {
    return biases_ ? std::span<const float>(*biases_) : std::span<const float>();
  }
  float bias(std::size_t row, std::size_t group) const {
    return biases_ ? (*biases_)[row * groups_ + group] : 0.0f;
  }

  friend bool operator==(const BcqTensor&, const BcqTensor&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t bits_;
  std::size_t group_size_;
  std::size_t groups_;
  std::size_t words_;
  std::vector<std::uint32_t> planes_;
  std::vector<float> scales_;
  std::optional<std::vector<float>> biases_;
};

/// One reconstructed weight. Planes are added in ascending order starting
/// from zero, then the bias; every dequantizing path uses this order so that
/// their results agree bit for bit.
inline float dequantized_value(const BcqTensor& t, std::size_t row, std::size_t col) {
  const std::size_t group = col / t.effective_group_size();
  float v = 0.0f;
  for (std::size_t i = 0; i < t.bits(); ++i) {
    const float a = t.scale(row, group, i);
    v += t.bit(i, row, col) ? a : -a;
  }
  if (t.has_bias()) v += t.bias(row, group);
  return v;
}

DenseMatrix dequantize(const BcqTensor& t);

}  // namespace lutgemm
