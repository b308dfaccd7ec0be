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

#include "lutgemm/bcq_tensor.hpp"

#include <cmath>
#include <string>

#include "lutgemm/error.hpp"

namespace lutgemm {

DenseMatrix::DenseMatrix(std::size_t r, std::size_t c, std::vector<float> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != rows * cols) {
    throw DimensionError("DenseMatrix: expected " + std::to_string(rows * cols) + " values, got " +
                         std::to_string(values.size()));
  }
}

std::vector<std::uint32_t> pack_planes(std::span<const SignMatrix> planes) {
  if (planes.empty()) return {};
  const std::size_t rows = planes.front().rows;
  const std::size_t cols = planes.front().cols;
  const std::size_t words = words_per_row(cols);
  std::vector<std::uint32_t> packed(planes.size() * rows * words, 0u);
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const SignMatrix& p = planes[i];
    if (p.rows != rows || p.cols != cols || p.values.size() != rows * cols) {
      throw DimensionError("pack_planes: plane " + std::to_string(i) + " is " +
                           std::to_string(p.rows) + "x" + std::to_string(p.cols) + ", expected " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
    for (std::size_t r = 0; r < rows; ++r) {
      std::uint32_t* dst = packed.data() + (i * rows + r) * words;
      for (std::size_t c = 0; c < cols; ++c) {
        const std::int8_t s = p(r, c);
        if (s == 1) {
          dst[c / 32] |= 1u << (c % 32);
        } else if (s != -1) {
          throw ConfigError("pack_planes: entry is not +1 or -1");
        }
      }
    }
  }
  return packed;
}

std::vector<SignMatrix> unpack_planes(std::span<const std::uint32_t> packed, std::size_t bits,
                                      std::size_t rows, std::size_t cols) {
  const std::size_t words = words_per_row(cols);
  if (packed.size() != bits * rows * words) {
    throw DimensionError("unpack_planes: word count does not match shape");
  }
  std::vector<SignMatrix> planes(bits);
  for (std::size_t i = 0; i < bits; ++i) {
    SignMatrix& p = planes[i];
    p.rows = rows;
    p.cols = cols;
    p.values.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::uint32_t* src = packed.data() + (i * rows + r) * words;
      for (std::size_t c = 0; c < cols; ++c) {
        p.values[r * cols + c] = ((src[c / 32] >> (c % 32)) & 1u) ? 1 : -1;
      }
    }
  }
  return planes;
}

BcqTensor::BcqTensor(std::size_t rows, std::size_t cols, std::size_t bits, std::size_t group_size,
                     std::vector<std::uint32_t> planes, std::vector<float> scales,
                     std::optional<std::vector<float>> biases)
    : rows_(rows),
      cols_(cols),
      bits_(bits),
      group_size_(group_size),
      groups_(0),
      words_(lutgemm::words_per_row(cols)),
      planes_(std::move(planes)),
      scales_(std::move(scales)),
      biases_(std::move(biases)) {
  if (bits_ < 1) throw ConfigError("BcqTensor: bits must be >= 1");
  if (group_size_ > cols_) throw ConfigError("BcqTensor: group size exceeds column count");
  const std::size_t g = effective_group_size();
  groups_ = g == 0 ? 0 : (cols_ + g - 1) / g;

  if (planes_.size() != bits_ * rows_ * words_) {
    throw DimensionError("BcqTensor: expected " + std::to_string(bits_ * rows_ * words_) +
                         " plane words, got " + std::to_string(planes_.size()));
  }
  if (scales_.size() != rows_ * groups_ * bits_) {
    throw DimensionError("BcqTensor: expected " + std::to_string(rows_ * groups_ * bits_) +
                         " scales, got " + std::to_string(scales_.size()));
  }
  if (biases_ && biases_->size() != rows_ * groups_) {
    throw DimensionError("BcqTensor: expected " + std::to_string(rows_ * groups_) +
                         " biases, got " + std::to_string(biases_->size()));
  }
  for (float a : scales_) {
    if (!std::isfinite(a)) throw ConfigError("BcqTensor: non-finite scale");
  }
  if (biases_) {
    for (float z : *biases_) {
      if (!std::isfinite(z)) throw ConfigError("BcqTensor: non-finite bias");
    }
  }

  // Clear padding so that it can never leak into a key or a checksum.
  if (const std::size_t tail = cols_ % 32; tail != 0 && words_ > 0) {
    const std::uint32_t mask = (1u << tail) - 1u;
    for (std::size_t row = 0; row < bits_ * rows_; ++row) {
      planes_[row * words_ + words_ - 1] &= mask;
    }
  }
}

DenseMatrix dequantize(const BcqTensor& t) {
  DenseMatrix w(t.rows(), t.cols());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) {
      w(r, c) = dequantized_value(t, r, c);
    }
  }
  return w;
}

}  // namespace lutgemm
