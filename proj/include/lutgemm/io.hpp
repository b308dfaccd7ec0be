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
 * File formats. All integers and reals are little-endian; reals are IEEE-754
 * binary32.
 *
 * Quantized tensor ("LUTQ", version 1):
 *
 *   offset size
 *   0      4    magic "LUTQ"
 *   4      2    version = 1
 *   6      2    flags (bit 0: biases present; other bits zero)
 *   8      4    m (rows)
 *   12     4    n (cols)
 *   16     1    q (bit-planes, >= 1)
 *   17     1    reserved = 0
 *   18     4    g (group size, 0 = row-wise)
 *   22          q planes x m rows x ceil(n/32) u32 words (bit 1 = +1)
 *               m x groups x q scales, [row][group][bit]
 *               m x groups biases, [row][group] (only if flagged)
 *
 * Dense matrix ("DENM"): magic, u32 rows, u32 cols, rows*cols reals row-major.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lutgemm/bcq_tensor.hpp"

namespace lutgemm {

inline constexpr std::size_t kQTensorHeaderBytes = 22;
inline constexpr std::uint16_t kQTensorVersion = 1;
inline constexpr std::size_t kDenseHeaderBytes = 12;

/// Exact byte size of a LUTQ file with the given header fields.
std::uint64_t qtensor_file_size(std::size_t m, std::size_t n, std::size_t q,
                                std::size_t group_size, bool bias_present);

std::vector<std::uint8_t> encode_qtensor(const BcqTensor& t);
/// Throws FormatError on a bad magic/version/flags field or when the byte
/// count differs from the size implied by the header.
BcqTensor decode_qtensor(std::span<const std::uint8_t> bytes);

void write_qtensor(const std::filesystem::path& path, const BcqTensor& t);
BcqTensor read_qtensor(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_dense(const DenseMatrix& m);
DenseMatrix decode_dense(std::span<const std::uint8_t> bytes);

void write_dense(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_dense(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace lutgemm
