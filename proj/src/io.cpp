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

#include "lutgemm/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "lutgemm/error.hpp"

namespace lutgemm {

namespace {

constexpr char kQTensorMagic[4] = {'L', 'U', 'T', 'Q'};
constexpr char kDenseMagic[4] = {'D', 'E', 'N', 'M'};
constexpr std::uint16_t kFlagBias = 1;

class Writer {
 public:
  explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }

  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) u8(static_cast<std::uint8_t>(v >> s));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool magic(const char (&m)[4]) {
    need(4);
    const bool ok = std::memcmp(bytes_.data() + pos_, m, 4) == 0;
    pos_ += 4;
    return ok;
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    const std::uint16_t lo = u8();
    return static_cast<std::uint16_t>(lo | (u8() << 8));
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int s = 0; s < 32; s += 8) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << s;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("size mismatch: unexpected end of data");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void check_size(std::uint64_t expected, std::size_t actual) {
  if (expected != actual) {
    throw FormatError("size mismatch: header implies " + std::to_string(expected) +
                      " bytes, found " + std::to_string(actual));
  }
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError(std::string(what) + " does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::uint64_t qtensor_file_size(std::size_t m, std::size_t n, std::size_t q,
                                std::size_t group_size, bool bias_present) {
  const std::uint64_t g = group_size == 0 ? n : group_size;
  const std::uint64_t groups = g == 0 ? 0 : (n + g - 1) / g;
  std::uint64_t size = kQTensorHeaderBytes;
  size += std::uint64_t{q} * m * words_per_row(n) * 4;
  size += std::uint64_t{m} * groups * q * 4;
  if (bias_present) size += std::uint64_t{m} * groups * 4;
  return size;
}

std::vector<std::uint8_t> encode_qtensor(const BcqTensor& t) {
  if (t.bits() > 255) throw FormatError("bit count does not fit in the header");
  Writer w(qtensor_file_size(t.rows(), t.cols(), t.bits(), t.group_size(), t.has_bias()));
  w.bytes(kQTensorMagic, 4);
  w.u16(kQTensorVersion);
  w.u16(t.has_bias() ? kFlagBias : 0);
  w.u32(checked_u32(t.rows(), "row count"));
  w.u32(checked_u32(t.cols(), "column count"));
  w.u8(static_cast<std::uint8_t>(t.bits()));
  w.u8(0);
  w.u32(checked_u32(t.group_size(), "group size"));
  for (std::uint32_t word : t.planes()) w.u32(word);
  for (float a : t.scales()) w.f32(a);
  for (float z : t.biases()) w.f32(z);
  return w.take();
}

BcqTensor decode_qtensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kQTensorHeaderBytes) {
    throw FormatError("size mismatch: file shorter than the " +
                      std::to_string(kQTensorHeaderBytes) + "-byte header");
  }
  Reader r(bytes);
  if (!r.magic(kQTensorMagic)) throw FormatError("bad magic, expected LUTQ");
  const std::uint16_t version = r.u16();
  if (version != kQTensorVersion) {
    throw FormatError("unsupported version " + std::to_string(version));
  }
  const std::uint16_t flags = r.u16();
  if ((flags & ~kFlagBias) != 0) throw FormatError("unknown flag bits set");
  const std::size_t m = r.u32();
  const std::size_t n = r.u32();
  const std::size_t q = r.u8();
  if (r.u8() != 0) throw FormatError("reserved byte is not zero");
  const std::size_t g = r.u32();
  if (q == 0) throw FormatError("bit count is zero");
  if (g > n) throw FormatError("group size exceeds column count");
  const bool bias = (flags & kFlagBias) != 0;
  check_size(qtensor_file_size(m, n, q, g, bias), bytes.size());

  const std::size_t groups = g == 0 ? (n == 0 ? 0 : 1) : (n + g - 1) / g;
  std::vector<std::uint32_t> planes(q * m * words_per_row(n));
  for (auto& word : planes) word = r.u32();
  std::vector<float> scales(m * groups * q);
  for (auto& a : scales) a = r.f32();
  std::optional<std::vector<float>> biases;
  if (bias) {
    biases.emplace(m * groups);
    for (auto& z : *biases) z = r.f32();
  }
  try {
    return BcqTensor(m, n, q, g, std::move(planes), std::move(scales), std::move(biases));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid tensor: ") + e.what());
  }
}

void write_qtensor(const std::filesystem::path& path, const BcqTensor& t) {
  write_file_bytes(path, encode_qtensor(t));
}

BcqTensor read_qtensor(const std::filesystem::path& path) {
  return decode_qtensor(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_dense(const DenseMatrix& m) {
  Writer w(kDenseHeaderBytes + m.values.size() * 4);
  w.bytes(kDenseMagic, 4);
  w.u32(checked_u32(m.rows, "row count"));
  w.u32(checked_u32(m.cols, "column count"));
  for (float v : m.values) w.f32(v);
  return w.take();
}

DenseMatrix decode_dense(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kDenseHeaderBytes) throw FormatError("size mismatch: truncated DENM header");
  Reader r(bytes);
  if (!r.magic(kDenseMagic)) throw FormatError("bad magic, expected DENM");
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  check_size(kDenseHeaderBytes + std::uint64_t{rows} * cols * 4, bytes.size());
  std::vector<float> values(rows * cols);
  for (auto& v : values) {
    v = r.f32();
    if (!std::isfinite(v)) throw FormatError("non-finite value in dense matrix");
  }
  return DenseMatrix(rows, cols, std::move(values));
}

void write_dense(const std::filesystem::path& path, const DenseMatrix& m) {
  write_file_bytes(path, encode_dense(m));
}

DenseMatrix read_dense(const std::filesystem::path& path) {
  return decode_dense(read_file_bytes(path));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace lutgemm
