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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lutgemm::bench {

struct LatencyStats {
  double median_ns = 0.0;
  double p10_ns = 0.0;
  double p90_ns = 0.0;
};

/// Percentiles by linear interpolation between order statistics.
LatencyStats summarize(std::vector<double> samples_ns);

/// Runs `fn` `warmup` times untimed, then `reps` times timed.
std::vector<double> time_runs(std::size_t warmup, std::size_t reps, const std::function<void()>& fn);

/// One benchmark or sweep row.
struct SweepRecord {
  std::string kernel;
  std::string method;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t q = 0;
  std::size_t g = 0;  // 0 = row-wise
  std::size_t mu = 0;
  unsigned threads = 0;
  std::uint64_t footprint_bits = 0;
  std::uint64_t as_built_bytes = 0;
  double compression_ratio = 0.0;
  std::optional<double> rel_fro_error;
  LatencyStats latency;
};

inline constexpr const char* kCsvHeader =
    "kernel,method,m,n,q,g,mu,threads,footprint_bits,as_built_bytes,compression_ratio,"
    "rel_fro_error,median_latency_ns,p10_latency_ns,p90_latency_ns";

void write_csv_row(std::ostream& out, const SweepRecord& r);
void write_csv(std::ostream& out, const std::vector<SweepRecord>& rows);

/// Sorts by compression ratio, then q, then g; stable.
void sort_by_compression(std::vector<SweepRecord>& rows);

/// Physical memory in bytes, or 0 when unknown.
std::uint64_t physical_memory_bytes();

}  // namespace lutgemm::bench
