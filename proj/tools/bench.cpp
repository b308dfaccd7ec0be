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

#include "bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace lutgemm::bench {

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

LatencyStats summarize(std::vector<double> samples_ns) {
  if (samples_ns.empty()) throw std::invalid_argument("summarize: no samples");
  std::sort(samples_ns.begin(), samples_ns.end());
  return {percentile(samples_ns, 0.5), percentile(samples_ns, 0.1), percentile(samples_ns, 0.9)};
}

std::vector<double> time_runs(std::size_t warmup, std::size_t reps,
                              const std::function<void()>& fn) {
  for (std::size_t i = 0; i < warmup; ++i) fn();
  std::vector<double> samples;
  samples.reserve(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    // Clamp to 1 ns so that a latency is always positive.
    samples.push_back(std::max(1.0, std::chrono::duration<double, std::nano>(t1 - t0).count()));
  }
  return samples;
}

void write_csv_row(std::ostream& out, const SweepRecord& r) {
  out << r.kernel << ',' << r.method << ',' << r.m << ',' << r.n << ',' << r.q << ',' << r.g
      << ',' << r.mu << ',' << r.threads << ',' << r.footprint_bits << ',' << r.as_built_bytes
      << ',' << format_double(r.compression_ratio) << ','
      << (r.rel_fro_error ? format_double(*r.rel_fro_error) : std::string()) << ','
      << format_double(r.latency.median_ns) << ',' << format_double(r.latency.p10_ns) << ','
      << format_double(r.latency.p90_ns) << '\n';
}

void write_csv(std::ostream& out, const std::vector<SweepRecord>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) write_csv_row(out, r);
}

void sort_by_compression(std::vector<SweepRecord>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.compression_ratio != b.compression_ratio) return a.compression_ratio < b.compression_ratio;
    if (a.q != b.q) return a.q < b.q;
    return a.g < b.g;
  });
}

std::uint64_t physical_memory_bytes() {
  const long pages = sysconf(_SC_PHYS_PAGES);
  const long page = sysconf(_SC_PAGE_SIZE);
  if (pages <= 0 || page <= 0) return 0;
  return static_cast<std::uint64_t>(pages) * static_cast<std::uint64_t>(page);
}

}  // namespace lutgemm::bench
