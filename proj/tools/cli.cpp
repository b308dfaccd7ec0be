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

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>

#include "bench.hpp"
#include "lutgemm/error.hpp"
#include "lutgemm/io.hpp"
#include "lutgemm/lut_kernel.hpp"
#include "lutgemm/parallel.hpp"
#include "lutgemm/perf_model.hpp"
#include "lutgemm/quantizer.hpp"
#include "lutgemm/ref_kernels.hpp"
#include "lutgemm/synthetic.hpp"

namespace lutgemm::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr double kVerifyTolerance = 1e-4;

/// Thrown for flag combinations CLI11 cannot express; maps to exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json footprint_json(const FootprintReport& f) {
  return {{"binary_bits", f.binary_bits},
          {"scale_bits", f.scale_bits},
          {"total_bits", f.total_bits},
          {"bytes", f.bytes},
          {"compression_ratio", f.compression_ratio},
          {"as_built_bytes", f.as_built_bytes},
          {"as_built_compression_ratio", f.as_built_compression_ratio}};
}

json error_json(const QuantError& e) {
  return {{"mse", e.mse}, {"rel_fro", e.rel_fro}, {"max_abs", e.max_abs}};
}

std::size_t parse_group(const std::string& token) {
  if (token == "row" || token == "0") return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(token, &used);
    if (used == token.size() && v > 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw UsageError("invalid group size '" + token + "' (expected a positive integer or 'row')");
}

void check_bits_for_method(std::size_t bits, const QuantMethod& method) {
  if (bits < 1) throw UsageError("--bits must be >= 1");
  if (method.kind != QuantMethod::Kind::bcq_greedy && bits > 8) {
    throw UsageError("--bits must be <= 8 for method " + method.name());
  }
  if (bits > 32) throw UsageError("--bits must be <= 32");
}

void check_memory(std::uint64_t bytes) {
  const std::uint64_t phys = bench::physical_memory_bytes();
  if (phys != 0 && bytes > phys / 10 * 8) {
    throw ConfigError("request needs about " + std::to_string(bytes >> 20) + " MiB but only " +
                      std::to_string(phys >> 20) + " MiB of memory is installed");
  }
}

// ---------------------------------------------------------------- quantize

struct QuantizeArgs {
  std::string in;
  std::vector<std::uint64_t> random;
  std::size_t bits = 0;
  std::string group = "0";
  std::string method = "greedy";
  std::size_t iters = 3;
  std::string out;
};

int cmd_quantize(const QuantizeArgs& a, std::ostream& out) {
  if (a.in.empty() == a.random.empty()) throw UsageError("give exactly one of --in or --random");
  const QuantMethod method = QuantMethod::parse(a.method, a.iters);
  check_bits_for_method(a.bits, method);
  if (method.kind == QuantMethod::Kind::bcq_alternating && a.iters < 1) {
    throw UsageError("--iters must be >= 1");
  }
  const std::size_t g = parse_group(a.group);

  DenseMatrix w;
  if (!a.in.empty()) {
    w = read_dense(a.in);
  } else {
    if (a.random[0] == 0 || a.random[1] == 0) throw UsageError("--random dimensions must be positive");
    check_memory(a.random[0] * a.random[1] * 8);
    w = gaussian_matrix(a.random[0], a.random[1], a.random[2]);
  }
  if (g > w.cols) throw UsageError("--group-size exceeds the column count");

  const BcqTensor t = quantize(w, a.bits, g, method);
  write_qtensor(a.out, t);

  const FootprintReport f = memory_footprint(t.rows(), t.cols(), t.bits(), g, t.has_bias());
  json report = {{"m", t.rows()},
                 {"n", t.cols()},
                 {"bits", t.bits()},
                 {"group_size", g},
                 {"method", method.name()},
                 {"iters", method.kind == QuantMethod::Kind::bcq_alternating ? method.iters : 0},
                 {"bias", t.has_bias()},
                 {"error", error_json(quantization_error(w, t))},
                 {"footprint", footprint_json(f)},
                 {"file", a.out},
                 {"file_bytes", f.as_built_bytes}};
  out << report.dump(2) << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  std::string qtensor;
  std::size_t trials = 10;
  std::size_t mu = 8;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const BcqTensor t = read_qtensor(a.qtensor);
  KernelConfig cfg;
  cfg.mu = a.mu;
  cfg.threads = a.threads;
  cfg.validate();
  if (t.group_size() != 0 && t.group_size() % a.mu != 0) {
    throw ConfigError("configuration error: group size " + std::to_string(t.group_size()) +
                      " is not a multiple of mu " + std::to_string(a.mu));
  }

  double worst_dev = 0.0;
  std::size_t naive_mismatches = 0;
  for (std::size_t k = 0; k < a.trials; ++k) {
    const std::uint64_t trial_seed = a.seed + k;
    const DenseVector x = gaussian_vector(t.cols(), trial_seed);
    const LutBank bank = build_luts(x, a.mu, t.group_size());
    const DenseVector y = lut_gemv(t, bank, cfg);
    const DenseVector naive = bcq_gemv_naive(t, x, a.mu);
    const DenseVector deq = dequant_gemv(t, x, a.threads);
    const double dev = gemv_relative_deviation(y, deq, t, x);
    worst_dev = std::max(worst_dev, dev);

    std::optional<std::size_t> bad_row;
    for (std::size_t r = 0; r < y.size() && !bad_row; ++r) {
      if (!bitwise_equal(std::span(y).subspan(r, 1), std::span(naive).subspan(r, 1))) bad_row = r;
    }
    if (bad_row) ++naive_mismatches;
    if (bad_row || !(dev <= kVerifyTolerance)) {
      json fail = {{"passed", false},
                   {"trial", k},
                   {"seed", trial_seed},
                   {"rel_dev_vs_dequant", dev},
                   {"tolerance", kVerifyTolerance}};
      if (bad_row) {
        fail["naive_mismatch_index"] = *bad_row;
        fail["lut"] = y[*bad_row];
        fail["naive"] = naive[*bad_row];
      }
      out << fail.dump(2) << '\n';
      err << "verification failed at trial " << k << " (seed " << trial_seed << ")\n";
      return kExitVerifyFailed;
    }
  }
  json report = {{"passed", true},
                 {"trials", a.trials},
                 {"mu", a.mu},
                 {"m", t.rows()},
                 {"n", t.cols()},
                 {"bits", t.bits()},
                 {"group_size", t.group_size()},
                 {"naive_mismatches", naive_mismatches},
                 {"max_rel_dev_vs_dequant", worst_dev},
                 {"tolerance", kVerifyTolerance}};
  out << report.dump(2) << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::size_t m = 4096;
  std::size_t n = 4096;
  std::size_t bits = 3;
  std::string group = "128";
  std::size_t mu = 8;
  unsigned threads = 0;
  std::string kernel = "lut";
  std::size_t reps = 20;
  std::size_t warmup = 2;
  std::uint64_t seed = 0;
  bool no_header = false;
};

bench::SweepRecord run_bench(const BenchArgs& a) {
  const std::size_t g = parse_group(a.group);
  if (a.m == 0 || a.n == 0) throw UsageError("--m and --n must be positive");
  if (g > a.n) throw UsageError("--group-size exceeds --n");
  if (a.bits < 1 || a.bits > 32) throw UsageError("--bits must be in [1, 32]");

  bench::SweepRecord rec;
  rec.kernel = a.kernel;
  rec.method = "random";
  rec.m = a.m;
  rec.n = a.n;
  rec.q = a.bits;
  rec.g = g;
  rec.mu = a.mu;
  rec.threads = resolve_threads(a.threads);
  const DenseVector x = gaussian_vector(a.n, a.seed + 1);

  if (a.kernel == "dense") {
    check_memory(std::uint64_t{a.m} * a.n * 4);
    const DenseMatrix w = gaussian_matrix(a.m, a.n, a.seed);
    rec.footprint_bits = 16ull * a.m * a.n;
    rec.as_built_bytes = 4ull * a.m * a.n;
    rec.compression_ratio = 1.0;
    rec.latency = bench::summarize(bench::time_runs(a.warmup, a.reps, [&] {
      volatile float sink = dense_gemv(w, x, a.threads).front();
      (void)sink;
    }));
    return rec;
  }

  const FootprintReport f = memory_footprint(a.m, a.n, a.bits, g, false);
  check_memory(f.as_built_bytes + std::uint64_t{a.m} * 8);
  const BcqTensor t = random_bcq(a.m, a.n, a.bits, g, false, a.seed);
  rec.footprint_bits = f.total_bits;
  rec.as_built_bytes = f.as_built_bytes;
  rec.compression_ratio = f.compression_ratio;

  std::function<void()> body;
  if (a.kernel == "lut") {
    KernelConfig cfg;
    cfg.mu = a.mu;
    cfg.threads = a.threads;
    cfg.validate();
    if (g != 0 && g % a.mu != 0) {
      throw ConfigError("group size " + std::to_string(g) + " is not a multiple of mu " +
                        std::to_string(a.mu));
    }
    DenseVector y(a.m);
    body = [&, cfg, y]() mutable {
      const LutBank bank = build_luts(x, cfg.mu, g);
      std::fill(y.begin(), y.end(), 0.0f);
      lut_gemv_into(t, bank, cfg, y);
    };
  } else if (a.kernel == "dequant") {
    body = [&] {
      volatile float sink = dequant_gemv(t, x, a.threads).front();
      (void)sink;
    };
  } else if (a.kernel == "naive") {
    body = [&] {
      volatile float sink = bcq_gemv_naive(t, x, a.mu).front();
      (void)sink;
    };
  } else {
    throw UsageError("unknown kernel '" + a.kernel + "'");
  }
  rec.latency = bench::summarize(bench::time_runs(a.warmup, a.reps, body));
  return rec;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const bench::SweepRecord rec = run_bench(a);
  if (!a.no_header) out << bench::kCsvHeader << '\n';
  bench::write_csv_row(out, rec);
  return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::size_t m = 1024;
  std::size_t n = 1024;
  std::vector<std::size_t> bits_list;
  std::vector<std::string> group_list;
  std::string method = "greedy";
  std::size_t iters = 3;
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::size_t mu = 8;
  unsigned threads = 0;
  std::size_t reps = 5;
  std::size_t warmup = 1;
  std::string out = "-";
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  if (a.bits_list.empty() || a.group_list.empty()) throw UsageError("empty --bits-list or --group-list");
  if (a.m == 0 || a.n == 0) throw UsageError("--m and --n must be positive");
  if (a.seeds == 0) throw UsageError("--seeds must be >= 1");
  const QuantMethod method = QuantMethod::parse(a.method, a.iters);
  std::vector<std::size_t> groups;
  for (const auto& tok : a.group_list) {
    const std::size_t g = parse_group(tok);
    if (g > a.n) throw UsageError("group size " + tok + " exceeds --n");
    if (g != 0 && g % a.mu != 0) {
      throw ConfigError("group size " + tok + " is not a multiple of mu " + std::to_string(a.mu));
    }
    groups.push_back(g);
  }
  for (std::size_t q : a.bits_list) check_bits_for_method(q, method);
  check_memory(std::uint64_t{a.m} * a.n * 12);

  KernelConfig cfg;
  cfg.mu = a.mu;
  cfg.threads = a.threads;
  cfg.validate();
  const DenseVector x = gaussian_vector(a.n, a.seed + 0x5EED);

  std::vector<DenseMatrix> weights;
  for (std::size_t s = 0; s < a.seeds; ++s) weights.push_back(gaussian_matrix(a.m, a.n, a.seed + s));

  std::vector<bench::SweepRecord> rows;
  for (std::size_t q : a.bits_list) {
    for (std::size_t g : groups) {
      bench::SweepRecord rec;
      rec.kernel = "lut";
      rec.method = method.name();
      rec.m = a.m;
      rec.n = a.n;
      rec.q = q;
      rec.g = g;
      rec.mu = a.mu;
      rec.threads = resolve_threads(a.threads);
      const bool bias = method.kind == QuantMethod::Kind::rtn_uniform;
      const FootprintReport f = memory_footprint(a.m, a.n, q, g, bias);
      rec.footprint_bits = f.total_bits;
      rec.as_built_bytes = f.as_built_bytes;
      rec.compression_ratio = f.compression_ratio;

      double err_sum = 0.0;
      std::optional<BcqTensor> first;
      for (const DenseMatrix& w : weights) {
        BcqTensor t = quantize(w, q, g, method);
        err_sum += quantization_error(w, t).rel_fro;
        if (!first) first.emplace(std::move(t));
      }
      rec.rel_fro_error = err_sum / static_cast<double>(weights.size());

      DenseVector y(a.m);
      rec.latency = bench::summarize(bench::time_runs(a.warmup, a.reps, [&] {
        const LutBank bank = build_luts(x, cfg.mu, g);
        std::fill(y.begin(), y.end(), 0.0f);
        lut_gemv_into(*first, bank, cfg, y);
      }));
      rows.push_back(std::move(rec));
    }
  }
  bench::sort_by_compression(rows);

  if (a.out == "-") {
    bench::write_csv(out, rows);
  } else {
    std::ofstream file(a.out);
    if (!file) throw std::runtime_error("cannot open " + a.out + " for writing");
    bench::write_csv(file, rows);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LUT-based GEMV over binary-coding quantized weights", "lutgemm"};
  app.require_subcommand(1);

  QuantizeArgs qa;
  auto* quant = app.add_subcommand("quantize", "Quantize a dense matrix and write a LUTQ file");
  auto* in_opt = quant->add_option("--in", qa.in, "DENM matrix file");
  quant->add_option("--random", qa.random, "Gaussian matrix: M N SEED")->expected(3)->excludes(in_opt);
  quant->add_option("--bits", qa.bits, "Bit-planes q")->required();
  quant->add_option("--group-size", qa.group, "Group size g (0 or 'row' = row-wise)");
  quant->add_option("--method", qa.method, "rtn | greedy | alternating")
      ->check(CLI::IsMember({"rtn", "greedy", "alternating"}));
  quant->add_option("--iters", qa.iters, "Alternating iterations");
  quant->add_option("--out", qa.out, "Output LUTQ file")->required();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check the LUT kernel against its oracles");
  verify->add_option("--qtensor", va.qtensor, "LUTQ file")->required();
  verify->add_option("--trials", va.trials, "Random activation vectors");
  verify->add_option("--mu", va.mu, "LUT width");
  verify->add_option("--seed", va.seed, "Seed of the first activation vector");
  verify->add_option("--threads", va.threads, "Worker threads (0 = auto)");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Time one kernel on a random tensor (CSV)");
  bench_cmd->add_option("--m", ba.m, "Rows");
  bench_cmd->add_option("--n", ba.n, "Columns");
  bench_cmd->add_option("--bits", ba.bits, "Bit-planes q");
  bench_cmd->add_option("--group-size", ba.group, "Group size g (0 or 'row' = row-wise)");
  bench_cmd->add_option("--mu", ba.mu, "LUT width");
  bench_cmd->add_option("--threads", ba.threads, "Worker threads (0 = auto)");
  bench_cmd->add_option("--kernel", ba.kernel, "lut | dequant | dense | naive")
      ->check(CLI::IsMember({"lut", "dequant", "dense", "naive"}));
  bench_cmd->add_option("--reps", ba.reps, "Timed repetitions")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--warmup", ba.warmup, "Untimed warm-up runs");
  bench_cmd->add_option("--seed", ba.seed, "Seed for the synthetic operands");
  bench_cmd->add_flag("--no-header", ba.no_header, "Omit the CSV header row");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Error/footprint/latency over a (q, g) grid (CSV)");
  sweep->add_option("--m", sa.m, "Rows");
  sweep->add_option("--n", sa.n, "Columns");
  sweep->add_option("--bits-list", sa.bits_list, "Comma-separated q values")
      ->delimiter(',')
      ->required();
  sweep->add_option("--group-list", sa.group_list, "Comma-separated g values ('row' = row-wise)")
      ->delimiter(',')
      ->required();
  sweep->add_option("--method", sa.method, "rtn | greedy | alternating")
      ->check(CLI::IsMember({"rtn", "greedy", "alternating"}));
  sweep->add_option("--iters", sa.iters, "Alternating iterations");
  sweep->add_option("--seeds", sa.seeds, "Matrices averaged per configuration");
  sweep->add_option("--seed", sa.seed, "First matrix seed");
  sweep->add_option("--mu", sa.mu, "LUT width");
  sweep->add_option("--threads", sa.threads, "Worker threads (0 = auto)");
  sweep->add_option("--reps", sa.reps, "Timed repetitions")->check(CLI::PositiveNumber);
  sweep->add_option("--warmup", sa.warmup, "Untimed warm-up runs");
  sweep->add_option("--out", sa.out, "CSV path ('-' = stdout)");

  std::vector<const char*> argv{"lutgemm"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*quant) return cmd_quantize(qa, out);
    if (*verify) return cmd_verify(va, out, err);
    if (*bench_cmd) return cmd_bench(ba, out);
    if (*sweep) return cmd_sweep(sa, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace lutgemm::cli
