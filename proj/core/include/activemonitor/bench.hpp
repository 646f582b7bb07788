#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "activemonitor/checker.hpp"
#include "activemonitor/workloads.hpp"

namespace am::bench {

/// Mean after dropping one minimum and one maximum. Throws
/// am::Error(TooFewRuns) for fewer than three values.
double trimmed_mean(std::vector<double> values);

struct RunResult {
  std::uint64_t wall_ns = 0;
  std::optional<std::uint64_t> cpu_ns;
  std::optional<std::uint64_t> peak_rss_bytes;
  std::size_t run_index = 0;
};

struct Summary {
  std::string workload;
  std::string impl;
  std::size_t threads = 0;
  std::string param_name;
  std::string param_value;
  std::size_t runs = 0;
  double trimmed_mean_ns = 0;
  std::uint64_t min_ns = 0;
  std::uint64_t max_ns = 0;
  std::vector<RunResult> per_run;
  /// Untimed recorded run and its oracle verdicts, when verification is on.
  std::optional<workloads::WorkloadResult> recorded;
  std::vector<check::Verdict> verdicts;
};

/// Fills the statistics of s from its per-run list.
void summarize(Summary& s);

struct BenchConfig {
  /// Every field except threads, pending limit and outside work is taken
  /// from here; those three are swept.
  workloads::WorkloadConfig base;
  std::vector<std::size_t> threads{4};
  /// nullopt is the unbounded limit. Ignored by lock implementations.
  std::vector<std::optional<std::size_t>> pending_limits{std::nullopt};
  std::vector<std::size_t> outside_work{0};
  std::size_t runs = 25;
  /// Before timing each point, run it once more with recording on and check
  /// the workload oracles.
  bool verify = false;
};

std::string format_limit(const std::optional<std::size_t>& limit);
/// "unbounded" or a non-negative integer. Throws am::Error(ConfigError).
std::optional<std::size_t> parse_limit(const std::string& text);

using Progress = std::function<void(const Summary&)>;

/// One Summary per sweep point, in threads x pending limit x outside work
/// order. Throws am::Error(TooFewRuns) when runs < 3.
std::vector<Summary> run_bench(const BenchConfig& config, const Progress& progress = {});

inline constexpr const char* kCsvHeader =
    "workload,impl,threads,param_name,param_value,runs,trimmed_mean_ns,min_ns,max_ns";

void emit_csv(std::ostream& out, const std::vector<Summary>& summaries);
/// Throws am::Error(IoError) when the file cannot be written.
void write_csv(const std::string& path, const std::vector<Summary>& summaries);
/// Inverse of emit_csv for the CSV columns. Throws am::Error(IoError) on a
/// malformed header or row.
std::vector<Summary> parse_csv(std::istream& in);

}  // namespace am::bench
