#include "activemonitor/bench.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "activemonitor/error.hpp"

namespace am::bench {

double trimmed_mean(std::vector<double> values) {
  if (values.size() < 3)
    throw Error(Errc::TooFewRuns, "trimmed mean needs at least 3 values, got " + std::to_string(values.size()));
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double sum = std::accumulate(values.begin(), values.end(), 0.0) - *lo - *hi;
  return sum / static_cast<double>(values.size() - 2);
}

void summarize(Summary& s) {
  std::vector<double> wall;
  for (const auto& r : s.per_run) wall.push_back(static_cast<double>(r.wall_ns));
  s.runs = wall.size();
  s.trimmed_mean_ns = trimmed_mean(wall);
  auto [lo, hi] = std::minmax_element(s.per_run.begin(), s.per_run.end(),
                                      [](const auto& a, const auto& b) { return a.wall_ns < b.wall_ns; });
  s.min_ns = lo->wall_ns;
  s.max_ns = hi->wall_ns;
}

std::string format_limit(const std::optional<std::size_t>& limit) {
  return limit ? std::to_string(*limit) : "unbounded";
}

std::optional<std::size_t> parse_limit(const std::string& text) {
  if (text == "unbounded") return std::nullopt;
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty())
    throw Error(Errc::ConfigError, "pending limit must be a non-negative integer or 'unbounded', got '" + text + "'");
  return v;
}

std::vector<Summary> run_bench(const BenchConfig& config, const Progress& progress) {
  if (config.runs < 3) throw Error(Errc::TooFewRuns, "runs must be at least 3 to drop the extremes");
  const bool am = config.base.impl == workloads::Impl::ActiveMonitor;
  auto limits = config.pending_limits;
  if (!am || limits.empty()) limits = {config.base.runtime.pending_limit};
  const auto work = config.outside_work.empty() ? std::vector<std::size_t>{config.base.outside_cs_work}
                                                : config.outside_work;
  const bool sweep_limit = am && limits.size() > 1;

  std::vector<Summary> out;
  for (auto threads : config.threads) {
    for (const auto& limit : limits) {
      for (auto w : work) {
        workloads::WorkloadConfig c = config.base;
        c.threads = threads;
        c.runtime.pending_limit = limit;
        c.outside_cs_work = w;
        workloads::validate(c);

        Summary s;
        s.workload = std::string(to_string(c.workload));
        s.impl = std::string(to_string(c.impl));
        s.threads = threads;
        if (sweep_limit) {
          s.param_name = "pending_limit";
          s.param_value = format_limit(limit);
        } else {
          s.param_name = "outside_work";
          s.param_value = std::to_string(w);
        }

        if (config.verify) {
          auto rc = c;
          rc.record_trace = true;
          s.recorded = workloads::run_workload(rc);
          s.verdicts = workloads::check_workload(rc, *s.recorded);
        }
        c.record_trace = false;
        c.runtime.history_recording = false;
        for (std::size_t i = 0; i < config.runs; ++i) {
          auto r = workloads::run_workload(c);
          s.per_run.push_back(RunResult{r.wall_ns, r.cpu_ns, r.peak_rss_bytes, i});
        }
        summarize(s);
        if (progress) progress(s);
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <class T>
T number(const std::string& cell, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty())
    throw Error(Errc::IoError, "line " + std::to_string(line) + ": bad number '" + cell + "'");
  return v;
}

}  // namespace

void emit_csv(std::ostream& out, const std::vector<Summary>& summaries) {
  out << kCsvHeader << '\n';
  for (const auto& s : summaries) {
    out << s.workload << ',' << s.impl << ',' << s.threads << ',' << s.param_name << ',' << s.param_value << ','
        << s.runs << ',' << format_double(s.trimmed_mean_ns) << ',' << s.min_ns << ',' << s.max_ns << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<Summary>& summaries) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  emit_csv(f, summaries);
  f.flush();
  if (!f) throw Error(Errc::IoError, "failed writing '" + path + "'");
}

std::vector<Summary> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(Errc::IoError, "missing or unexpected CSV header");
  std::vector<Summary> out;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != 9) throw Error(Errc::IoError, "line " + std::to_string(n) + ": expected 9 columns");
    Summary s;
    s.workload = cells[0];
    s.impl = cells[1];
    s.threads = number<std::size_t>(cells[2], n);
    s.param_name = cells[3];
    s.param_value = cells[4];
    s.runs = number<std::size_t>(cells[5], n);
    s.trimmed_mean_ns = number<double>(cells[6], n);
    s.min_ns = number<std::uint64_t>(cells[7], n);
    s.max_ns = number<std::uint64_t>(cells[8], n);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace am::bench
