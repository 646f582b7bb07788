#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "activemonitor/bench.hpp"
#include "activemonitor/error.hpp"

namespace wl = am::workloads;

int main(int argc, char** argv) {
  CLI::App app{"Run ActiveMonitor and lock-based workloads over parameter sweeps"};
  std::string workload = "bb", impl = "am", mode = "strict", csv_path, dump_path;
  std::vector<std::size_t> threads{4}, outside{0};
  std::vector<std::string> limits{"unbounded"};
  wl::WorkloadConfig base;
  std::size_t runs = 25, executors = 1;
  bool verify = false;

  app.add_option("--workload", workload, "bb, sll, rr, pbb, trw or mix")->capture_default_str();
  app.add_option("--impl", impl, "am, lock or fg")->capture_default_str();
  app.add_option("--threads", threads, "worker thread counts")->delimiter(',')->capture_default_str();
  app.add_option("--ops", base.ops_per_thread, "timed operations per thread")->capture_default_str();
  app.add_option("--buffer-size", base.buffer_size, "BB/PBB capacity")->capture_default_str();
  app.add_option("--pending-limit", limits, "pending limits, integers or 'unbounded'")->delimiter(',');
  app.add_option("--outside-work", outside, "integer additions between calls")->delimiter(',');
  app.add_option("--seed", base.seed)->capture_default_str();
  app.add_option("--runs", runs, "timed runs per sweep point (at least 3)")->capture_default_str();
  app.add_option("--warmup", base.warmup_ops, "warm-up operations per thread")->capture_default_str();
  app.add_option("--mode", mode, "strict or relaxed")->check(CLI::IsMember({"strict", "relaxed"}));
  app.add_option("--executors", executors, "monitor executor threads")->capture_default_str();
  app.add_option("--list-initial", base.list_initial)->capture_default_str();
  app.add_option("--reader-multiplier", base.reader_multiplier)->capture_default_str();
  app.add_option("--await-probability", base.await_probability)->capture_default_str();
  app.add_option("--csv", csv_path, "write the CSV here instead of stdout");
  app.add_option("--dump-history", dump_path, "write the history of a recorded run of the first sweep point");
  app.add_flag("--verify", verify, "check workload oracles on one recorded run per sweep point");
  CLI11_PARSE(app, argc, argv);

  try {
    base.workload = wl::parse_workload(workload);
    base.impl = wl::parse_impl(impl);
    base.runtime.ordering_mode = mode == "relaxed" ? am::OrderingMode::Relaxed : am::OrderingMode::Strict;
    base.runtime.max_monitor_threads = executors;

    am::bench::BenchConfig config;
    config.base = base;
    config.threads = threads;
    config.outside_work = outside;
    config.runs = runs;
    config.verify = verify || !dump_path.empty();
    config.pending_limits.clear();
    for (const auto& l : limits) config.pending_limits.push_back(am::bench::parse_limit(l));

    const unsigned hw = std::thread::hardware_concurrency();
    for (auto t : threads)
      if (hw != 0 && t > hw)
        std::cerr << "note: " << t << " threads exceed the " << hw << " hardware threads available\n";

    bool oracles_ok = true;
    auto summaries = am::bench::run_bench(config, [&](const am::bench::Summary& s) {
      std::cerr << s.workload << '/' << s.impl << " threads=" << s.threads << ' ' << s.param_name << '='
                << s.param_value << " trimmed_mean_ms=" << s.trimmed_mean_ns / 1e6 << '\n';
      for (const auto& v : s.verdicts) {
        if (!v.pass) {
          oracles_ok = false;
          std::cerr << "  oracle " << v.name << " FAILED: " << v.message << '\n';
        }
      }
    });

    if (!dump_path.empty()) {
      std::ofstream f(dump_path);
      if (!f) throw am::Error(am::Errc::IoError, "cannot open '" + dump_path + "'");
      if (base.impl != wl::Impl::ActiveMonitor) std::cerr << "note: lock implementations record no history\n";
      am::write_history(f, summaries.front().recorded->history);
    }
    if (csv_path.empty()) am::bench::emit_csv(std::cout, summaries);
    else am::bench::write_csv(csv_path, summaries);
    return oracles_ok ? 0 : 3;
  } catch (const am::Error& e) {
    std::cerr << "ambench: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ambench: " << e.what() << '\n';
    return 2;
  }
}
