#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "activemonitor/bench.hpp"
#include "activemonitor/checker.hpp"
#include "activemonitor/error.hpp"
#include "activemonitor/workloads.hpp"

namespace wl = am::workloads;
namespace chk = am::check;
using wl::Impl;
using wl::WorkloadId;

namespace {

struct Settings {
  std::uint64_t seeds = 1000;
  std::size_t lin_histories = 500;
  std::size_t ops = 20000;
  // Multiset list grows with the op count (removes of absent values are
  // no-ops), so its traversal cost does too; kept smaller than the default.
  std::size_t sll_ops = 2500;
  std::size_t runs = 11;
  std::size_t equivalence_seeds = 50;
};

struct Result {
  bool pass = false;
  std::string detail;
};

const std::vector<WorkloadId> kWorkloads{WorkloadId::BoundedBuffer, WorkloadId::SortedList, WorkloadId::RoundRobin,
                                         WorkloadId::ParametrizedBuffer, WorkloadId::TicketedRW};

// Workload oracles over every recorded run of the other criteria.
struct OracleLog {
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::string first;

  void check(const wl::WorkloadConfig& c, const wl::WorkloadResult& r, const std::string& label) {
    ++runs;
    for (const auto& v : wl::check_workload(c, r)) {
      if (v.pass) continue;
      if (failures++ == 0) first = label + " " + v.name + ": " + v.message;
    }
  }
};

OracleLog g_oracles;

std::string fmt(double v, int digits = 3) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string label(const wl::WorkloadConfig& c) {
  return std::string(wl::to_string(c.workload)) + "/" + std::string(wl::to_string(c.impl)) + " seed " +
         std::to_string(c.seed);
}

// ---------------------------------------------------------------------------

Result rule_suite(const Settings& s) {
  std::size_t histories = 0, strict = 0;
  for (auto id : kWorkloads) {
    for (std::uint64_t seed = 0; seed < s.seeds; ++seed) {
      std::mt19937_64 rng(seed * 7919 + static_cast<std::uint64_t>(id));
      wl::WorkloadConfig c;
      c.workload = id;
      c.seed = seed;
      c.threads = 2 + rng() % 7;
      if ((id == WorkloadId::BoundedBuffer || id == WorkloadId::ParametrizedBuffer) && c.threads % 2) --c.threads;
      c.ops_per_thread = 1 + rng() % 200;
      c.warmup_ops = 0;
      c.buffer_size = 1 + rng() % 8;
      c.list_initial = 20;
      c.list_value_range = 40;
      c.all_blocking = rng() % 8 == 0;
      c.await_probability = (rng() % 3) * 0.25;
      c.record_trace = true;
      const std::array<std::optional<std::size_t>, 4> limits{std::nullopt, 0, 1, 4};
      c.runtime.pending_limit = limits[rng() % limits.size()];
      if (id == WorkloadId::RoundRobin && c.runtime.pending_limit > 0) c.runtime.pending_limit.reset();
      c.runtime.ordering_mode = seed % 2 == 0 ? am::OrderingMode::Strict : am::OrderingMode::Relaxed;
      c.runtime.history_recording = true;

      auto r = wl::run_workload(c);
      ++histories;
      std::vector<chk::Verdict> verdicts{chk::check_rule1(r.history), chk::check_rule2(r.history)};
      if (c.runtime.ordering_mode == am::OrderingMode::Strict) {
        ++strict;
        verdicts.push_back(chk::check_rule3(r.history));
        verdicts.push_back(chk::check_lock_equivalence(r.history));
      }
      for (const auto& v : verdicts)
        if (!v.pass) return {false, label(c) + " " + v.name + ": " + v.message};
      g_oracles.check(c, r, label(c));
    }
  }
  return {true, std::to_string(histories) + " histories (" + std::to_string(strict) +
                    " strict) over 5 workloads, rules 1-2 everywhere, rule 3 and lock equivalence in strict mode"};
}

// ---------------------------------------------------------------------------

std::size_t task_count(const wl::WorkloadConfig& c) {
  std::size_t n = 0;
  for (std::size_t t = 0; t < c.threads; ++t)
    for (const auto& op : wl::make_stream(c, t)) n += op.kind == wl::OpKind::Bump ? 2 : 1;
  return n;
}

Result oracle_agreement(const Settings& s) {
  std::size_t max_ops = 0;
  std::uint64_t nodes = 0;
  for (std::size_t i = 0; i < s.lin_histories; ++i) {
    std::mt19937_64 rng(i);
    wl::WorkloadConfig c;
    c.workload = WorkloadId::Mix;
    c.seed = 100000 + i;
    c.threads = 2 + rng() % 2;
    c.warmup_ops = 0;
    c.ops_per_thread = 1 + rng() % 4;
    while (task_count(c) > 8) --c.ops_per_thread;
    c.await_probability = (rng() % 3) * 0.3;
    c.record_trace = true;
    c.runtime.ordering_mode = am::OrderingMode::Relaxed;
    c.runtime.max_monitor_threads = 1 + rng() % 2;
    c.runtime.history_recording = true;

    auto r = wl::run_workload(c);
    chk::LinearizabilityOptions o;
    o.oracle = true;
    auto rep = chk::check_linearizable(r.history, wl::counter_spec(), o);
    max_ops = std::max(max_ops, rep.witness.size());
    nodes += rep.oracle_nodes;
    if (!rep.agree()) return {false, "history " + std::to_string(i) + ": fast path and oracle disagree"};
    if (!rep.pass) return {false, "history " + std::to_string(i) + " not linearizable: " + rep.violation};
    if (!chk::is_valid_witness(r.history, wl::counter_spec(), rep.oracle_witness))
      return {false, "history " + std::to_string(i) + ": oracle witness invalid"};
    g_oracles.check(c, r, label(c));
  }
  return {true, std::to_string(s.lin_histories) + " relaxed histories of <= " + std::to_string(max_ops) +
                    " ops agree and pass (" + std::to_string(nodes) + " oracle nodes)"};
}

// ---------------------------------------------------------------------------

// Small recorded run of a timed configuration, for the workload oracles.
void verify_small(wl::WorkloadConfig c) {
  c.ops_per_thread = 500;
  c.warmup_ops = 0;
  c.record_trace = true;
  c.runtime.history_recording = true;
  g_oracles.check(c, wl::run_workload(c), label(c) + " (timed config)");
}

std::map<std::string, double> timed(const am::bench::BenchConfig& b) {
  std::map<std::string, double> means;
  for (const auto& s : am::bench::run_bench(b)) means[s.param_value] = s.trimmed_mean_ns;
  return means;
}

Result pending_limit(const Settings& s) {
  am::bench::BenchConfig b;
  b.base.workload = WorkloadId::BoundedBuffer;
  b.base.buffer_size = 4;
  b.base.ops_per_thread = s.ops;
  b.threads = {16};
  b.pending_limits = {0, 20, std::nullopt};
  b.runs = s.runs;
  verify_small([&] { auto c = b.base; c.threads = 16; return c; }());
  auto m = timed(b);
  const double slow = m["0"] / m["unbounded"];
  const double near = m["20"] / m["unbounded"];
  const bool pass = slow >= 1.15 && std::abs(near - 1.0) <= 0.15;
  return {pass, "limit0/unbounded = " + fmt(slow) + " (need >= 1.15), limit20/unbounded = " + fmt(near) +
                    " (need within 0.15 of 1); means ms: 0=" + fmt(m["0"] / 1e6) + " 20=" + fmt(m["20"] / 1e6) +
                    " unbounded=" + fmt(m["unbounded"] / 1e6)};
}

Result outside_work(const Settings& s) {
  am::bench::BenchConfig b;
  b.base.workload = WorkloadId::SortedList;
  b.base.ops_per_thread = s.sll_ops;
  b.threads = {8};
  b.outside_work = {0, 1000};
  b.runs = s.runs;
  std::map<std::string, std::map<std::string, double>> m;
  for (auto impl : {Impl::ActiveMonitor, Impl::CoarseLock}) {
    b.base.impl = impl;
    verify_small([&] { auto c = b.base; c.threads = 8; return c; }());
    m[std::string(wl::to_string(impl))] = timed(b);
  }
  const double r0 = m["lock"]["0"] / m["am"]["0"];
  const double r1000 = m["lock"]["1000"] / m["am"]["1000"];
  const bool pass = r0 >= 0.8 && r0 <= 1.2 && r1000 >= r0 + 0.1;
  return {pass, "lock/am at work 0 = " + fmt(r0) + " (need [0.8, 1.2]), at work 1000 = " + fmt(r1000) +
                    " (need >= " + fmt(r0 + 0.1) + "); " + std::to_string(std::thread::hardware_concurrency()) +
                    " hardware threads"};
}

Result round_robin(const Settings& s) {
  am::bench::BenchConfig b;
  b.base.workload = WorkloadId::RoundRobin;
  b.base.ops_per_thread = s.ops;
  b.threads = {8};
  b.runs = s.runs;
  std::map<std::string, double> m;
  for (auto impl : {Impl::ActiveMonitor, Impl::CoarseLock}) {
    b.base.impl = impl;
    verify_small([&] { auto c = b.base; c.threads = 8; return c; }());
    m[std::string(wl::to_string(impl))] = timed(b)["0"];
  }
  return {m["am"] < m["lock"], "am " + fmt(m["am"] / 1e6) + " ms vs lock " + fmt(m["lock"] / 1e6) +
                                   " ms (lock/am = " + fmt(m["lock"] / m["am"]) + ")"};
}

// ---------------------------------------------------------------------------

Result two_task_shape(const Settings& s) {
  std::size_t calls = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    wl::WorkloadConfig c;
    c.workload = WorkloadId::TicketedRW;
    c.seed = seed;
    c.threads = 12;
    c.ops_per_thread = 100;
    c.warmup_ops = 0;
    c.record_trace = true;
    c.runtime.history_recording = true;
    auto r = wl::run_workload(c);
    g_oracles.check(c, r, label(c));

    chk::IndexedHistory index(r.history);
    std::map<std::pair<am::SubmitterId, std::uint64_t>, std::pair<std::string, std::size_t>> ends;
    for (const auto& e : r.history) {
      if (e.kind != am::EventKind::ExecEnd) continue;
      const auto& t = index.task(e.task_id);
      auto& slot = ends[{t.submitter, t.call_seq()}];
      slot.first = t.method;
      ++slot.second;
    }
    for (const auto& [key, v] : ends) {
      const std::size_t want = v.first == "startRead" || v.first == "startWrite" ? 2 : 1;
      if (v.second != want)
        return {false, v.first + " call has " + std::to_string(v.second) + " ExecEnd events, expected " +
                           std::to_string(want)};
    }
    const std::size_t expected = 12 * 100 * 2;
    if (ends.size() != expected)
      return {false, std::to_string(ends.size()) + " calls recorded, expected " + std::to_string(expected)};
    calls += ends.size();
  }

  // Informational only; not a pass condition.
  am::bench::BenchConfig b;
  b.base.workload = WorkloadId::TicketedRW;
  b.base.ops_per_thread = s.ops / 4;
  b.threads = {12};
  b.runs = 3;
  std::map<std::string, double> m;
  for (auto impl : {Impl::ActiveMonitor, Impl::CoarseLock}) {
    b.base.impl = impl;
    m[std::string(wl::to_string(impl))] = timed(b)["0"];
  }
  return {true, std::to_string(calls) + " calls with 2/1 ExecEnd shape; info: lock/am runtime ratio " +
                    fmt(m["lock"] / m["am"])};
}

// ---------------------------------------------------------------------------

using Token = std::tuple<am::EventKind, std::string, std::uint32_t, std::vector<std::int64_t>>;

std::vector<std::vector<Token>> per_worker(const wl::WorkloadResult& r) {
  chk::IndexedHistory index(r.history);
  std::map<am::SubmitterId, std::size_t> worker;
  for (std::size_t t = 0; t < r.submitters.size(); ++t) worker[r.submitters[t]] = t;
  std::vector<std::vector<Token>> out(r.submitters.size());
  for (const auto& e : r.history) {
    if (e.kind != am::EventKind::Submit && e.kind != am::EventKind::ExecEnd) continue;
    const auto& t = index.task(e.task_id);
    auto it = worker.find(t.submitter);
    if (it == worker.end()) continue;
    out[it->second].emplace_back(e.kind, t.method, t.stage, t.args);
  }
  return out;
}

Result blocking_equivalence(const Settings& s) {
  std::size_t compared = 0;
  for (auto id : kWorkloads) {
    for (std::uint64_t seed = 0; seed < s.equivalence_seeds; ++seed) {
      wl::WorkloadConfig c;
      c.workload = id;
      c.seed = seed;
      c.threads = id == WorkloadId::TicketedRW ? 6 : 4;
      c.ops_per_thread = 50;
      c.warmup_ops = 0;
      c.list_initial = 20;
      c.list_value_range = 40;
      c.record_trace = true;
      c.runtime.history_recording = true;

      auto limited = c;
      limited.runtime.pending_limit = 0;
      auto blocking = c;
      blocking.all_blocking = true;
      auto a = wl::run_workload(limited);
      auto b = wl::run_workload(blocking);
      g_oracles.check(limited, a, label(limited) + " limit 0");
      g_oracles.check(blocking, b, label(blocking) + " all blocking");
      auto sa = per_worker(a), sb = per_worker(b);
      for (std::size_t t = 0; t < sa.size(); ++t) {
        if (sa[t] != sb[t])
          return {false, label(c) + " worker " + std::to_string(t) + ": (submit, exec-end) sequences differ"};
        ++compared;
      }
    }
  }
  return {true, std::to_string(compared) + " per-submitter sequences identical across 5 workloads"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  Settings s;
  std::vector<int> only;
  app.add_option("--seeds", s.seeds, "seeds per workload for the rule suite")->capture_default_str();
  app.add_option("--histories", s.lin_histories, "histories for the oracle agreement")->capture_default_str();
  app.add_option("--ops", s.ops, "timed operations per thread")->capture_default_str();
  app.add_option("--sll-ops", s.sll_ops, "timed operations per thread for the sorted list")->capture_default_str();
  app.add_option("--runs", s.runs, "timed runs per point")->capture_default_str();
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  std::cout << "hardware threads: " << std::thread::hardware_concurrency() << "\n" << std::flush;
  const std::vector<std::pair<std::string, std::function<Result(const Settings&)>>> criteria{
      {"rule suite", rule_suite},
      {"linearizability oracle agreement", oracle_agreement},
      {"pending-limit convergence", pending_limit},
      {"outside-CS parallelism trend", outside_work},
      {"round-robin advantage", round_robin},
      {"ticketed readers-writers two-task shape", two_task_shape},
      {"workload oracles", [](const Settings&) {
         if (g_oracles.runs == 0) return Result{false, "no recorded runs"};
         return Result{g_oracles.failures == 0,
                       std::to_string(g_oracles.runs) + " recorded runs" +
                           (g_oracles.failures ? ", " + std::to_string(g_oracles.failures) + " failures, first: " +
                                                     g_oracles.first
                                               : "")};
       }},
      {"pending_limit=0 blocking equivalence", blocking_equivalence},
  };

  // The oracle criterion reports on runs made by the others, so it goes last.
  std::vector<std::size_t> order{0, 1, 2, 3, 4, 5, 7, 6};
  std::vector<std::string> lines(criteria.size());
  bool all = true;
  for (auto i : order) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = criteria[i].second(s);
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && r.pass;
    lines[i] = "criterion " + std::to_string(n) + " " + (r.pass ? "PASS" : "FAIL") + " " + criteria[i].first +
               ": " + r.detail + " [" + fmt(secs, 1) + " s]";
    std::cout << lines[i] << "\n" << std::flush;
  }
  std::cout << "\nsummary:\n";
  for (const auto& l : lines)
    if (!l.empty()) std::cout << l.substr(0, l.find(':')) << "\n";
  return all ? 0 : 1;
}
