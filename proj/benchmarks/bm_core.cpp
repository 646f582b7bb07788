#include <benchmark/benchmark.h>

#include <random>

#include "activemonitor/bench.hpp"
#include "activemonitor/lane_table.hpp"
#include "activemonitor/runtime.hpp"
#include "activemonitor/workloads.hpp"

namespace {

void BM_SubmitNonBlocking(benchmark::State& state) {
  am::RuntimeConfig c;
  if (state.range(0) >= 0) c.pending_limit = static_cast<std::size_t>(state.range(0));
  auto rt = am::start_runtime(c, {am::workloads::build_counter()});
  auto inc = rt->method("counter", "inc");
  am::CompletionHandle last;
  for (auto _ : state) last = rt->submit_with(inc, std::int64_t{1});
  last.await();
  rt->shutdown(am::ShutdownMode::Drain);
}
BENCHMARK(BM_SubmitNonBlocking)->Arg(-1)->Arg(0)->Arg(20);

void BM_CallBlocking(benchmark::State& state) {
  auto rt = am::start_runtime({}, {am::workloads::build_counter()});
  auto read = rt->method("counter", "read");
  for (auto _ : state) benchmark::DoNotOptimize(rt->call(read));
  rt->shutdown(am::ShutdownMode::Drain);
}
BENCHMARK(BM_CallBlocking);

void BM_ScheduleNext(benchmark::State& state) {
  const auto lanes = static_cast<std::size_t>(state.range(0));
  am::LaneTable<int> table;
  std::mt19937_64 rng(1);
  for (std::size_t i = 0; i < lanes; ++i) table.push_back(i, static_cast<int>(rng() % 4), rng());
  for (auto _ : state) benchmark::DoNotOptimize(table.schedule_next([](int v) { return v == 0; }));
}
BENCHMARK(BM_ScheduleNext)->Range(2, 64);

void BM_TrimmedMean(benchmark::State& state) {
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(2);
  for (auto& x : v) x = static_cast<double>(rng() % 1000000);
  for (auto _ : state) benchmark::DoNotOptimize(am::bench::trimmed_mean(v));
}
BENCHMARK(BM_TrimmedMean)->Arg(25)->Arg(1000);

void BM_SortedListWorkload(benchmark::State& state) {
  am::workloads::WorkloadConfig c;
  c.workload = am::workloads::WorkloadId::SortedList;
  c.impl = static_cast<am::workloads::Impl>(state.range(0));
  c.threads = 4;
  c.ops_per_thread = 2000;
  c.warmup_ops = 100;
  c.list_initial = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(am::workloads::run_workload(c).sink);
}
BENCHMARK(BM_SortedListWorkload)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
