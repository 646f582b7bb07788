#include <sys/resource.h>

#include <algorithm>
#include <array>
#include <barrier>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "activemonitor/error.hpp"
#include "activemonitor/runtime.hpp"
#include "activemonitor/workloads.hpp"

namespace am::workloads {

namespace {

using Ints = std::vector<std::int64_t>;

constexpr std::array<std::string_view, 6> kWorkloadNames{"bb", "sll", "rr", "pbb", "trw", "mix"};
constexpr std::array<std::string_view, 3> kImplNames{"am", "lock", "fg"};

std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t a, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), tag};
  return std::mt19937_64(seq);
}

std::size_t half(const WorkloadConfig& c) { return c.threads / 2; }

}  // namespace

std::string_view to_string(WorkloadId id) noexcept { return kWorkloadNames[static_cast<std::size_t>(id)]; }

WorkloadId parse_workload(std::string_view text) {
  for (std::size_t i = 0; i < kWorkloadNames.size(); ++i)
    if (kWorkloadNames[i] == text) return static_cast<WorkloadId>(i);
  throw Error(Errc::ConfigError, "unknown workload '" + std::string(text) + "'");
}

std::string_view to_string(Impl impl) noexcept { return kImplNames[static_cast<std::size_t>(impl)]; }

Impl parse_impl(std::string_view text) {
  for (std::size_t i = 0; i < kImplNames.size(); ++i)
    if (kImplNames[i] == text) return static_cast<Impl>(i);
  throw Error(Errc::ConfigError, "unknown implementation '" + std::string(text) + "'");
}

void validate(const WorkloadConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(Errc::ConfigError, msg); };
  if (c.threads == 0) fail("threads must be at least 1");
  if (c.buffer_size == 0) fail("buffer size must be at least 1");
  if (!(c.await_probability >= 0.0 && c.await_probability <= 1.0)) fail("await probability must be in [0, 1]");
  switch (c.workload) {
    case WorkloadId::BoundedBuffer:
    case WorkloadId::ParametrizedBuffer:
      if (c.threads < 2 || c.threads % 2 != 0)
        fail("buffer workloads need an even number of threads (producers = consumers)");
      break;
    case WorkloadId::RoundRobin:
      if (c.threads < 2) fail("round robin needs at least 2 threads");
      // pending slots can all be held by enters waiting for a turn whose owner is blocked on the limit
      if (c.impl == Impl::ActiveMonitor && c.runtime.pending_limit && *c.runtime.pending_limit > 0)
        fail("round robin deadlocks under a positive pending limit; use 0 or unbounded");
      break;
    case WorkloadId::TicketedRW:
      if (c.threads < 2) fail("ticketed readers-writers needs at least 2 threads");
      break;
    case WorkloadId::SortedList:
      if (c.list_value_range == 0) fail("list value range must be at least 1");
      break;
    case WorkloadId::Mix:
      if (c.impl != Impl::ActiveMonitor) fail("the mix workload only exists as an active monitor");
      break;
  }
  if (c.impl == Impl::FineGrained && c.workload != WorkloadId::SortedList)
    fail("the fine-grained implementation only exists for the sorted list");
}

std::size_t writer_count(const WorkloadConfig& c) {
  auto w = static_cast<std::size_t>(std::llround(static_cast<double>(c.threads) /
                                                 static_cast<double>(1 + c.reader_multiplier)));
  w = std::max<std::size_t>(w, 1);
  return c.threads > 1 ? std::min(w, c.threads - 1) : w;
}

std::string role_of(const WorkloadConfig& c, std::size_t t) {
  switch (c.workload) {
    case WorkloadId::BoundedBuffer:
    case WorkloadId::ParametrizedBuffer:
      return t < half(c) ? "producer" : "consumer";
    case WorkloadId::TicketedRW:
      return t < writer_count(c) ? "writer" : "reader";
    default:
      return "";
  }
}

std::size_t max_batch(std::size_t buffer_size) {
  return std::max<std::size_t>(1, std::min<std::size_t>(8, buffer_size / 2));
}

std::vector<std::int64_t> initial_list(const WorkloadConfig& c) {
  auto rng = rng_for(c.seed, ~std::uint64_t{0}, 4);
  Ints out(c.list_initial);
  for (auto& v : out) v = static_cast<std::int64_t>(rng() % c.list_value_range);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Op> make_stream(const WorkloadConfig& c, std::size_t t) {
  validate(c);
  const std::size_t total = c.ops_per_thread == 0 ? 0 : c.warmup_ops + c.ops_per_thread;
  std::vector<Op> ops(total);
  auto await_rng = rng_for(c.seed, t, 7);
  std::bernoulli_distribution await_coin(c.await_probability);
  const auto tag = static_cast<std::int64_t>(t) << 32;

  switch (c.workload) {
    case WorkloadId::BoundedBuffer:
      for (std::size_t i = 0; i < total; ++i) {
        if (t < half(c)) {
          ops[i].kind = OpKind::Put;
          ops[i].value = tag | static_cast<std::int64_t>(i);
        }
        else ops[i].kind = OpKind::Take;
      }
      break;
    case WorkloadId::ParametrizedBuffer: {
      // consumer i replays producer i's batch sizes so the totals match
      const std::size_t pair = t < half(c) ? t : t - half(c);
      auto sizes = rng_for(c.seed, pair, 2);
      const std::size_t bound = max_batch(c.buffer_size);
      std::int64_t next = 0;
      for (auto& op : ops) {
        const std::size_t k = 1 + sizes() % bound;
        if (t < half(c)) {
          op.kind = OpKind::PutBatch;
          for (std::size_t j = 0; j < k; ++j) op.batch.push_back(tag | next++);
        } else {
          op.kind = OpKind::TakeBatch;
          op.value = static_cast<std::int64_t>(k);
        }
      }
      break;
    }
    case WorkloadId::SortedList: {
      auto rng = rng_for(c.seed, t, 3);
      for (auto& op : ops) {
        op.kind = (rng() & 1) ? OpKind::Remove : OpKind::Insert;
        op.value = static_cast<std::int64_t>(rng() % c.list_value_range);
      }
      break;
    }
    case WorkloadId::RoundRobin:
      for (auto& op : ops) {
        op.kind = OpKind::Enter;
        op.value = static_cast<std::int64_t>(t);
      }
      break;
    case WorkloadId::TicketedRW:
      for (auto& op : ops) op.kind = t < writer_count(c) ? OpKind::Write : OpKind::Read;
      break;
    case WorkloadId::Mix: {
      auto rng = rng_for(c.seed, t, 6);
      std::array<std::int64_t, 2> net{0, 0};
      for (auto& op : ops) {
        op.monitor = static_cast<std::uint32_t>(rng() % 2);
        op.value = 1 + static_cast<std::int64_t>(rng() % 3);
        switch (rng() % 4) {
          case 0: op.kind = OpKind::Inc; break;
          case 1: op.kind = net[op.monitor] >= op.value ? OpKind::Dec : OpKind::Inc; break;
          case 2: op.kind = OpKind::Get; break;
          default: op.kind = OpKind::Bump; break;
        }
        if (op.kind == OpKind::Inc) net[op.monitor] += op.value;
        if (op.kind == OpKind::Dec) net[op.monitor] -= op.value;
        if (op.kind == OpKind::Bump) net[op.monitor] += 1;
        if (op.kind == OpKind::Get || op.kind == OpKind::Bump) op.value = 0;
      }
      break;
    }
  }
  if (c.await_probability > 0.0)
    for (auto& op : ops) op.await = await_coin(await_rng);
  return ops;
}

std::uint64_t outside_work(std::size_t additions, std::uint64_t seed) noexcept {
  std::uint64_t acc = seed;
  for (std::size_t i = 0; i < additions; ++i) {
    acc += i;
    asm volatile("" : "+r"(acc));
  }
  return acc;
}

// ---------------------------------------------------------------------------

namespace {

using SteadyClock = std::chrono::steady_clock;

std::uint64_t timeval_ns(const timeval& tv) {
  return static_cast<std::uint64_t>(tv.tv_sec) * 1'000'000'000ull + static_cast<std::uint64_t>(tv.tv_usec) * 1000ull;
}

std::uint64_t cpu_now() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return timeval_ns(ru.ru_utime) + timeval_ns(ru.ru_stime);
}

thread_local std::size_t t_worker = 0;

struct TraceSink {
  std::mutex m;
  std::vector<TraceOp> ops;

  TraceHook hook(std::uint32_t monitor = 0) {
    return [this, monitor](std::string_view method, std::uint32_t stage, Ints args, Ints result) {
      std::lock_guard lock(m);
      ops.push_back(TraceOp{t_worker, monitor, std::string(method), stage, std::move(args), std::move(result)});
    };
  }
};

// Runs every stream on its own thread: warm-up, a barrier that starts the
// clock, then the timed part. finish(t) must leave no work of t in flight.
template <class Body, class Finish>
void run_threads(const WorkloadConfig& c, const std::vector<std::vector<Op>>& streams, Body&& body,
                 Finish&& finish, WorkloadResult& out) {
  const std::size_t n = streams.size();
  SteadyClock::time_point start;
  auto on_start = [&start]() noexcept { start = SteadyClock::now(); };
  std::barrier sync(static_cast<std::ptrdiff_t>(n), on_start);
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::uint64_t> sinks(n, 0);
  out.submitters.assign(n, 0);

  auto worker = [&](std::size_t t) {
    t_worker = t;
    out.submitters[t] = MonitorRuntime::current_thread_id();
    const auto& ops = streams[t];
    const std::size_t warm = std::min(c.warmup_ops, ops.size());
    bool arrived = false;
    try {
      for (std::size_t i = 0; i < warm; ++i) body(t, ops[i]);
      finish(t);
      arrived = true;
      sync.arrive_and_wait();
      std::uint64_t sink = 0;
      for (std::size_t i = warm; i < ops.size(); ++i) {
        if (c.outside_cs_work > 0) sink ^= outside_work(c.outside_cs_work, i);
        body(t, ops[i]);
      }
      finish(t);
      sinks[t] = sink;
    } catch (...) {
      std::lock_guard lock(err_mutex);
      if (!first_error) first_error = std::current_exception();
      if (!arrived) sync.arrive_and_drop();
    }
  };

  const std::uint64_t cpu0 = cpu_now();
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker, t);
  for (auto& th : threads) th.join();
  const auto end = SteadyClock::now();
  if (first_error) std::rethrow_exception(first_error);

  out.wall_ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(end - start).count());
  out.cpu_ns = cpu_now() - cpu0;
  rusage ru{};
  if (getrusage(RUSAGE_SELF, &ru) == 0) out.peak_rss_bytes = static_cast<std::uint64_t>(ru.ru_maxrss) * 1024;
  out.timed_ops = n * c.ops_per_thread;
  for (auto s : sinks) out.sink ^= s;
}

MonitorSpec spec_for(const WorkloadConfig& c, const Ints& initial, std::size_t index = 0) {
  switch (c.workload) {
    case WorkloadId::BoundedBuffer: return build_bounded_buffer(c.buffer_size, c.all_blocking);
    case WorkloadId::SortedList: return build_sorted_list(initial, c.all_blocking);
    case WorkloadId::RoundRobin: return build_round_robin(c.threads, c.all_blocking);
    case WorkloadId::ParametrizedBuffer: return build_parametrized_buffer(c.buffer_size, c.all_blocking);
    case WorkloadId::TicketedRW: return build_ticketed_rw(c.all_blocking);
    case WorkloadId::Mix: return build_counter(c.all_blocking, "counter" + std::to_string(index));
  }
  throw Error(Errc::ConfigError, "unknown workload");
}

void run_active(const WorkloadConfig& c, const std::vector<std::vector<Op>>& streams, const Ints& initial,
                WorkloadResult& out) {
  RuntimeConfig rc = c.runtime;
  if (c.record_trace) rc.history_recording = true;
  std::vector<MonitorSpec> specs{spec_for(c, initial, 0)};
  if (c.workload == WorkloadId::Mix) specs.push_back(spec_for(c, initial, 1));
  auto rt = start_runtime(rc, specs);

  auto m = [&](std::size_t i, const char* name) { return rt->method(specs[i].name, name); };
  const std::size_t n = streams.size();
  std::vector<std::array<CompletionHandle, 2>> last(n);

  auto issue = [&](std::size_t t, std::uint32_t mon, MethodRef method, Args args, bool await) {
    CompletionHandle h = rt->submit(method, std::move(args));
    if (await) h.await();
    else if (method.method->kind == MethodKind::NonBlocking) last[t][mon] = std::move(h);
  };

  std::function<void(std::size_t, const Op&)> body;
  switch (c.workload) {
    case WorkloadId::BoundedBuffer: {
      auto put = m(0, "put"), take = m(0, "take");
      body = [&, put, take](std::size_t t, const Op& op) {
        if (op.kind == OpKind::Put) issue(t, 0, put, Args::of(op.value), op.await);
        else rt->submit(take);
      };
      break;
    }
    case WorkloadId::ParametrizedBuffer: {
      auto put = m(0, "put_batch"), take = m(0, "take_batch");
      body = [&, put, take](std::size_t t, const Op& op) {
        if (op.kind == OpKind::PutBatch) issue(t, 0, put, Args::of(op.batch), op.await);
        else rt->submit(take, Args::of(op.value));
      };
      break;
    }
    case WorkloadId::SortedList: {
      auto ins = m(0, "insert"), rem = m(0, "remove");
      body = [&, ins, rem](std::size_t t, const Op& op) {
        issue(t, 0, op.kind == OpKind::Insert ? ins : rem, Args::of(op.value), op.await);
      };
      break;
    }
    case WorkloadId::RoundRobin: {
      auto enter = m(0, "enter");
      body = [&, enter](std::size_t t, const Op& op) { issue(t, 0, enter, Args::of(op.value), op.await); };
      break;
    }
    case WorkloadId::TicketedRW: {
      auto sr = m(0, "startRead"), er = m(0, "endRead"), sw = m(0, "startWrite"), ew = m(0, "endWrite");
      body = [&, sr, er, sw, ew](std::size_t t, const Op& op) {
        const bool read = op.kind == OpKind::Read;
        rt->submit(read ? sr : sw);
        issue(t, 0, read ? er : ew, {}, op.await);
      };
      break;
    }
    case WorkloadId::Mix: {
      std::array<std::array<MethodRef, 4>, 2> ms;
      for (std::size_t i = 0; i < 2; ++i) ms[i] = {m(i, "inc"), m(i, "dec"), m(i, "read"), m(i, "bump")};
      body = [&, ms](std::size_t t, const Op& op) {
        const auto& r = ms[op.monitor];
        switch (op.kind) {
          case OpKind::Inc: issue(t, op.monitor, r[0], Args::of(op.value), op.await); break;
          case OpKind::Dec: issue(t, op.monitor, r[1], Args::of(op.value), op.await); break;
          case OpKind::Get: rt->submit(r[2]); break;
          default: issue(t, op.monitor, r[3], {}, op.await); break;
        }
      };
      break;
    }
  }
  auto finish = [&](std::size_t t) {
    for (auto& h : last[t]) {
      if (h.valid()) h.await();
      h = {};
    }
  };

  try {
    run_threads(c, streams, body, finish, out);
    if (c.workload == WorkloadId::SortedList && c.ops_per_thread == 0) out.final_list = initial;
    else if (c.workload == WorkloadId::SortedList)
      out.final_list = std::any_cast<Ints>(rt->call(m(0, "snapshot")));
  } catch (...) {
    rt->shutdown(ShutdownMode::Abort);
    throw;
  }
  rt->shutdown(ShutdownMode::Drain);
  if (rc.history_recording) out.history = rt->history();
  if (c.record_trace) out.trace = trace_from_history(out.history);
}

void run_lock(const WorkloadConfig& c, const std::vector<std::vector<Op>>& streams, const Ints& initial,
              WorkloadResult& out) {
  TraceSink sink;
  auto hook = c.record_trace ? sink.hook() : TraceHook{};
  auto noop = [](std::size_t) {};
  switch (c.workload) {
    case WorkloadId::BoundedBuffer: {
      LockBuffer buf(c.buffer_size);
      buf.set_hook(hook);
      run_threads(c, streams, [&](std::size_t, const Op& op) {
        if (op.kind == OpKind::Put) buf.put(op.value);
        else buf.take();
      }, noop, out);
      break;
    }
    case WorkloadId::ParametrizedBuffer: {
      LockBatchBuffer buf(c.buffer_size);
      buf.set_hook(hook);
      run_threads(c, streams, [&](std::size_t, const Op& op) {
        if (op.kind == OpKind::PutBatch) buf.put_batch(op.batch);
        else buf.take_batch(static_cast<std::size_t>(op.value));
      }, noop, out);
      break;
    }
    case WorkloadId::SortedList: {
      auto drive = [&](auto& list) {
        list.set_hook(hook);
        run_threads(c, streams, [&](std::size_t, const Op& op) {
          if (op.kind == OpKind::Insert) list.insert(op.value);
          else list.remove(op.value);
        }, noop, out);
        out.final_list = list.values();
      };
      if (c.impl == Impl::FineGrained) {
        FineGrainedSortedList list(initial);
        drive(list);
      } else {
        LockSortedList list(initial);
        drive(list);
      }
      break;
    }
    case WorkloadId::RoundRobin: {
      LockRoundRobin rr(c.threads);
      rr.set_hook(hook);
      run_threads(c, streams, [&](std::size_t, const Op& op) { rr.enter(op.value); }, noop, out);
      break;
    }
    case WorkloadId::TicketedRW: {
      LockTicketRW rw;
      rw.set_hook(hook);
      run_threads(c, streams, [&](std::size_t, const Op& op) {
        if (op.kind == OpKind::Read) {
          rw.start_read();
          rw.end_read();
        } else {
          rw.start_write();
          rw.end_write();
        }
      }, noop, out);
      break;
    }
    case WorkloadId::Mix:
      throw Error(Errc::ConfigError, "the mix workload only exists as an active monitor");
  }
  out.trace = std::move(sink.ops);
}

}  // namespace

WorkloadResult run_workload(const WorkloadConfig& config) {
  validate(config);
  std::vector<std::vector<Op>> streams(config.threads);
  for (std::size_t t = 0; t < config.threads; ++t) streams[t] = make_stream(config, t);
  const Ints initial = config.workload == WorkloadId::SortedList ? initial_list(config) : Ints{};
  WorkloadResult out;
  if (config.impl == Impl::ActiveMonitor) run_active(config, streams, initial, out);
  else run_lock(config, streams, initial, out);
  return out;
}

std::vector<TraceOp> trace_from_history(const History& history) {
  check::IndexedHistory index(history);
  std::vector<const check::TaskRecord*> done;
  for (const auto& task : index.tasks())
    if (task.outcome == Outcome::Completed) done.push_back(&task);
  std::sort(done.begin(), done.end(),
            [](const auto* a, const auto* b) { return a->final_end() < b->final_end(); });
  std::vector<TraceOp> out;
  out.reserve(done.size());
  for (const auto* task : done)
    out.push_back(TraceOp{task->submitter, task->monitor, task->method, task->stage, task->args, task->result});
  return out;
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

check::Verdict verdict(std::string name, bool pass, std::string message = {}) {
  return check::Verdict{std::move(name), pass, pass ? std::string() : std::move(message), {}};
}

std::size_t expected_tasks(const WorkloadConfig& c) {
  std::size_t total = 0;
  for (std::size_t t = 0; t < c.threads; ++t) {
    for (const auto& op : make_stream(c, t)) {
      if (op.kind == OpKind::Read || op.kind == OpKind::Write) total += 3;
      else if (op.kind == OpKind::Bump) total += 2;
      else total += 1;
    }
  }
  if (c.workload == WorkloadId::SortedList && c.impl == Impl::ActiveMonitor && c.ops_per_thread > 0) total += 1;
  return total;
}

check::SequentialSpec spec_of(const WorkloadConfig& c) {
  switch (c.workload) {
    case WorkloadId::BoundedBuffer: return buffer_spec(c.buffer_size);
    case WorkloadId::ParametrizedBuffer: return parametrized_buffer_spec(c.buffer_size);
    case WorkloadId::SortedList: return sorted_list_spec(initial_list(c));
    case WorkloadId::RoundRobin: return round_robin_spec(c.threads);
    case WorkloadId::TicketedRW: return ticket_spec();
    case WorkloadId::Mix: return counter_spec();
  }
  throw Error(Errc::ConfigError, "unknown workload");
}

void buffer_checks(const std::vector<TraceOp>& trace, std::vector<check::Verdict>& out) {
  Ints puts, takes;
  for (const auto& op : trace) {
    if (op.method == "put" || op.method == "put_batch") puts.insert(puts.end(), op.args.begin(), op.args.end());
    if (op.method == "take" || op.method == "take_batch") takes.insert(takes.end(), op.result.begin(), op.result.end());
  }
  out.push_back(verdict("fifo", puts == takes, "items were taken in a different order than they were put"));
  std::sort(puts.begin(), puts.end());
  std::sort(takes.begin(), takes.end());
  out.push_back(verdict("conservation", puts == takes, "taken items differ from put items"));
}

void list_checks(const WorkloadConfig& c, const WorkloadResult& r, const std::vector<TraceOp>& trace,
                 std::vector<check::Verdict>& out) {
  out.push_back(verdict("sorted", std::is_sorted(r.final_list.begin(), r.final_list.end()),
                        "final list is not sorted"));
  SortedList expect(initial_list(c));
  bool results_ok = true;
  for (const auto& op : trace) {
    if (op.method == "insert") expect.insert(op.args.at(0));
    if (op.method == "remove") results_ok &= (expect.remove(op.args.at(0)) ? 1 : 0) == op.result.at(0);
  }
  out.push_back(verdict("final_list", results_ok && expect.values() == r.final_list,
                        "final list differs from the sequential replay of the trace"));
}

void rr_checks(const WorkloadConfig& c, const std::vector<TraceOp>& trace, std::vector<check::Verdict>& out) {
  std::int64_t k = 0;
  const auto n = static_cast<std::int64_t>(c.threads);
  for (const auto& op : trace) {
    if (op.method != "enter") continue;
    if (op.args.at(0) != k % n || op.result.at(0) != k) {
      out.push_back(verdict("cyclic", false,
                            "entry " + std::to_string(k) + " by thread " + std::to_string(op.args.at(0))));
      return;
    }
    ++k;
  }
  out.push_back(verdict("cyclic", true));
}

void ticket_checks(const std::vector<TraceOp>& trace, std::vector<check::Verdict>& out) {
  std::int64_t next = 0, rcnt = 0;
  bool writer = false, order = true, exclusion = true;
  for (const auto& op : trace) {
    const bool read = op.method == "startRead";
    if ((read || op.method == "startWrite") && op.stage == 1) {
      order &= op.result.at(0) == next++;
      if (read) {
        exclusion &= !writer;
        ++rcnt;
      } else {
        exclusion &= !writer && rcnt == 0;
        writer = true;
      }
    } else if (op.method == "endRead") {
      --rcnt;
    } else if (op.method == "endWrite") {
      writer = false;
    }
  }
  out.push_back(verdict("ticket_order", order, "admissions did not follow ticket order"));
  out.push_back(verdict("writer_exclusion", exclusion, "a writer overlapped another reader or writer"));
}

}  // namespace

std::vector<check::Verdict> check_workload(const WorkloadConfig& config, const WorkloadResult& result) {
  std::vector<check::Verdict> out;
  std::vector<TraceOp> trace = result.trace;
  if (trace.empty() && !result.history.empty()) trace = trace_from_history(result.history);
  const std::size_t expected = expected_tasks(config);
  if (trace.empty() && expected > 0) {
    out.push_back(verdict("trace", false, "no trace was recorded"));
    return out;
  }
  out.push_back(verdict("complete", trace.size() == expected,
                        "trace has " + std::to_string(trace.size()) + " operations, expected " +
                            std::to_string(expected)));

  std::vector<check::OpRecord> ops;
  ops.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& t = trace[i];
    ops.push_back(check::OpRecord{i, t.monitor, t.method, t.stage, t.thread, 0, t.args, t.result});
  }
  std::string why;
  auto bad = check::replay(spec_of(config), ops, &why);
  out.push_back(verdict("replay", !bad, bad ? "operation " + std::to_string(*bad) + ": " + why : ""));

  switch (config.workload) {
    case WorkloadId::BoundedBuffer:
    case WorkloadId::ParametrizedBuffer: buffer_checks(trace, out); break;
    case WorkloadId::SortedList: list_checks(config, result, trace, out); break;
    case WorkloadId::RoundRobin: rr_checks(config, trace, out); break;
    case WorkloadId::TicketedRW: ticket_checks(trace, out); break;
    case WorkloadId::Mix: break;
  }
  return out;
}

}  // namespace am::workloads
