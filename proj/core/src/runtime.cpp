#include "activemonitor/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <latch>
#include <map>
#include <mutex>
#include <system_error>
#include <thread>
#include <utility>

#include "activemonitor/lane_table.hpp"

namespace am {

std::string_view to_string(TaskStatus status) noexcept {
  switch (status) {
    case TaskStatus::Pending: return "pending";
    case TaskStatus::Running: return "running";
    case TaskStatus::Completed: return "completed";
    case TaskStatus::Failed: return "failed";
  }
  return "unknown";
}

namespace detail {

struct Call {
  const MethodSpec* method = nullptr;
  std::uint32_t monitor = 0;
  std::uint32_t stage_count = 1;
  Args args;
  Scratch scratch;
  SubmitterId submitter = 0;
  std::uint64_t seq_base = 0;
  std::uint64_t task_base = 0;
  bool blocking = false;
  bool counts_pending = false;
  std::shared_ptr<HistoryRecorder> recorder;

  // Touched only by the owning executor until status becomes final.
  std::uint32_t stage = 0;
  std::atomic<std::uint32_t> attempts{0};
  Value result;
  std::exception_ptr error;
  std::string error_message;
  bool shutdown = false;

  std::atomic<TaskStatus> status{TaskStatus::Pending};
  std::atomic<int> waiters{0};
  std::atomic<bool> awaited{false};
  std::mutex mutex;
  std::condition_variable cv;
};

namespace {

bool is_final(TaskStatus s) { return s == TaskStatus::Completed || s == TaskStatus::Failed; }

void wait_done(Call& call, std::size_t spins) {
  for (std::size_t i = 0; i < spins; ++i) {
    if (is_final(call.status.load(std::memory_order_acquire))) return;
    std::this_thread::yield();
  }
  if (is_final(call.status.load(std::memory_order_acquire))) return;
  call.waiters.fetch_add(1, std::memory_order_seq_cst);
  {
    std::unique_lock lock(call.mutex);
    call.cv.wait(lock, [&] { return is_final(call.status.load(std::memory_order_acquire)); });
  }
  call.waiters.fetch_sub(1, std::memory_order_relaxed);
}

bool wait_done_for(Call& call, std::chrono::nanoseconds timeout) {
  if (is_final(call.status.load(std::memory_order_acquire))) return true;
  call.waiters.fetch_add(1, std::memory_order_seq_cst);
  bool done;
  {
    std::unique_lock lock(call.mutex);
    done = call.cv.wait_for(lock, timeout,
                            [&] { return is_final(call.status.load(std::memory_order_acquire)); });
  }
  call.waiters.fetch_sub(1, std::memory_order_relaxed);
  return done;
}

void publish(Call& call, TaskStatus status) {
  call.status.store(status, std::memory_order_seq_cst);
  if (call.waiters.load(std::memory_order_seq_cst) > 0) {
    std::lock_guard lock(call.mutex);
    call.cv.notify_all();
  }
}

}  // namespace
}  // namespace detail

// ---------------------------------------------------------------------------
// CompletionHandle

TaskStatus CompletionHandle::status() const {
  if (!call_) throw Error(Errc::ConfigError, "status() on an empty completion handle");
  return call_->status.load(std::memory_order_acquire);
}

bool CompletionHandle::ready() const { return detail::is_final(status()); }

bool CompletionHandle::wait_for(std::chrono::nanoseconds timeout) const {
  if (!call_) throw Error(Errc::ConfigError, "wait_for() on an empty completion handle");
  return detail::wait_done_for(*call_, timeout);
}

Value CompletionHandle::await(std::optional<std::chrono::nanoseconds> timeout) const {
  if (!call_) throw Error(Errc::ConfigError, "await() on an empty completion handle");
  detail::Call& call = *call_;
  if (timeout) {
    if (!detail::wait_done_for(call, *timeout))
      throw Error(Errc::Timeout, "await timed out on task " + std::to_string(call.task_base));
  } else {
    detail::wait_done(call, 0);
  }
  call.awaited.store(true, std::memory_order_relaxed);
  if (call.recorder && !call.blocking) {
    HistoryEvent ev;
    ev.ts = event_clock();
    ev.kind = EventKind::AwaitReturn;
    ev.task_id = call.task_base + call.stage;
    ev.monitor_id = call.monitor;
    ev.thread_id = MonitorRuntime::current_thread_id();
    ev.method = call.method->name;
    ev.stage = call.stage;
    ev.seq = call.seq_base + call.stage;
    ev.blocking = call.blocking;
    ev.stage_count = call.stage_count;
    call.recorder->record(std::move(ev));
  }
  if (call.status.load(std::memory_order_acquire) == TaskStatus::Failed)
    throw TaskFailedError(call.error_message, call.attempts.load(), call.error, call.shutdown);
  return call.result;
}

std::uint32_t CompletionHandle::attempts() const {
  return call_ ? call_->attempts.load(std::memory_order_relaxed) : 0;
}

std::uint64_t CompletionHandle::task_id() const { return call_ ? call_->task_base : 0; }
std::uint64_t CompletionHandle::seq() const { return call_ ? call_->seq_base : 0; }
SubmitterId CompletionHandle::submitter() const { return call_ ? call_->submitter : 0; }

// ---------------------------------------------------------------------------
// Runtime internals

namespace {

std::atomic<std::uint64_t> g_next_thread_id{0};
std::atomic<std::uint64_t> g_next_runtime_uid{0};

thread_local SubmitterId t_thread_id = 0;
thread_local const void* t_executor = nullptr;

using CallPtr = std::shared_ptr<detail::Call>;

struct SubmitterState {
  std::uint64_t runtime_uid = 0;
  std::uint64_t seq = 0;
  CallPtr last_nonblocking;
  std::uint32_t last_monitor = 0;
};

thread_local std::vector<SubmitterState> t_submitters;

SubmitterState& submitter_state(std::uint64_t runtime_uid) {
  for (auto& s : t_submitters)
    if (s.runtime_uid == runtime_uid) return s;
  if (t_submitters.size() >= 32) t_submitters.erase(t_submitters.begin());
  t_submitters.push_back(SubmitterState{runtime_uid, 0, nullptr, 0});
  return t_submitters.back();
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
  if (!head(s.front())) return false;
  return std::all_of(s.begin() + 1, s.end(), tail);
}

struct MethodInfo {
  MethodSpec spec;
  std::vector<std::string> scratch_names;
};

struct MonitorSlot {
  std::uint32_t id = 0;
  std::string name;
  std::size_t executor = 0;
  std::function<std::any()> state_init;
  std::vector<std::unique_ptr<MethodInfo>> methods;
  std::map<std::string, std::size_t, std::less<>> by_name;

  // Executor-confined.
  std::any state;
  LaneTable<CallPtr> lanes;
  std::uint64_t next_stamp = 0;

  // Pending-slot accounting for non-blocking calls.
  std::mutex pending_mutex;
  std::condition_variable pending_cv;
  std::size_t pending = 0;
  std::size_t slot_waiters = 0;
  bool closed = false;
  std::atomic<std::size_t> pending_unbounded{0};
  std::atomic<std::size_t> max_pending{0};

  std::atomic<std::uint64_t> tasks_executed{0};
};

enum class StopMode { Run, Drain, Abort };

struct Executor {
  std::size_t index = 0;
  std::vector<MonitorSlot*> monitors;
  std::thread thread;

  std::mutex mutex;
  std::condition_variable cv;
  std::vector<CallPtr> inbox;  // guarded by mutex
  bool parked = false;         // guarded by mutex
  bool accepting = true;       // guarded by mutex
  StopMode stop = StopMode::Run;  // guarded by mutex
  std::atomic<bool> has_inbox{false};
  std::atomic<bool> abort{false};

  std::atomic<std::uint64_t> sweeps{0};
  std::atomic<std::uint64_t> parks{0};
  std::exception_ptr init_error;
};

void note_max(std::atomic<std::size_t>& max, std::size_t value) {
  std::size_t cur = max.load(std::memory_order_relaxed);
  while (value > cur && !max.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
  }
}

std::string describe(std::exception_ptr error) {
  try {
    if (error) std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "non-standard exception";
  }
  return "unknown error";
}

}  // namespace

struct MonitorRuntime::Impl {
  RuntimeConfig config;
  std::uint64_t uid = 0;
  std::vector<std::unique_ptr<MonitorSlot>> monitors;
  std::map<std::string, std::uint32_t, std::less<>> monitor_index;
  std::vector<std::unique_ptr<Executor>> executors;
  std::shared_ptr<HistoryRecorder> recorder;
  std::atomic<std::uint64_t> next_task_id{1};

  mutable std::mutex log_mutex;
  std::vector<ExceptionRecord> log;

  std::mutex shutdown_mutex;
  bool shut_down = false;

  void build(std::vector<MonitorSpec> specs);
  void spawn();
  void executor_main(Executor& ex, std::latch& ready);
  bool run_one(MonitorSlot& m);
  void execute(MonitorSlot& m, std::size_t lane);
  void stage_succeeded(MonitorSlot& m, std::size_t lane, Value value);
  void stage_failed(MonitorSlot& m, std::size_t lane, std::exception_ptr error);
  void finish(MonitorSlot& m, detail::Call& call, TaskStatus status);
  void fail_for_shutdown(detail::Call& call);
  void record(EventKind kind, const detail::Call& call, std::uint64_t thread_id,
              Outcome outcome = Outcome::None, const Value* result = nullptr);
  void acquire_slot(MonitorSlot& m);
  void release_slot(MonitorSlot& m);
  void stop_executors(StopMode mode);
  CompletionHandle submit(MethodRef ref, Args args);
};

void MonitorRuntime::Impl::build(std::vector<MonitorSpec> specs) {
  if (config.max_monitor_threads == 0)
    throw Error(Errc::ConfigError, "max_monitor_threads must be at least 1");
  for (auto& spec : specs) {
    if (!is_identifier(spec.name))
      throw Error(Errc::ConfigError, "monitor name '" + spec.name + "' is not an identifier");
    if (!spec.state_init)
      throw Error(Errc::ConfigError, "monitor '" + spec.name + "' has no state factory");
    auto id = static_cast<std::uint32_t>(monitors.size());
    if (!monitor_index.emplace(spec.name, id).second)
      throw Error(Errc::ConfigError, "duplicate monitor name '" + spec.name + "'");
    auto slot = std::make_unique<MonitorSlot>();
    slot->id = id;
    slot->name = spec.name;
    slot->state_init = std::move(spec.state_init);
    for (auto& [name, method] : spec.methods) {
      if (!is_identifier(name))
        throw Error(Errc::ConfigError, "method name '" + name + "' is not an identifier");
      ValidationReport report = validate_method(method);
      bool self_blocking = std::any_of(method.calls.begin(), method.calls.end(), [&](const CallDecl& c) {
        return c.monitor == spec.name && c.kind == MethodKind::Blocking;
      });
      if (!report.valid || self_blocking) {
        bool empty = std::find(report.errors.begin(), report.errors.end(),
                               ValidationError::EmptyMethod) != report.errors.end();
        throw Error(empty ? Errc::EmptyMethod : Errc::RecursiveBlocking,
                    "method '" + spec.name + "." + name + "' cannot be turned into tasks");
      }
      auto info = std::make_unique<MethodInfo>();
      info->scratch_names = method.scratch_names();
      info->spec = std::move(method);
      slot->by_name.emplace(name, slot->methods.size());
      slot->methods.push_back(std::move(info));
    }
    monitors.push_back(std::move(slot));
  }
  std::size_t n = std::min(config.max_monitor_threads, monitors.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto ex = std::make_unique<Executor>();
    ex->index = i;
    executors.push_back(std::move(ex));
  }
  for (auto& m : monitors) {
    m->executor = m->id % n;
    executors[m->executor]->monitors.push_back(m.get());
  }
}

void MonitorRuntime::Impl::spawn() {
  std::latch ready(static_cast<std::ptrdiff_t>(executors.size()));
  std::size_t started = 0;
  try {
    for (auto& ex : executors) {
      ex->thread = std::thread([this, e = ex.get(), &ready] { executor_main(*e, ready); });
      ++started;
    }
  } catch (const std::system_error& e) {
    for (std::size_t i = started; i < executors.size(); ++i) ready.count_down();
    for (std::size_t i = 0; i < started; ++i) {
      auto& ex = *executors[i];
      {
        std::lock_guard lock(ex.mutex);
        ex.stop = StopMode::Abort;
        ex.abort = true;
      }
      ex.cv.notify_all();
    }
    for (std::size_t i = 0; i < started; ++i) executors[i]->thread.join();
    throw Error(Errc::SpawnFailure, std::string("cannot create executor thread: ") + e.what());
  }
  ready.wait();
  for (auto& ex : executors) {
    if (ex->init_error) {
      std::string what = describe(ex->init_error);
      stop_executors(StopMode::Abort);
      throw Error(Errc::ConfigError, "monitor state construction failed: " + what);
    }
  }
}

void MonitorRuntime::Impl::executor_main(Executor& ex, std::latch& ready) {
  t_executor = &ex;
  (void)current_thread_id();
  try {
    for (MonitorSlot* m : ex.monitors) m->state = m->state_init();
  } catch (...) {
    ex.init_error = std::current_exception();
  }
  ready.count_down();
  if (ex.init_error) {
    std::unique_lock lock(ex.mutex);
    ex.cv.wait(lock, [&] { return ex.stop != StopMode::Run; });
    return;
  }

  std::vector<CallPtr> incoming;
  std::size_t rr = 0;
  const std::size_t count = ex.monitors.size();
  for (;;) {
    if (ex.has_inbox.load(std::memory_order_acquire)) {
      {
        std::lock_guard lock(ex.mutex);
        incoming.swap(ex.inbox);
        ex.has_inbox.store(false, std::memory_order_relaxed);
      }
      for (auto& call : incoming) {
        MonitorSlot& m = *monitors[call->monitor];
        SubmitterId submitter = call->submitter;
        m.lanes.push_back(submitter, std::move(call), m.next_stamp++);
      }
      incoming.clear();
    }
    if (ex.abort.load(std::memory_order_acquire)) break;

    bool ran = false;
    for (std::size_t k = 0; k < count; ++k) ran |= run_one(*ex.monitors[(rr + k) % count]);
    ++rr;
    ex.sweeps.fetch_add(1, std::memory_order_relaxed);
    if (ran) continue;

    bool arrived = false;
    for (std::size_t i = 0; i < config.idle_spins && !arrived; ++i) {
      std::this_thread::yield();
      arrived = ex.has_inbox.load(std::memory_order_acquire);
    }
    if (arrived) continue;

    std::unique_lock lock(ex.mutex);
    if (!ex.inbox.empty()) continue;
    if (ex.stop != StopMode::Run) break;
    ex.parked = true;
    ex.parks.fetch_add(1, std::memory_order_relaxed);
    ex.cv.wait(lock, [&] { return !ex.inbox.empty() || ex.stop != StopMode::Run; });
    ex.parked = false;
  }
}

bool MonitorRuntime::Impl::run_one(MonitorSlot& m) {
  if (m.lanes.empty()) return false;
  auto lane = m.lanes.schedule_next([&](const CallPtr& call) {
    const Stage& stage = call->method->stages[call->stage];
    if (stage.precondition.tautology()) return true;
    Frame frame{call->args, call->scratch, call->submitter};
    return stage.precondition(m.state, frame);
  });
  if (!lane) return false;
  execute(m, *lane);
  return true;
}

void MonitorRuntime::Impl::execute(MonitorSlot& m, std::size_t lane) {
  detail::Call& call = *m.lanes.head(lane);
  const Stage& stage = call.method->stages[call.stage];
  if (call.stage == 0 && call.attempts.load(std::memory_order_relaxed) == 0)
    call.status.store(TaskStatus::Running, std::memory_order_release);
  call.attempts.fetch_add(1, std::memory_order_relaxed);
  if (recorder) record(EventKind::ExecStart, call, t_thread_id);

  Value value;
  std::exception_ptr error;
  if (stage.body) {
    try {
      Frame frame{call.args, call.scratch, call.submitter};
      value = stage.body(m.state, frame);
    } catch (...) {
      error = std::current_exception();
    }
  }
  m.tasks_executed.fetch_add(1, std::memory_order_relaxed);
  if (error)
    stage_failed(m, lane, std::move(error));
  else
    stage_succeeded(m, lane, std::move(value));
}

void MonitorRuntime::Impl::stage_succeeded(MonitorSlot& m, std::size_t lane, Value value) {
  CallPtr holder = m.lanes.pop_front(lane);
  detail::Call& call = *holder;
  if (recorder) record(EventKind::ExecEnd, call, t_thread_id, Outcome::Completed, &value);
  if (value.has_value()) call.result = std::move(value);
  if (call.stage + 1 < call.stage_count) {
    ++call.stage;
    call.attempts.store(0, std::memory_order_relaxed);
    if (recorder) record(EventKind::Submit, call, call.submitter);
    SubmitterId submitter = call.submitter;
    m.lanes.push_front(submitter, std::move(holder), m.next_stamp++);
    return;
  }
  finish(m, call, TaskStatus::Completed);
}

void MonitorRuntime::Impl::stage_failed(MonitorSlot& m, std::size_t lane, std::exception_ptr error) {
  detail::Call& call = *m.lanes.head(lane);
  {
    std::lock_guard lock(log_mutex);
    log.push_back(ExceptionRecord{call.task_base + call.stage, call.monitor, call.method->name,
                                  call.stage, call.attempts.load(), describe(error)});
  }

  enum class Next { Retry, Fail, Substitute } next = Next::Fail;
  Value substitute;
  const ExceptionPolicy& policy = config.exception_policy;
  switch (policy.kind()) {
    case ExceptionPolicy::Kind::Ignore:
      next = Next::Fail;
      break;
    case ExceptionPolicy::Kind::Retry:
      next = call.attempts.load() < policy.max_attempts() ? Next::Retry : Next::Fail;
      break;
    case ExceptionPolicy::Kind::Hook: {
      TaskFailure failure{call.task_base + call.stage, call.monitor, call.method->name, call.stage,
                          call.attempts.load(), error};
      try {
        HookDecision decision = policy.hook_fn()(failure);
        switch (decision.action) {
          case HookDecision::Action::Retry: next = Next::Retry; break;
          case HookDecision::Action::Fail: next = Next::Fail; break;
          case HookDecision::Action::Substitute:
            next = Next::Substitute;
            substitute = std::move(decision.value);
            break;
        }
      } catch (...) {
        next = Next::Fail;
      }
      break;
    }
  }

  if (next == Next::Substitute) {
    stage_succeeded(m, lane, std::move(substitute));
    return;
  }
  if (next == Next::Retry) {
    // Stays at the head of its lane; the next sweep re-checks its precondition.
    if (recorder) record(EventKind::ExecEnd, call, t_thread_id, Outcome::Retry);
    return;
  }
  CallPtr holder = m.lanes.pop_front(lane);
  if (recorder) record(EventKind::ExecEnd, call, t_thread_id, Outcome::Failed);
  call.error_message = "task " + std::to_string(call.task_base + call.stage) + " (" + m.name + "." +
                       call.method->name + " stage " + std::to_string(call.stage) +
                       ") failed after " + std::to_string(call.attempts.load()) +
                       " attempt(s): " + describe(error);
  call.error = std::move(error);
  finish(m, call, TaskStatus::Failed);
}

void MonitorRuntime::Impl::finish(MonitorSlot& m, detail::Call& call, TaskStatus status) {
  if (call.counts_pending) release_slot(m);
  detail::publish(call, status);
}

void MonitorRuntime::Impl::fail_for_shutdown(detail::Call& call) {
  if (detail::is_final(call.status.load(std::memory_order_acquire))) return;
  call.shutdown = true;
  call.error_message = "task " + std::to_string(call.task_base + call.stage) +
                       " abandoned: runtime shut down";
  call.error = std::make_exception_ptr(Error(Errc::RuntimeShutDown, call.error_message));
  detail::publish(call, TaskStatus::Failed);
}

void MonitorRuntime::Impl::record(EventKind kind, const detail::Call& call, std::uint64_t thread_id,
                                  Outcome outcome, const Value* result) {
  HistoryEvent ev;
  ev.ts = event_clock();
  ev.kind = kind;
  ev.task_id = call.task_base + call.stage;
  ev.monitor_id = call.monitor;
  ev.thread_id = thread_id;
  ev.method = call.method->name;
  ev.stage = call.stage;
  ev.seq = call.seq_base + call.stage;
  ev.blocking = call.blocking;
  ev.stage_count = call.stage_count;
  ev.outcome = outcome;
  if (kind == EventKind::Submit) ev.args = to_record(call.args);
  if (result) ev.result = to_record(*result);
  recorder->record(std::move(ev));
}

void MonitorRuntime::Impl::acquire_slot(MonitorSlot& m) {
  if (!config.pending_limit) {
    std::size_t now = m.pending_unbounded.fetch_add(1, std::memory_order_relaxed) + 1;
    note_max(m.max_pending, now);
    return;
  }
  const std::size_t limit = *config.pending_limit;
  auto take = [&] {
    if (m.closed) throw Error(Errc::RuntimeShutDown, "runtime is shut down");
    if (m.pending >= limit) return false;
    ++m.pending;
    note_max(m.max_pending, m.pending);
    return true;
  };
  // Same spin-then-park shape as waiting for a handle.
  for (std::size_t i = 0; i < config.idle_spins; ++i) {
    {
      std::lock_guard lock(m.pending_mutex);
      if (take()) return;
    }
    std::this_thread::yield();
  }
  std::unique_lock lock(m.pending_mutex);
  ++m.slot_waiters;
  m.pending_cv.wait(lock, [&] { return m.closed || m.pending < limit; });
  --m.slot_waiters;
  take();
}

void MonitorRuntime::Impl::release_slot(MonitorSlot& m) {
  if (!config.pending_limit) {
    m.pending_unbounded.fetch_sub(1, std::memory_order_relaxed);
    return;
  }
  bool waiters;
  {
    std::lock_guard lock(m.pending_mutex);
    --m.pending;
    waiters = m.slot_waiters > 0;
  }
  if (waiters) m.pending_cv.notify_one();
}

void MonitorRuntime::Impl::stop_executors(StopMode mode) {
  for (auto& ex : executors) {
    {
      std::lock_guard lock(ex->mutex);
      ex->accepting = false;
      ex->stop = mode;
      if (mode == StopMode::Abort) ex->abort.store(true, std::memory_order_release);
    }
    ex->cv.notify_all();
  }
  for (auto& ex : executors)
    if (ex->thread.joinable()) ex->thread.join();
  for (auto& m : monitors) {
    {
      std::lock_guard lock(m->pending_mutex);
      m->closed = true;
    }
    m->pending_cv.notify_all();
  }
}

CompletionHandle MonitorRuntime::Impl::submit(MethodRef ref, Args args) {
  if (ref.monitor >= monitors.size() || ref.method == nullptr)
    throw Error(Errc::MonitorUnknown, "unknown monitor id " + std::to_string(ref.monitor));
  MonitorSlot& m = *monitors[ref.monitor];
  auto it = m.by_name.find(ref.method->name);
  if (it == m.by_name.end() || &m.methods[it->second]->spec != ref.method)
    throw Error(Errc::MonitorUnknown, "method does not belong to monitor '" + m.name + "'");
  const MethodInfo& info = *m.methods[it->second];
  Executor& ex = *executors[m.executor];

  const bool blocking = info.spec.kind == MethodKind::Blocking;
  const bool forced = !blocking && config.pending_limit && *config.pending_limit == 0;
  if (t_executor == &ex && (blocking || forced))
    throw Error(Errc::RecursiveBlocking,
                "blocking call to '" + m.name + "." + info.spec.name + "' from its own executor");

  SubmitterState& sub = submitter_state(uid);
  if (config.ordering_mode == OrderingMode::Strict && sub.last_nonblocking &&
      sub.last_monitor != m.id) {
    detail::wait_done(*sub.last_nonblocking, config.idle_spins);
  }
  sub.last_nonblocking.reset();

  const bool counts = !blocking && !forced;
  if (counts) acquire_slot(m);

  auto call = std::make_shared<detail::Call>();
  call->method = &info.spec;
  call->monitor = m.id;
  call->stage_count = static_cast<std::uint32_t>(info.spec.stages.size());
  call->args = std::move(args);
  call->scratch = Scratch(&info.scratch_names);
  call->submitter = current_thread_id();
  call->seq_base = sub.seq;
  sub.seq += call->stage_count;
  call->task_base = next_task_id.fetch_add(call->stage_count, std::memory_order_relaxed);
  call->blocking = blocking;
  call->counts_pending = counts;
  call->recorder = recorder;
  if (recorder) record(EventKind::Submit, *call, call->submitter);

  bool wake = false;
  {
    std::lock_guard lock(ex.mutex);
    if (!ex.accepting) {
      if (counts) release_slot(m);
      throw Error(Errc::RuntimeShutDown, "runtime is shut down");
    }
    ex.inbox.push_back(call);
    ex.has_inbox.store(true, std::memory_order_release);
    wake = ex.parked;
  }
  if (wake) ex.cv.notify_one();

  if (blocking || forced) {
    detail::wait_done(*call, config.idle_spins);
    if (blocking && call->status.load(std::memory_order_acquire) == TaskStatus::Failed)
      throw TaskFailedError(call->error_message, call->attempts.load(), call->error, call->shutdown);
  } else {
    sub.last_nonblocking = call;
    sub.last_monitor = m.id;
  }
  return CompletionHandle(std::move(call));
}

// ---------------------------------------------------------------------------
// MonitorRuntime

MonitorRuntime::MonitorRuntime(RuntimeConfig config, std::vector<MonitorSpec> specs)
    : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->uid = g_next_runtime_uid.fetch_add(1) + 1;
  if (impl_->config.history_recording) impl_->recorder = std::make_shared<HistoryRecorder>();
  impl_->build(std::move(specs));
  impl_->spawn();
}

MonitorRuntime::~MonitorRuntime() {
  try {
    shutdown(ShutdownMode::Abort);
  } catch (...) {
  }
}

MonitorRef MonitorRuntime::monitor(std::string_view name) const {
  auto it = impl_->monitor_index.find(name);
  if (it == impl_->monitor_index.end())
    throw Error(Errc::MonitorUnknown, "no monitor named '" + std::string(name) + "'");
  return MonitorRef{it->second};
}

MethodRef MonitorRuntime::method(MonitorRef monitor, std::string_view name) const {
  if (monitor.id >= impl_->monitors.size())
    throw Error(Errc::MonitorUnknown, "unknown monitor id " + std::to_string(monitor.id));
  const MonitorSlot& m = *impl_->monitors[monitor.id];
  auto it = m.by_name.find(name);
  if (it == m.by_name.end())
    throw Error(Errc::MonitorUnknown, "monitor '" + m.name + "' has no method '" + std::string(name) + "'");
  return MethodRef{monitor.id, &m.methods[it->second]->spec};
}

MethodRef MonitorRuntime::method(std::string_view monitor_name, std::string_view name) const {
  return method(monitor(monitor_name), name);
}

CompletionHandle MonitorRuntime::submit(MethodRef method, Args args) {
  return impl_->submit(method, std::move(args));
}

Value MonitorRuntime::call(MethodRef method, Args args) {
  return submit(method, std::move(args)).await();
}

ShutdownReport MonitorRuntime::shutdown(ShutdownMode mode) {
  std::lock_guard guard(impl_->shutdown_mutex);
  if (impl_->shut_down) return {};
  impl_->shut_down = true;
  impl_->stop_executors(mode == ShutdownMode::Drain ? StopMode::Drain : StopMode::Abort);

  ShutdownReport report;
  for (auto& ex : impl_->executors) {
    for (auto& call : ex->inbox) {
      report.stranded.push_back(call->task_base + call->stage);
      impl_->fail_for_shutdown(*call);
    }
    ex->inbox.clear();
  }
  for (auto& m : impl_->monitors) {
    m->lanes.for_each([&](SubmitterId, const CallPtr& call) {
      report.stranded.push_back(call->task_base + call->stage);
      impl_->fail_for_shutdown(*call);
    });
    m->lanes.clear();
  }
  std::sort(report.stranded.begin(), report.stranded.end());
  if (mode == ShutdownMode::Drain && !report.stranded.empty()) throw StrandedError(report.stranded);
  if (mode == ShutdownMode::Abort) report.stranded.clear();
  return report;
}

History MonitorRuntime::history() const {
  if (!impl_->recorder) return {};
  return impl_->recorder->merged();
}

std::size_t MonitorRuntime::executor_count() const { return impl_->executors.size(); }

std::size_t MonitorRuntime::executor_of(MonitorRef monitor) const {
  if (monitor.id >= impl_->monitors.size())
    throw Error(Errc::MonitorUnknown, "unknown monitor id " + std::to_string(monitor.id));
  return impl_->monitors[monitor.id]->executor;
}

std::size_t MonitorRuntime::monitor_count() const { return impl_->monitors.size(); }

const RuntimeConfig& MonitorRuntime::config() const { return impl_->config; }

std::vector<ExceptionRecord> MonitorRuntime::exception_log() const {
  std::lock_guard lock(impl_->log_mutex);
  return impl_->log;
}

RuntimeStats MonitorRuntime::stats() const {
  RuntimeStats stats;
  for (auto& ex : impl_->executors) {
    stats.sweeps += ex->sweeps.load(std::memory_order_relaxed);
    stats.parks += ex->parks.load(std::memory_order_relaxed);
  }
  for (auto& m : impl_->monitors) {
    stats.monitors.push_back(MonitorStats{m->name, m->executor,
                                          m->tasks_executed.load(std::memory_order_relaxed),
                                          m->max_pending.load(std::memory_order_relaxed)});
  }
  return stats;
}

SubmitterId MonitorRuntime::current_thread_id() {
  if (t_thread_id == 0) t_thread_id = g_next_thread_id.fetch_add(1, std::memory_order_relaxed) + 1;
  return t_thread_id;
}

std::unique_ptr<MonitorRuntime> start_runtime(RuntimeConfig config, std::vector<MonitorSpec> specs) {
  return std::make_unique<MonitorRuntime>(std::move(config), std::move(specs));
}

}  // namespace am
