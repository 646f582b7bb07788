#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "activemonitor/config.hpp"
#include "activemonitor/error.hpp"
#include "activemonitor/history.hpp"
#include "activemonitor/method.hpp"
#include "activemonitor/value.hpp"

namespace am {

enum class TaskStatus { Pending, Running, Completed, Failed };
enum class ShutdownMode { Drain, Abort };

std::string_view to_string(TaskStatus status) noexcept;

struct MonitorRef {
  std::uint32_t id = 0;
};

/// A method resolved once against a running runtime; cheap to copy.
struct MethodRef {
  std::uint32_t monitor = 0;
  const MethodSpec* method = nullptr;
};

namespace detail {
struct Call;
}

/// Caller-side view of a submitted call. Shareable across threads.
class CompletionHandle {
 public:
  CompletionHandle() = default;

  bool valid() const noexcept { return call_ != nullptr; }
  TaskStatus status() const;
  bool ready() const;

  /// Suspends until the call completes. Returns the value of the last stage
  /// that produced one. Throws am::Error(Timeout) when the timeout elapses and
  /// TaskFailedError when the call failed.
  Value await(std::optional<std::chrono::nanoseconds> timeout = std::nullopt) const;

  /// Waits without surfacing the outcome; true if the call finished in time.
  bool wait_for(std::chrono::nanoseconds timeout) const;

  /// Executions of the most recently run stage, the successful one included.
  std::uint32_t attempts() const;
  /// Task id of the first stage; stage i has id task_id() + i.
  std::uint64_t task_id() const;
  std::uint64_t seq() const;
  SubmitterId submitter() const;

 private:
  friend class MonitorRuntime;
  explicit CompletionHandle(std::shared_ptr<detail::Call> call) : call_(std::move(call)) {}

  std::shared_ptr<detail::Call> call_;
};

struct ShutdownReport {
  std::vector<std::uint64_t> stranded;
};

struct ExceptionRecord {
  std::uint64_t task_id;
  std::uint32_t monitor_id;
  std::string method;
  std::uint32_t stage;
  std::uint32_t attempt;
  std::string message;
};

struct MonitorStats {
  std::string name;
  std::size_t executor = 0;
  std::uint64_t tasks_executed = 0;
  std::size_t max_pending = 0;  // peak of enqueued-incomplete non-blocking calls
};

struct RuntimeStats {
  std::uint64_t sweeps = 0;  // executor scheduling passes, summed over executors
  std::uint64_t parks = 0;
  std::vector<MonitorStats> monitors;
};

/// Executor threads serving monitors. Each monitor is bound to one executor
/// for the lifetime of the runtime; its state is built on, and only touched
/// by, that executor.
class MonitorRuntime {
 public:
  /// Spawns min(max_monitor_threads, specs.size()) executors. Throws
  /// am::Error(ConfigError) for invalid specs and am::Error(SpawnFailure) if a
  /// thread cannot be created.
  MonitorRuntime(RuntimeConfig config, std::vector<MonitorSpec> specs);
  ~MonitorRuntime();

  MonitorRuntime(const MonitorRuntime&) = delete;
  MonitorRuntime& operator=(const MonitorRuntime&) = delete;

  /// Throws am::Error(MonitorUnknown).
  MonitorRef monitor(std::string_view name) const;
  MethodRef method(MonitorRef monitor, std::string_view name) const;
  MethodRef method(std::string_view monitor, std::string_view name) const;

  /// Blocking methods return once the final stage has finished (throwing
  /// TaskFailedError on failure); non-blocking methods return right after
  /// enqueue unless the pending limit or strict ordering makes the caller wait.
  CompletionHandle submit(MethodRef method, Args args = {});

  template <class... Ts>
  CompletionHandle submit_with(MethodRef method, Ts&&... args) {
    return submit(method, Args::of(std::forward<Ts>(args)...));
  }

  /// submit() followed by await().
  Value call(MethodRef method, Args args = {});

  template <class... Ts>
  Value call_with(MethodRef method, Ts&&... args) {
    return call(method, Args::of(std::forward<Ts>(args)...));
  }

  /// Drain runs every task that can still run and throws StrandedError
  /// listing tasks whose precondition never became true. Abort stops after
  /// the bodies in progress; every unfinished handle fails with a shutdown
  /// error. Calling shutdown again is a no-op.
  ShutdownReport shutdown(ShutdownMode mode);

  /// Merged event log. Only meaningful after shutdown, once every thread
  /// that submitted or awaited has stopped.
  History history() const;

  std::size_t executor_count() const;
  std::size_t executor_of(MonitorRef monitor) const;
  std::size_t monitor_count() const;
  const RuntimeConfig& config() const;
  std::vector<ExceptionRecord> exception_log() const;
  RuntimeStats stats() const;

  /// Small integer identity of the calling thread, used as submitter id and
  /// executor id in histories.
  static SubmitterId current_thread_id();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<MonitorRuntime> start_runtime(RuntimeConfig config, std::vector<MonitorSpec> specs);

}  // namespace am
