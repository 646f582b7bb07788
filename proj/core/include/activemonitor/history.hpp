#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace am {

enum class EventKind : std::uint8_t { Submit, ExecStart, ExecEnd, AwaitReturn };

/// Outcome carried by ExecEnd events. Retry marks an attempt that failed and
/// will run again; Completed and Failed mark the final attempt.
enum class Outcome : std::uint8_t { None, Completed, Retry, Failed };

struct HistoryEvent {
  std::uint64_t ts = 0;
  EventKind kind = EventKind::Submit;
  std::uint64_t task_id = 0;
  std::uint32_t monitor_id = 0;
  /// Submitter for Submit/AwaitReturn, executor for ExecStart/ExecEnd.
  std::uint64_t thread_id = 0;
  std::string method;
  std::uint32_t stage = 0;
  std::uint64_t seq = 0;

  bool blocking = false;
  std::uint32_t stage_count = 1;
  Outcome outcome = Outcome::None;
  std::vector<std::int64_t> args;
  std::vector<std::int64_t> result;

  bool operator==(const HistoryEvent&) const = default;
};

using History = std::vector<HistoryEvent>;

std::string_view to_string(EventKind kind) noexcept;
std::string_view to_string(Outcome outcome) noexcept;

/// Event timestamp: nanoseconds on the monotonic clock, bumped so that every
/// value handed out process-wide is strictly larger than the previous one.
/// Causally ordered events therefore always compare in causal order.
std::uint64_t event_clock() noexcept;

/// Orders by (ts, thread_id).
void sort_history(History& history);

/// Collects events into per-thread buffers. record() never takes a lock after
/// the calling thread's first event; merged() must only be called once every
/// producing thread has stopped recording.
class HistoryRecorder {
 public:
  HistoryRecorder();
  HistoryRecorder(const HistoryRecorder&) = delete;
  HistoryRecorder& operator=(const HistoryRecorder&) = delete;

  void record(HistoryEvent event);
  History merged() const;

 private:
  std::vector<HistoryEvent>& local_buffer();

  std::uint64_t uid_;
  mutable std::mutex mutex_;
  std::vector<std::unique_ptr<std::vector<HistoryEvent>>> buffers_;
};

/// Dump format, one event per line:
///   ts_ns kind task_id monitor_id thread_id method stage seq [key=value ...]
/// kind is SUB, EXS, EXE or AWT. Optional trailing tokens: f=b|n (blocking
/// flag), n=<stage count>, o=ok|retry|fail (ExecEnd outcome), a=<args>,
/// r=<result> with comma-separated integers.
void write_history(std::ostream& out, const History& history);
std::string format_event(const HistoryEvent& event);
/// Throws am::Error(MalformedHistory) with the offending line number.
History read_history(std::istream& in);
HistoryEvent parse_event(std::string_view line);

}  // namespace am
