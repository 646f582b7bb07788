#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "activemonitor/checker.hpp"
#include "activemonitor/config.hpp"
#include "activemonitor/history.hpp"
#include "activemonitor/method.hpp"

namespace am::workloads {

enum class WorkloadId { BoundedBuffer, SortedList, RoundRobin, ParametrizedBuffer, TicketedRW, Mix };
enum class Impl { ActiveMonitor, CoarseLock, FineGrained };

/// bb, sll, rr, pbb, trw, mix
std::string_view to_string(WorkloadId id) noexcept;
WorkloadId parse_workload(std::string_view text);
/// am, lock, fg
std::string_view to_string(Impl impl) noexcept;
Impl parse_impl(std::string_view text);

// ---------------------------------------------------------------------------
// Monitor states

class BufferState {
 public:
  explicit BufferState(std::size_t size);

  bool can_put(std::size_t k = 1) const noexcept { return item_count_ + k <= size_; }
  bool can_take(std::size_t k = 1) const noexcept { return item_count_ >= k; }
  void put(std::int64_t item);
  std::int64_t take();

  std::size_t item_count() const noexcept { return item_count_; }
  std::size_t size() const noexcept { return size_; }

 private:
  std::vector<std::int64_t> items_;
  std::size_t put_ptr_ = 0;
  std::size_t take_ptr_ = 0;
  std::size_t item_count_ = 0;
  std::size_t size_;
};

/// Singly linked list kept in non-decreasing order. Duplicates are kept.
/// Nodes live in one pool and link by index, so traversal locality does not
/// depend on which thread allocated them.
class SortedList {
 public:
  SortedList() = default;
  explicit SortedList(std::vector<std::int64_t> values);

  void insert(std::int64_t v);
  /// Removes one instance; false (and no change) when v is absent.
  bool remove(std::int64_t v);
  bool contains(std::int64_t v) const;
  std::vector<std::int64_t> values() const;
  std::size_t size() const noexcept { return size_; }
  bool sorted() const;

 private:
  static constexpr std::uint32_t kNil = 0xffffffffu;
  struct Node {
    std::int64_t value;
    std::uint32_t next;
  };
  std::uint32_t allocate(std::int64_t v, std::uint32_t next);

  std::vector<Node> nodes_{Node{0, kNil}};  // nodes_[0] is the head sentinel
  std::vector<std::uint32_t> free_;
  std::size_t size_ = 0;
};

struct RRState {
  std::int64_t turn = 0;
  std::int64_t n = 2;
  std::int64_t entries = 0;
};

struct TicketState {
  std::int64_t ticket = 0;
  std::int64_t serving = 0;
  std::int64_t rcnt = 0;
  bool writer = false;
};

struct CounterState {
  std::int64_t count = 0;
};

// ---------------------------------------------------------------------------
// Monitor definitions. With all_blocking every method is declared Blocking.

MonitorSpec build_bounded_buffer(std::size_t size, bool all_blocking = false,
                                 std::string name = "bb");
/// The list starts with `initial` (sorted on construction). Besides insert
/// and remove it has a blocking `snapshot` returning the whole list.
MonitorSpec build_sorted_list(std::vector<std::int64_t> initial = {}, bool all_blocking = false,
                              std::string name = "sll");
MonitorSpec build_round_robin(std::size_t n, bool all_blocking = false, std::string name = "rr");
MonitorSpec build_parametrized_buffer(std::size_t size, bool all_blocking = false,
                                      std::string name = "pbb");
MonitorSpec build_ticketed_rw(bool all_blocking = false, std::string name = "trw");
/// Counter with inc(v), dec(v) guarded by count >= v, blocking read(), and a
/// two-stage bump() whose first stage returns the count it saw.
MonitorSpec build_counter(bool all_blocking = false, std::string name = "counter");

// ---------------------------------------------------------------------------
// Sequential specifications (one model per monitor)

check::SequentialSpec buffer_spec(std::size_t size);
check::SequentialSpec parametrized_buffer_spec(std::size_t size);
check::SequentialSpec sorted_list_spec(std::vector<std::int64_t> initial);
check::SequentialSpec round_robin_spec(std::size_t n);
check::SequentialSpec ticket_spec();
check::SequentialSpec counter_spec();

// ---------------------------------------------------------------------------
// Lock-based baselines. A trace hook, when set, is called for every critical
// section while its locks are still held, with the method name, stage,
// arguments and result the equivalent monitor task would record.

using TraceHook = std::function<void(std::string_view method, std::uint32_t stage,
                                     std::vector<std::int64_t> args,
                                     std::vector<std::int64_t> result)>;

class LockBuffer {
 public:
  explicit LockBuffer(std::size_t size);
  ~LockBuffer();
  void put(std::int64_t item);
  std::int64_t take();

  void set_hook(TraceHook hook);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class LockBatchBuffer {
 public:
  explicit LockBatchBuffer(std::size_t size);
  ~LockBatchBuffer();
  void put_batch(const std::vector<std::int64_t>& items);
  std::vector<std::int64_t> take_batch(std::size_t k);

  void set_hook(TraceHook hook);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class LockSortedList {
 public:
  explicit LockSortedList(std::vector<std::int64_t> initial = {});
  ~LockSortedList();
  void insert(std::int64_t v);
  bool remove(std::int64_t v);
  std::vector<std::int64_t> values() const;

  void set_hook(TraceHook hook);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Hand-over-hand locking: a traversal holds at most two node locks.
class FineGrainedSortedList {
 public:
  explicit FineGrainedSortedList(std::vector<std::int64_t> initial = {});
  ~FineGrainedSortedList();
  FineGrainedSortedList(const FineGrainedSortedList&) = delete;
  FineGrainedSortedList& operator=(const FineGrainedSortedList&) = delete;

  void insert(std::int64_t v);
  bool remove(std::int64_t v);
  std::vector<std::int64_t> values() const;
  /// Called concurrently for updates in disjoint parts of the list.
  void set_hook(TraceHook hook) { hook_ = std::move(hook); }

 private:
  struct Node;
  Node* head_;
  TraceHook hook_;
};

class LockRoundRobin {
 public:
  explicit LockRoundRobin(std::size_t n);
  ~LockRoundRobin();
  /// Returns the global entry index.
  std::int64_t enter(std::int64_t id);

  void set_hook(TraceHook hook);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class LockTicketRW {
 public:
  LockTicketRW();
  ~LockTicketRW();
  /// Each returns the ticket taken.
  std::int64_t start_read();
  void end_read();
  std::int64_t start_write();
  void end_write();

  void set_hook(TraceHook hook);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Seeded operation streams

enum class OpKind { Put, Take, PutBatch, TakeBatch, Insert, Remove, Enter, Read, Write, Inc, Dec, Get, Bump };

struct Op {
  OpKind kind = OpKind::Put;
  std::int64_t value = 0;
  std::vector<std::int64_t> batch;
  std::uint32_t monitor = 0;  // Mix only
  bool await = false;         // await this call's handle right after submitting
};

struct WorkloadConfig {
  WorkloadId workload = WorkloadId::BoundedBuffer;
  Impl impl = Impl::ActiveMonitor;
  /// Worker threads. BB and PBB split them evenly into producers and
  /// consumers; TRW uses reader_multiplier readers per writer.
  std::size_t threads = 4;
  std::size_t ops_per_thread = 20000;
  std::size_t warmup_ops = 1000;
  std::size_t buffer_size = 4;
  std::size_t outside_cs_work = 0;
  std::uint64_t seed = 0;
  std::size_t reader_multiplier = 5;
  std::size_t list_initial = 5000;
  std::size_t list_value_range = 10000;
  /// Probability that a non-blocking call is awaited right away.
  double await_probability = 0.0;
  bool all_blocking = false;
  /// Record the order of critical sections for lock baselines.
  bool record_trace = false;
  RuntimeConfig runtime;
};

/// Throws am::Error(ConfigError) for impossible configurations.
void validate(const WorkloadConfig& config);

/// Role of thread t: producer/consumer, reader/writer; empty for symmetric workloads.
std::string role_of(const WorkloadConfig& config, std::size_t thread);
std::size_t writer_count(const WorkloadConfig& config);

/// Warm-up followed by timed ops for one thread. Identical for every
/// implementation given the same config fields other than impl.
std::vector<Op> make_stream(const WorkloadConfig& config, std::size_t thread);
std::vector<std::int64_t> initial_list(const WorkloadConfig& config);
/// PBB batch size bound: max(1, min(8, size / 2)).
std::size_t max_batch(std::size_t buffer_size);

/// Integer additions folded into an optimisation barrier.
std::uint64_t outside_work(std::size_t additions, std::uint64_t seed) noexcept;

// ---------------------------------------------------------------------------
// Driver

/// One completed critical section in execution order.
struct TraceOp {
  std::size_t thread = 0;
  std::uint32_t monitor = 0;
  std::string method;
  std::uint32_t stage = 0;
  std::vector<std::int64_t> args;
  std::vector<std::int64_t> result;
};

struct WorkloadResult {
  std::uint64_t wall_ns = 0;
  std::optional<std::uint64_t> cpu_ns;
  std::optional<std::uint64_t> peak_rss_bytes;
  std::size_t timed_ops = 0;
  History history;                  // ActiveMonitor with history_recording
  std::vector<TraceOp> trace;       // recorded runs, any implementation
  std::vector<std::int64_t> final_list;  // SLL
  std::vector<SubmitterId> submitters;   // runtime thread id of each worker
  std::uint64_t sink = 0;
};

WorkloadResult run_workload(const WorkloadConfig& config);

/// Completed tasks of a history in completing-ExecEnd order.
std::vector<TraceOp> trace_from_history(const History& history);

/// Workload oracles over a recorded run: replay legality plus conservation
/// and FIFO (BB, PBB), sortedness (SLL), cyclic order (RR), ticket order and
/// writer exclusion (TRW).
std::vector<check::Verdict> check_workload(const WorkloadConfig& config, const WorkloadResult& result);

}  // namespace am::workloads
