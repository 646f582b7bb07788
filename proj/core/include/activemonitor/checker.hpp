#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "activemonitor/history.hpp"
#include "activemonitor/value.hpp"

/// Post-mortem verification of recorded executions: the ordering rules the
/// runtime promises, the per-submitter thread order, and linearizability with
/// submission as invocation and completing execution-end as response.
namespace am::check {

struct Verdict {
  std::string name;
  bool pass = true;
  std::string message;
  /// Offsets into the history of the events that certify a violation.
  std::vector<std::size_t> offsets;
};

/// One task (a single stage of a call) reconstructed from its events.
struct TaskRecord {
  std::uint64_t task_id = 0;
  std::uint32_t monitor = 0;
  SubmitterId submitter = 0;
  std::string method;
  std::uint32_t stage = 0;
  std::uint32_t stage_count = 1;
  std::uint64_t seq = 0;
  bool blocking = false;
  std::vector<std::int64_t> args;
  std::vector<std::int64_t> result;

  std::size_t submit = 0;               // offset of the Submit event
  std::vector<std::size_t> starts;      // one ExecStart per attempt
  std::vector<std::size_t> ends;        // one ExecEnd per attempt
  Outcome outcome = Outcome::None;      // outcome of the final ExecEnd, None if it never ran

  std::uint64_t call_seq() const { return seq - stage; }
  bool finished() const { return outcome == Outcome::Completed || outcome == Outcome::Failed; }
  /// Offset of the ExecStart of the attempt that finished the task.
  std::size_t final_start() const { return starts.back(); }
  std::size_t final_end() const { return ends.back(); }
};

/// A well-formed history with per-task indexes. Throws
/// am::Error(MalformedHistory) when the events break the task lifecycle:
/// exactly one Submit, attempts bracketed by ExecStart/ExecEnd, exactly one
/// final ExecEnd, and non-decreasing timestamps.
class IndexedHistory {
 public:
  explicit IndexedHistory(const History& history);

  const History& events() const { return *events_; }
  const std::vector<TaskRecord>& tasks() const { return tasks_; }
  const TaskRecord& task(std::uint64_t id) const;
  bool contains(std::uint64_t id) const { return by_id_.count(id) != 0; }
  /// Offsets of AwaitReturn events.
  const std::vector<std::size_t>& awaits() const { return awaits_; }
  std::vector<SubmitterId> submitters() const;
  /// Tasks of one submitter in seq order.
  std::vector<const TaskRecord*> tasks_of(SubmitterId submitter) const;

 private:
  const History* events_;
  std::vector<TaskRecord> tasks_;
  std::unordered_map<std::uint64_t, std::size_t> by_id_;
  std::vector<std::size_t> awaits_;
};

Verdict check_rule1(const History& history);
Verdict check_rule2(const History& history);
/// Meaningful for histories recorded in strict ordering mode.
Verdict check_rule3(const History& history);
Verdict check_lock_equivalence(const History& history);

/// Strict partial order over one submitter's tasks, transitively closed.
class ThreadOrder {
 public:
  ThreadOrder() = default;
  ThreadOrder(SubmitterId submitter, std::vector<std::uint64_t> ops);

  SubmitterId submitter() const { return submitter_; }
  /// Task ids in seq order.
  const std::vector<std::uint64_t>& ops() const { return ops_; }
  bool precedes(std::uint64_t a, std::uint64_t b) const;
  bool precedes_index(std::size_t i, std::size_t j) const { return less_[i][j]; }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs() const;
  bool irreflexive() const;
  bool acyclic() const;

  void add(std::size_t i, std::size_t j) { less_[i][j] = true; }
  void close();
  std::size_t index_of(std::uint64_t task) const;

 private:
  SubmitterId submitter_ = 0;
  std::vector<std::uint64_t> ops_;
  std::vector<std::vector<bool>> less_;
};

/// Orders s_i before s_j when s_i is blocking, when both target the same
/// monitor, or when s_i's result was awaited before s_j was submitted.
ThreadOrder build_thread_order(const History& history, SubmitterId submitter);
ThreadOrder build_thread_order(const IndexedHistory& history, SubmitterId submitter);

/// One operation handed to a sequential specification.
struct OpRecord {
  std::uint64_t task_id = 0;
  std::uint32_t monitor = 0;
  std::string method;
  std::uint32_t stage = 0;
  SubmitterId submitter = 0;
  std::uint64_t call_seq = 0;
  std::vector<std::int64_t> args;
  std::vector<std::int64_t> result;
};

OpRecord to_op(const TaskRecord& task);

/// Abstract state of one monitor under a sequential specification.
class SpecModel {
 public:
  virtual ~SpecModel() = default;
  virtual std::unique_ptr<SpecModel> clone() const = 0;
  /// Applies op if it is enabled and its recorded result matches the
  /// specification; otherwise leaves the state alone, sets *why and returns
  /// false.
  virtual bool apply(const OpRecord& op, std::string* why) = 0;
};

struct SequentialSpec {
  std::string name;
  std::function<std::unique_ptr<SpecModel>(std::uint32_t monitor)> initial;
};

/// Replays ops in order from the initial state. Returns the index of the first
/// illegal op, or nullopt if the whole sequence is legal.
std::optional<std::size_t> replay(const SequentialSpec& spec, const std::vector<OpRecord>& ops,
                                  std::string* why = nullptr);

struct LinearizabilityOptions {
  bool oracle = false;
  /// Also require a before b whenever a's completing ExecEnd precedes b's
  /// Submit (response before invocation).
  bool realtime = true;
  std::size_t oracle_limit = 10;
};

struct LinearizabilityReport {
  bool pass = false;
  std::vector<std::uint64_t> witness;  // task ids in linearization order
  std::string violation;
  std::optional<bool> oracle_pass;
  std::vector<std::uint64_t> oracle_witness;
  std::uint64_t oracle_nodes = 0;
  /// Tasks whose final attempt failed; excluded from the linearization.
  std::vector<std::uint64_t> failed;

  bool agree() const { return !oracle_pass || *oracle_pass == pass; }
};

/// Fast path: linearize at completing ExecEnd, check legality and that every
/// thread order is respected. With options.oracle, additionally searches all
/// linear extensions of the thread orders (plus real-time order) for a legal
/// one; throws am::Error(OracleTooLarge) above options.oracle_limit ops.
LinearizabilityReport check_linearizable(const History& history, const SequentialSpec& spec,
                                         LinearizabilityOptions options = {});

/// True iff the order (task ids) is legal under spec and respects every
/// submitter's thread order.
bool is_valid_witness(const History& history, const SequentialSpec& spec,
                      const std::vector<std::uint64_t>& order, std::string* why = nullptr);

struct CheckReport {
  std::vector<Verdict> verdicts;
  std::optional<LinearizabilityReport> linearizability;

  bool pass() const;
};

struct CheckOptions {
  bool strict = true;  // include rule 3 and lock equivalence
  const SequentialSpec* spec = nullptr;
  LinearizabilityOptions linearizability;
};

CheckReport check_all(const History& history, const CheckOptions& options);

/// Human-readable multi-line report.
std::string to_text(const CheckReport& report);

}  // namespace am::check
