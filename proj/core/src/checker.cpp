#include "activemonitor/checker.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include "activemonitor/error.hpp"

namespace am::check {

namespace {

[[noreturn]] void malformed(std::size_t offset, const std::string& what) {
  throw Error(Errc::MalformedHistory, "event " + std::to_string(offset) + ": " + what);
}

Verdict fail(std::string name, std::string message, std::vector<std::size_t> offsets) {
  return Verdict{std::move(name), false, std::move(message), std::move(offsets)};
}

std::string describe(const TaskRecord& t) {
  std::ostringstream out;
  out << "task " << t.task_id << " (" << t.method << "#" << t.stage << ", submitter "
      << t.submitter << ", seq " << t.seq << ", monitor " << t.monitor << ")";
  return out.str();
}

using Call = std::vector<const TaskRecord*>;

// Calls of one submitter keyed by the seq of their first stage.
std::map<std::uint64_t, Call> calls_of(const IndexedHistory& ix, SubmitterId submitter) {
  std::map<std::uint64_t, Call> calls;
  for (const TaskRecord* t : ix.tasks_of(submitter)) calls[t->call_seq()].push_back(t);
  return calls;
}

}  // namespace

IndexedHistory::IndexedHistory(const History& history) : events_(&history) {
  for (std::size_t i = 0; i < history.size(); ++i) {
    const HistoryEvent& e = history[i];
    if (i > 0 && e.ts < history[i - 1].ts) malformed(i, "timestamp decreases");
    auto it = by_id_.find(e.task_id);
    if (e.kind == EventKind::Submit) {
      if (it != by_id_.end()) malformed(i, "task " + std::to_string(e.task_id) + " submitted twice");
      if (e.stage > e.seq) malformed(i, "stage exceeds seq");
      TaskRecord t;
      t.task_id = e.task_id;
      t.monitor = e.monitor_id;
      t.submitter = e.thread_id;
      t.method = e.method;
      t.stage = e.stage;
      t.stage_count = e.stage_count;
      t.seq = e.seq;
      t.blocking = e.blocking;
      t.args = e.args;
      t.submit = i;
      by_id_.emplace(e.task_id, tasks_.size());
      tasks_.push_back(std::move(t));
      continue;
    }
    if (it == by_id_.end()) malformed(i, "task " + std::to_string(e.task_id) + " was never submitted");
    TaskRecord& t = tasks_[it->second];
    switch (e.kind) {
      case EventKind::ExecStart:
        if (e.monitor_id != t.monitor) malformed(i, "executed on a different monitor than submitted");
        if (t.finished()) malformed(i, "execution after the final attempt");
        if (t.starts.size() != t.ends.size()) malformed(i, "attempts overlap");
        t.starts.push_back(i);
        break;
      case EventKind::ExecEnd:
        if (t.starts.size() != t.ends.size() + 1) malformed(i, "execution end without start");
        if (e.thread_id != history[t.starts.back()].thread_id)
          malformed(i, "execution ends on another thread");
        t.ends.push_back(i);
        if (e.outcome == Outcome::None) malformed(i, "execution end without outcome");
        if (e.outcome != Outcome::Retry) {
          t.outcome = e.outcome;
          t.result = e.result;
        }
        break;
      case EventKind::AwaitReturn:
        if (!t.finished()) malformed(i, "await returned before the task finished");
        awaits_.push_back(i);
        break;
      case EventKind::Submit:
        break;
    }
  }
  for (const TaskRecord& t : tasks_)
    if (t.starts.size() != t.ends.size()) malformed(t.starts.back(), "attempt never ended");
}

const TaskRecord& IndexedHistory::task(std::uint64_t id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error(Errc::MalformedHistory, "unknown task " + std::to_string(id));
  return tasks_[it->second];
}

std::vector<SubmitterId> IndexedHistory::submitters() const {
  std::vector<SubmitterId> out;
  for (const auto& t : tasks_) out.push_back(t.submitter);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<const TaskRecord*> IndexedHistory::tasks_of(SubmitterId submitter) const {
  std::vector<const TaskRecord*> out;
  for (const auto& t : tasks_)
    if (t.submitter == submitter) out.push_back(&t);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->seq < b->seq; });
  return out;
}

Verdict check_rule1(const History& history) {
  IndexedHistory ix(history);
  struct State {
    std::uint64_t executor;
    std::size_t first;
    std::optional<std::size_t> open;
  };
  std::map<std::uint32_t, State> monitors;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const HistoryEvent& e = history[i];
    if (e.kind == EventKind::ExecStart) {
      auto [it, fresh] = monitors.try_emplace(e.monitor_id, State{e.thread_id, i, std::nullopt});
      State& s = it->second;
      if (s.executor != e.thread_id)
        return fail("rule1",
                    "monitor " + std::to_string(e.monitor_id) + " executed on threads " +
                        std::to_string(s.executor) + " and " + std::to_string(e.thread_id),
                    {s.first, i});
      if (s.open)
        return fail("rule1", "executions overlap on monitor " + std::to_string(e.monitor_id),
                    {*s.open, i});
      s.open = i;
    } else if (e.kind == EventKind::ExecEnd) {
      monitors[e.monitor_id].open.reset();
    }
  }
  return Verdict{"rule1", true, {}, {}};
}

Verdict check_rule2(const History& history) {
  IndexedHistory ix(history);
  for (SubmitterId s : ix.submitters()) {
    std::map<std::uint32_t, const TaskRecord*> last_started;
    std::map<std::uint32_t, const TaskRecord*> never_started;
    for (const TaskRecord* t : ix.tasks_of(s)) {
      if (t->starts.empty()) {
        never_started.try_emplace(t->monitor, t);
        continue;
      }
      if (auto it = never_started.find(t->monitor); it != never_started.end())
        return fail("rule2", describe(*it->second) + " never ran but later " + describe(*t) + " did",
                    {it->second->submit, t->final_start()});
      auto& prev = last_started[t->monitor];
      if (prev && prev->final_start() > t->final_start())
        return fail("rule2", describe(*t) + " ran before earlier " + describe(*prev),
                    {t->final_start(), prev->final_start()});
      prev = t;
    }
  }
  return Verdict{"rule2", true, {}, {}};
}

Verdict check_rule3(const History& history) {
  IndexedHistory ix(history);
  for (SubmitterId s : ix.submitters()) {
    auto calls = calls_of(ix, s);
    const Call* prev = nullptr;
    for (const auto& [seq, call] : calls) {
      if (prev && prev->front()->monitor != call.front()->monitor && call.front()->stage == 0) {
        const TaskRecord* last = prev->back();
        const TaskRecord* next = call.front();
        if (!last->finished())
          return fail("rule3", describe(*next) + " submitted while " + describe(*last) + " never finished",
                      {last->submit, next->submit});
        if (last->final_end() > next->submit)
          return fail("rule3", describe(*next) + " submitted before " + describe(*last) + " finished",
                      {next->submit, last->final_end()});
      }
      prev = &call;
    }
  }
  return Verdict{"rule3", true, {}, {}};
}

Verdict check_lock_equivalence(const History& history) {
  IndexedHistory ix(history);
  for (SubmitterId s : ix.submitters()) {
    const TaskRecord* prev = nullptr;
    const TaskRecord* unfinished = nullptr;
    for (const TaskRecord* t : ix.tasks_of(s)) {
      if (!t->finished()) {
        if (!unfinished) unfinished = t;
        continue;
      }
      if (unfinished)
        return fail("lock_equivalence",
                    describe(*t) + " finished but earlier " + describe(*unfinished) + " did not",
                    {unfinished->submit, t->final_end()});
      if (prev && prev->final_end() > t->final_end())
        return fail("lock_equivalence", describe(*t) + " finished before earlier " + describe(*prev),
                    {t->final_end(), prev->final_end()});
      prev = t;
    }
  }
  return Verdict{"lock_equivalence", true, {}, {}};
}

ThreadOrder::ThreadOrder(SubmitterId submitter, std::vector<std::uint64_t> ops)
    : submitter_(submitter), ops_(std::move(ops)),
      less_(ops_.size(), std::vector<bool>(ops_.size(), false)) {}

std::size_t ThreadOrder::index_of(std::uint64_t task) const {
  auto it = std::find(ops_.begin(), ops_.end(), task);
  if (it == ops_.end()) return ops_.size();
  return static_cast<std::size_t>(it - ops_.begin());
}

bool ThreadOrder::precedes(std::uint64_t a, std::uint64_t b) const {
  std::size_t i = index_of(a), j = index_of(b);
  if (i == ops_.size() || j == ops_.size()) return false;
  return less_[i][j];
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> ThreadOrder::pairs() const {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::size_t i = 0; i < ops_.size(); ++i)
    for (std::size_t j = 0; j < ops_.size(); ++j)
      if (less_[i][j]) out.emplace_back(ops_[i], ops_[j]);
  return out;
}

bool ThreadOrder::irreflexive() const {
  for (std::size_t i = 0; i < ops_.size(); ++i)
    if (less_[i][i]) return false;
  return true;
}

bool ThreadOrder::acyclic() const {
  for (std::size_t i = 0; i < ops_.size(); ++i)
    for (std::size_t j = 0; j < ops_.size(); ++j)
      if (less_[i][j] && less_[j][i]) return false;
  return irreflexive();
}

void ThreadOrder::close() {
  const std::size_t n = ops_.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (!less_[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (less_[k][j]) less_[i][j] = true;
    }
}

namespace {

// Generating pairs of a submitter's thread order, as index pairs into `tasks`
// (seq order). Blocking and await constraints are reported as (i, first j):
// i precedes every index >= first j.
struct OrderGenerators {
  std::vector<std::pair<std::size_t, std::size_t>> before_all_from;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

OrderGenerators generators(const IndexedHistory& ix, const std::vector<const TaskRecord*>& tasks) {
  OrderGenerators g;
  const std::size_t n = tasks.size();
  std::map<std::uint32_t, std::size_t> last_on;
  for (std::size_t i = 0; i < n; ++i) {
    if (tasks[i]->blocking && i + 1 < n) g.before_all_from.emplace_back(i, i + 1);
    auto [it, fresh] = last_on.try_emplace(tasks[i]->monitor, i);
    if (!fresh) {
      g.pairs.emplace_back(it->second, i);
      it->second = i;
    }
  }
  if (n == 0) return g;
  const SubmitterId s = tasks.front()->submitter;
  for (std::size_t a : ix.awaits()) {
    const HistoryEvent& e = ix.events()[a];
    if (e.thread_id != s) continue;
    const TaskRecord& awaited = ix.task(e.task_id);
    if (awaited.submitter != s) continue;
    std::size_t f = n;
    for (std::size_t i = 0; i < n; ++i)
      if (tasks[i]->task_id == awaited.task_id) f = i;
    std::size_t k = n;
    for (std::size_t i = 0; i < n; ++i)
      if (tasks[i]->stage == 0 && tasks[i]->submit > a) {
        k = i;
        break;
      }
    if (f < n && k < n && f < k) g.before_all_from.emplace_back(f, k);
  }
  return g;
}

}  // namespace

ThreadOrder build_thread_order(const IndexedHistory& ix, SubmitterId submitter) {
  auto tasks = ix.tasks_of(submitter);
  std::vector<std::uint64_t> ids;
  for (auto* t : tasks) ids.push_back(t->task_id);
  ThreadOrder order(submitter, std::move(ids));
  OrderGenerators g = generators(ix, tasks);
  for (auto [i, j] : g.pairs) order.add(i, j);
  for (auto [i, from] : g.before_all_from)
    for (std::size_t j = from; j < tasks.size(); ++j) order.add(i, j);
  order.close();
  return order;
}

ThreadOrder build_thread_order(const History& history, SubmitterId submitter) {
  IndexedHistory ix(history);
  return build_thread_order(ix, submitter);
}

OpRecord to_op(const TaskRecord& t) {
  return OpRecord{t.task_id, t.monitor, t.method, t.stage, t.submitter, t.call_seq(), t.args, t.result};
}

namespace {

class Models {
 public:
  explicit Models(const SequentialSpec& spec) : spec_(&spec) {}

  SpecModel& at(std::uint32_t monitor) {
    auto& slot = models_[monitor];
    if (!slot) slot = spec_->initial(monitor);
    return *slot;
  }

  std::unique_ptr<SpecModel> snapshot(std::uint32_t monitor) { return at(monitor).clone(); }
  void restore(std::uint32_t monitor, std::unique_ptr<SpecModel> model) {
    models_[monitor] = std::move(model);
  }

 private:
  const SequentialSpec* spec_;
  std::map<std::uint32_t, std::unique_ptr<SpecModel>> models_;
};

// Checks `position` (task id -> index in a total order) against every thread
// order generator. Tasks missing from `position` are ignored.
bool respects_thread_orders(const IndexedHistory& ix,
                            const std::map<std::uint64_t, std::size_t>& position, std::string* why) {
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  for (SubmitterId s : ix.submitters()) {
    auto tasks = ix.tasks_of(s);
    const std::size_t n = tasks.size();
    std::vector<std::size_t> pos(n, none);
    for (std::size_t i = 0; i < n; ++i)
      if (auto it = position.find(tasks[i]->task_id); it != position.end()) pos[i] = it->second;
    // suffix_min[j]: index in seq order of the earliest-placed task among j..n-1
    std::vector<std::size_t> suffix_min(n + 1, n);
    for (std::size_t j = n; j-- > 0;) {
      suffix_min[j] = suffix_min[j + 1];
      if (pos[j] != none && (suffix_min[j] == n || pos[j] < pos[suffix_min[j]])) suffix_min[j] = j;
    }
    auto violated = [&](std::size_t i, std::size_t j) {
      if (why)
        *why = "task " + std::to_string(tasks[j]->task_id) + " is ordered before task " +
               std::to_string(tasks[i]->task_id) + " against submitter " + std::to_string(s) +
               "'s thread order";
      return false;
    };
    OrderGenerators g = generators(ix, tasks);
    for (auto [i, j] : g.pairs)
      if (pos[i] != none && pos[j] != none && pos[j] < pos[i]) return violated(i, j);
    for (auto [i, from] : g.before_all_from) {
      std::size_t j = suffix_min[from];
      if (pos[i] != none && j < n && pos[j] < pos[i]) return violated(i, j);
    }
  }
  return true;
}

struct OracleSearch {
  const std::vector<OpRecord>* ops;
  std::vector<std::uint64_t> preds;
  Models* models;
  std::vector<std::size_t> chosen;
  std::uint64_t nodes = 0;

  bool run(std::uint64_t placed) {
    ++nodes;
    const std::size_t n = ops->size();
    if (chosen.size() == n) return true;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if ((placed & bit) || (preds[i] & ~placed)) continue;
      const OpRecord& op = (*ops)[i];
      auto saved = models->snapshot(op.monitor);
      if (models->at(op.monitor).apply(op, nullptr)) {
        chosen.push_back(i);
        if (run(placed | bit)) return true;
        chosen.pop_back();
      }
      models->restore(op.monitor, std::move(saved));
    }
    return false;
  }
};

}  // namespace

std::optional<std::size_t> replay(const SequentialSpec& spec, const std::vector<OpRecord>& ops,
                                  std::string* why) {
  Models models(spec);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    std::string reason;
    if (!models.at(ops[i].monitor).apply(ops[i], &reason)) {
      if (why) *why = reason;
      return i;
    }
  }
  return std::nullopt;
}

LinearizabilityReport check_linearizable(const History& history, const SequentialSpec& spec,
                                         LinearizabilityOptions options) {
  IndexedHistory ix(history);
  LinearizabilityReport report;

  std::vector<const TaskRecord*> finished;
  for (const auto& t : ix.tasks()) {
    if (t.outcome == Outcome::Failed) report.failed.push_back(t.task_id);
    if (t.finished()) finished.push_back(&t);
  }
  std::sort(finished.begin(), finished.end(),
            [](auto* a, auto* b) { return a->final_end() < b->final_end(); });

  std::map<std::uint64_t, std::size_t> position;
  std::vector<OpRecord> ops;
  for (std::size_t i = 0; i < finished.size(); ++i) {
    position[finished[i]->task_id] = i;
    if (finished[i]->outcome == Outcome::Completed) {
      ops.push_back(to_op(*finished[i]));
      report.witness.push_back(finished[i]->task_id);
    }
  }

  std::string why;
  if (auto bad = replay(spec, ops, &why)) {
    report.violation = "task " + std::to_string(ops[*bad].task_id) + " (" + ops[*bad].method +
                       ") is illegal at its completion point: " + why;
  } else if (!respects_thread_orders(ix, position, &why)) {
    report.violation = why;
  } else {
    report.pass = true;
  }
  if (!report.pass) report.witness.clear();

  if (!options.oracle) return report;

  std::vector<const TaskRecord*> completed;
  for (const auto& t : ix.tasks())
    if (t.outcome == Outcome::Completed) completed.push_back(&t);
  const std::size_t limit = std::min<std::size_t>(options.oracle_limit, 63);
  if (completed.size() > limit)
    throw Error(Errc::OracleTooLarge, std::to_string(completed.size()) +
                                          " operations exceed the exhaustive search limit of " +
                                          std::to_string(limit));

  std::map<std::uint64_t, std::size_t> local;
  std::vector<OpRecord> oracle_ops;
  for (std::size_t i = 0; i < completed.size(); ++i) {
    local[completed[i]->task_id] = i;
    oracle_ops.push_back(to_op(*completed[i]));
  }
  std::vector<std::uint64_t> preds(completed.size(), 0);
  for (SubmitterId s : ix.submitters()) {
    ThreadOrder order = build_thread_order(ix, s);
    const auto& ids = order.ops();
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < ids.size(); ++j) {
        if (!order.precedes_index(i, j)) continue;
        auto a = local.find(ids[i]), b = local.find(ids[j]);
        if (a != local.end() && b != local.end()) preds[b->second] |= std::uint64_t{1} << a->second;
      }
  }
  if (options.realtime)
    for (std::size_t a = 0; a < completed.size(); ++a)
      for (std::size_t b = 0; b < completed.size(); ++b)
        if (a != b && completed[a]->final_end() < completed[b]->submit)
          preds[b] |= std::uint64_t{1} << a;

  Models models(spec);
  OracleSearch search{&oracle_ops, std::move(preds), &models, {}, 0};
  const bool found = search.run(0);
  report.oracle_pass = found;
  report.oracle_nodes = search.nodes;
  if (found)
    for (std::size_t i : search.chosen) report.oracle_witness.push_back(oracle_ops[i].task_id);
  return report;
}

bool is_valid_witness(const History& history, const SequentialSpec& spec,
                      const std::vector<std::uint64_t>& order, std::string* why) {
  IndexedHistory ix(history);
  std::vector<OpRecord> ops;
  std::map<std::uint64_t, std::size_t> position;
  for (std::uint64_t id : order) {
    if (!ix.contains(id)) {
      if (why) *why = "unknown task " + std::to_string(id);
      return false;
    }
    if (!position.emplace(id, position.size()).second) {
      if (why) *why = "task " + std::to_string(id) + " appears twice";
      return false;
    }
    ops.push_back(to_op(ix.task(id)));
  }
  for (const auto& t : ix.tasks())
    if (t.outcome == Outcome::Completed && !position.count(t.task_id)) {
      if (why) *why = "completed task " + std::to_string(t.task_id) + " is missing";
      return false;
    }
  if (auto bad = replay(spec, ops, why)) return false;
  for (SubmitterId s : ix.submitters()) {
    ThreadOrder o = build_thread_order(ix, s);
    for (auto [a, b] : o.pairs()) {
      auto pa = position.find(a), pb = position.find(b);
      if (pa != position.end() && pb != position.end() && pb->second < pa->second) {
        if (why) *why = "task " + std::to_string(b) + " placed before task " + std::to_string(a);
        return false;
      }
    }
  }
  return true;
}

bool CheckReport::pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return !linearizability || linearizability->pass;
}

CheckReport check_all(const History& history, const CheckOptions& options) {
  CheckReport report;
  try {
    IndexedHistory ix(history);
  } catch (const Error& e) {
    report.verdicts.push_back(fail("well_formed", e.what(), {}));
    return report;
  }
  report.verdicts.push_back(Verdict{"well_formed", true, {}, {}});
  report.verdicts.push_back(check_rule1(history));
  report.verdicts.push_back(check_rule2(history));
  if (options.strict) {
    report.verdicts.push_back(check_rule3(history));
    report.verdicts.push_back(check_lock_equivalence(history));
  }
  if (options.spec) report.linearizability = check_linearizable(history, *options.spec, options.linearizability);
  return report;
}

std::string to_text(const CheckReport& report) {
  std::ostringstream out;
  for (const auto& v : report.verdicts) {
    out << v.name << ": " << (v.pass ? "PASS" : "FAIL");
    if (!v.pass) {
      out << " " << v.message;
      if (!v.offsets.empty()) {
        out << " [events";
        for (auto o : v.offsets) out << " " << o;
        out << "]";
      }
    }
    out << "\n";
  }
  if (const auto& lin = report.linearizability) {
    out << "linearizable: " << (lin->pass ? "PASS" : "FAIL");
    if (lin->pass)
      out << " witness of " << lin->witness.size() << " ops";
    else
      out << " " << lin->violation;
    if (!lin->failed.empty()) out << " (" << lin->failed.size() << " failed tasks excluded)";
    out << "\n";
    if (lin->oracle_pass)
      out << "oracle: " << (*lin->oracle_pass ? "PASS" : "FAIL") << " after " << lin->oracle_nodes
          << " nodes, " << (lin->agree() ? "agrees" : "DISAGREES") << "\n";
  }
  return out.str();
}

}  // namespace am::check
