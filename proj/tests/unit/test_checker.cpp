#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <thread>

#include "activemonitor/checker.hpp"
#include "activemonitor/error.hpp"
#include "activemonitor/runtime.hpp"

namespace {

using am::EventKind;
using am::Outcome;

// Builds histories event by event with increasing timestamps.
class Log {
 public:
  Log& sub(std::uint64_t task, std::uint32_t monitor, std::uint64_t submitter, std::string method,
           std::uint64_t seq, bool blocking = false, std::vector<std::int64_t> args = {},
           std::uint32_t stage = 0, std::uint32_t stages = 1) {
    am::HistoryEvent e = base(EventKind::Submit, task);
    e.monitor_id = monitor;
    e.thread_id = submitter;
    e.method = std::move(method);
    e.seq = seq;
    e.blocking = blocking;
    e.args = std::move(args);
    e.stage = stage;
    e.stage_count = stages;
    info_[task] = e;
    h_.push_back(e);
    return *this;
  }
  Log& exs(std::uint64_t task, std::uint64_t thread = 100) {
    am::HistoryEvent e = from(task, EventKind::ExecStart);
    e.thread_id = thread;
    h_.push_back(e);
    return *this;
  }
  Log& exe(std::uint64_t task, std::vector<std::int64_t> result = {}, Outcome o = Outcome::Completed,
           std::uint64_t thread = 100) {
    am::HistoryEvent e = from(task, EventKind::ExecEnd);
    e.thread_id = thread;
    e.outcome = o;
    e.result = std::move(result);
    h_.push_back(e);
    return *this;
  }
  Log& run(std::uint64_t task, std::vector<std::int64_t> result = {}, std::uint64_t thread = 100) {
    return exs(task, thread).exe(task, std::move(result), Outcome::Completed, thread);
  }
  Log& awt(std::uint64_t task) {
    am::HistoryEvent e = from(task, EventKind::AwaitReturn);
    h_.push_back(e);
    return *this;
  }
  const am::History& history() const { return h_; }

 private:
  am::HistoryEvent base(EventKind k, std::uint64_t task) {
    am::HistoryEvent e;
    e.ts = ++ts_;
    e.kind = k;
    e.task_id = task;
    return e;
  }
  am::HistoryEvent from(std::uint64_t task, EventKind k) {
    am::HistoryEvent e = info_.at(task);
    e.ts = ++ts_;
    e.kind = k;
    e.args.clear();
    return e;
  }

  std::uint64_t ts_ = 0;
  am::History h_;
  std::map<std::uint64_t, am::HistoryEvent> info_;
};

// FIFO buffer of capacity `cap`: put(v) / take() -> v, on every monitor.
class BufferModel : public am::check::SpecModel {
 public:
  explicit BufferModel(std::size_t cap) : cap_(cap) {}
  std::unique_ptr<am::check::SpecModel> clone() const override {
    return std::make_unique<BufferModel>(*this);
  }
  bool apply(const am::check::OpRecord& op, std::string* why) override {
    if (op.method == "put") {
      if (items_.size() >= cap_) return deny(why, "full");
      items_.push_back(op.args.at(0));
      return true;
    }
    if (op.method == "take") {
      if (items_.empty()) return deny(why, "empty");
      if (op.result != std::vector<std::int64_t>{items_.front()}) return deny(why, "wrong item");
      items_.pop_front();
      return true;
    }
    return deny(why, "unknown method");
  }

 private:
  static bool deny(std::string* why, const char* msg) {
    if (why) *why = msg;
    return false;
  }
  std::size_t cap_;
  std::deque<std::int64_t> items_;
};

am::check::SequentialSpec buffer_spec(std::size_t cap) {
  return {"buffer", [cap](std::uint32_t) { return std::make_unique<BufferModel>(cap); }};
}

TEST(WellFormed, LifecycleViolations) {
  Log a;
  a.sub(1, 0, 1, "put", 0).exs(1).exs(1);
  EXPECT_THROW(am::check::IndexedHistory{a.history()}, am::Error);
  Log b;
  b.sub(1, 0, 1, "put", 0).run(1).exs(1);
  EXPECT_THROW(am::check::IndexedHistory{b.history()}, am::Error);
  Log c;
  c.sub(1, 0, 1, "put", 0).sub(1, 0, 1, "put", 1);
  EXPECT_THROW(am::check::IndexedHistory{c.history()}, am::Error);
  am::History d = Log().sub(1, 0, 1, "put", 0).history();
  d.push_back(d[0]);
  d[1].kind = EventKind::ExecStart;
  d[1].ts = 0;
  try {
    am::check::check_rule1(d);
    FAIL();
  } catch (const am::Error& e) {
    EXPECT_EQ(e.code(), am::Errc::MalformedHistory);
  }
  Log e;
  e.sub(1, 0, 1, "put", 0).exs(1);
  EXPECT_THROW(am::check::check_rule2(e.history()), am::Error);
  Log f;
  f.sub(1, 0, 1, "put", 0).awt(1);
  EXPECT_THROW(am::check::check_rule1(f.history()), am::Error);
}

TEST(Rule1, SingleExecutorPasses) {
  Log l;
  l.sub(1, 0, 1, "put", 0).sub(2, 0, 2, "put", 0).run(1).run(2);
  EXPECT_TRUE(am::check::check_rule1(l.history()).pass);
}

TEST(Rule1, TwoExecutorsCited) {
  Log l;
  l.sub(1, 0, 1, "put", 0).sub(2, 0, 2, "put", 0).run(1, {}, 100).run(2, {}, 101);
  auto v = am::check::check_rule1(l.history());
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.offsets, (std::vector<std::size_t>{2, 4}));
}

TEST(Rule1, OverlapDetected) {
  Log l;
  l.sub(1, 0, 1, "put", 0).sub(2, 0, 2, "put", 0).exs(1).exs(2).exe(1).exe(2);
  auto v = am::check::check_rule1(l.history());
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.offsets, (std::vector<std::size_t>{2, 3}));
}

TEST(Rule2, LaneOrderPasses) {
  Log l;
  l.sub(1, 0, 1, "put", 0).sub(2, 0, 1, "put", 1).sub(3, 0, 2, "put", 0).run(3).run(1).run(2);
  EXPECT_TRUE(am::check::check_rule2(l.history()).pass);
}

TEST(Rule2, ReorderedSeqFails) {
  Log l;
  l.sub(1, 0, 1, "put", 1).sub(2, 0, 1, "put", 2).run(2).run(1);
  auto v = am::check::check_rule2(l.history());
  EXPECT_FALSE(v.pass);
  ASSERT_EQ(v.offsets.size(), 2u);
}

TEST(Rule2, RetryUsesCompletingStart) {
  Log l;
  l.sub(1, 0, 1, "put", 0).sub(2, 0, 1, "put", 1);
  l.exs(1).exe(1, {}, Outcome::Retry).run(1).run(2);
  EXPECT_TRUE(am::check::check_rule2(l.history()).pass);
}

TEST(Rule3, AllBlockingPasses) {
  Log l;
  l.sub(1, 0, 1, "take", 0, true).run(1).sub(2, 1, 1, "take", 1, true).run(2);
  EXPECT_TRUE(am::check::check_rule3(l.history()).pass);
}

TEST(Rule3, IncompletePutBeforeOtherMonitorFails) {
  Log l;
  l.sub(1, 0, 1, "put", 0).sub(2, 1, 1, "put", 1).run(1).run(2);
  auto v = am::check::check_rule3(l.history());
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.offsets, (std::vector<std::size_t>{1, 3}));
}

TEST(Rule3, SameMonitorNotConstrained) {
  Log l;
  l.sub(1, 0, 1, "put", 0).sub(2, 0, 1, "put", 1).run(1).run(2);
  EXPECT_TRUE(am::check::check_rule3(l.history()).pass);
}

TEST(ThreadOrder, AllBlockingIsProgramOrder) {
  Log l;
  for (std::uint64_t i = 0; i < 4; ++i) l.sub(i + 1, i % 2, 1, "take", i, true).run(i + 1);
  auto o = am::check::build_thread_order(l.history(), 1);
  for (std::uint64_t a = 1; a <= 4; ++a)
    for (std::uint64_t b = 1; b <= 4; ++b) EXPECT_EQ(o.precedes(a, b), a < b);
}

TEST(ThreadOrder, UnrelatedNonBlockingUnordered) {
  Log l;
  l.sub(1, 0, 1, "put", 0).sub(2, 1, 1, "put", 1).run(2).run(1);
  auto o = am::check::build_thread_order(l.history(), 1);
  EXPECT_TRUE(o.pairs().empty());
}

TEST(ThreadOrder, AwaitOrdersLaterCalls) {
  Log l;
  l.sub(1, 0, 1, "put", 0).run(1).awt(1).sub(2, 1, 1, "put", 1).run(2);
  auto o = am::check::build_thread_order(l.history(), 1);
  EXPECT_TRUE(o.precedes(1, 2));
  EXPECT_FALSE(o.precedes(2, 1));
}

TEST(ThreadOrder, SameMonitorAndTransitivity) {
  Log l;
  l.sub(1, 0, 1, "put", 0).sub(2, 1, 1, "take", 1, true).run(2).sub(3, 0, 1, "put", 2).sub(4, 2, 1, "put", 3);
  l.run(1).run(3).run(4);
  auto o = am::check::build_thread_order(l.history(), 1);
  EXPECT_TRUE(o.precedes(1, 3));
  EXPECT_TRUE(o.precedes(2, 3));
  EXPECT_TRUE(o.precedes(2, 4));
  EXPECT_FALSE(o.precedes(1, 2));
  EXPECT_FALSE(o.precedes(1, 4));
  EXPECT_TRUE(o.acyclic());
}

TEST(Linearizable, ProducerConsumerWitness) {
  Log l;
  l.sub(1, 0, 1, "put", 0, false, {10}).run(1);
  l.sub(2, 0, 2, "take", 0, true).sub(3, 0, 1, "put", 1, false, {20});
  l.run(2, {10}).run(3);
  l.sub(4, 0, 2, "take", 1, true).run(4, {20});
  auto spec = buffer_spec(1);
  am::check::LinearizabilityOptions opt;
  opt.oracle = true;
  auto r = am::check::check_linearizable(l.history(), spec, opt);
  EXPECT_TRUE(r.pass) << r.violation;
  ASSERT_TRUE(r.oracle_pass);
  EXPECT_TRUE(*r.oracle_pass);
  EXPECT_TRUE(r.agree());
  EXPECT_EQ(r.witness, (std::vector<std::uint64_t>{1, 2, 3, 4}));
  EXPECT_TRUE(am::check::is_valid_witness(l.history(), spec, r.witness));
  EXPECT_TRUE(am::check::is_valid_witness(l.history(), spec, r.oracle_witness));
}

TEST(Linearizable, TakeOfUnputValueFails) {
  Log l;
  l.sub(1, 0, 1, "put", 0, false, {1}).run(1).sub(2, 0, 2, "take", 0, true).run(2, {99});
  am::check::LinearizabilityOptions opt;
  opt.oracle = true;
  auto r = am::check::check_linearizable(l.history(), buffer_spec(4), opt);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.violation.empty());
  EXPECT_FALSE(*r.oracle_pass);
}

TEST(Linearizable, OracleAcceptsReorderFastPathRejects) {
  // Two unordered puts complete in an order the take contradicts. No single
  // executor produces this, but the exhaustive search may swap the puts.
  Log l;
  l.sub(1, 0, 1, "put", 0, false, {1}).sub(2, 0, 2, "put", 0, false, {2});
  l.run(1).run(2);
  l.sub(3, 0, 3, "take", 0, true).run(3, {2});
  am::check::LinearizabilityOptions opt;
  opt.oracle = true;
  auto r = am::check::check_linearizable(l.history(), buffer_spec(4), opt);
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(*r.oracle_pass);
  EXPECT_FALSE(r.agree());
  EXPECT_EQ(r.oracle_witness, (std::vector<std::uint64_t>{2, 1, 3}));
}

TEST(Linearizable, OracleTooLarge) {
  Log l;
  for (std::uint64_t i = 1; i <= 11; ++i) l.sub(i, 0, 1, "put", i, false, {1}).run(i);
  am::check::LinearizabilityOptions opt;
  opt.oracle = true;
  try {
    am::check::check_linearizable(l.history(), buffer_spec(100), opt);
    FAIL();
  } catch (const am::Error& e) {
    EXPECT_EQ(e.code(), am::Errc::OracleTooLarge);
  }
}

TEST(Linearizable, FailedTasksExcluded) {
  Log l;
  l.sub(1, 0, 1, "put", 0, false, {5}).exs(1).exe(1, {}, Outcome::Failed);
  l.sub(2, 0, 1, "put", 1, false, {6}).run(2).sub(3, 0, 1, "take", 2, true).run(3, {6});
  auto r = am::check::check_linearizable(l.history(), buffer_spec(4));
  EXPECT_TRUE(r.pass) << r.violation;
  EXPECT_EQ(r.failed, std::vector<std::uint64_t>{1});
  EXPECT_EQ(r.witness, (std::vector<std::uint64_t>{2, 3}));
}

TEST(LockEquivalence, SingleThreadPasses) {
  Log l;
  l.sub(1, 0, 1, "put", 0, false, {1}).run(1).sub(2, 1, 1, "put", 1, false, {2}).run(2);
  EXPECT_TRUE(am::check::check_lock_equivalence(l.history()).pass);
}

TEST(LockEquivalence, RelaxedReorderFailsButLinearizable) {
  Log l;
  l.sub(1, 0, 1, "put", 0, false, {1}).sub(2, 1, 1, "put", 1, false, {2}).run(2).run(1);
  EXPECT_FALSE(am::check::check_lock_equivalence(l.history()).pass);
  auto r = am::check::check_linearizable(l.history(), buffer_spec(4));
  EXPECT_TRUE(r.pass) << r.violation;
}

TEST(Report, TextAndCheckAll) {
  Log l;
  l.sub(1, 0, 1, "put", 0, false, {1}).sub(2, 1, 1, "put", 1, false, {2}).run(2).run(1);
  auto spec = buffer_spec(4);
  am::check::CheckOptions opt;
  opt.spec = &spec;
  auto report = am::check::check_all(l.history(), opt);
  EXPECT_FALSE(report.pass());
  auto text = am::check::to_text(report);
  EXPECT_NE(text.find("rule3: FAIL"), std::string::npos);
  EXPECT_NE(text.find("linearizable: PASS"), std::string::npos);

  am::History bad = l.history();
  bad.erase(bad.begin());
  auto broken = am::check::check_all(bad, opt);
  ASSERT_EQ(broken.verdicts.size(), 1u);
  EXPECT_FALSE(broken.verdicts[0].pass);
}

// Runtime-generated histories: random mixes of blocking and non-blocking
// buffer calls in either mode always satisfy rules 1-2; strict runs also
// satisfy rule 3 and lock equivalence; all are linearizable.
struct Buf {
  std::deque<int> items;
};

// Above the items any run puts on one monitor, so only takes ever wait;
// smaller capacities can deadlock producer/consumer pairs across monitors.
constexpr std::size_t kCap = 64;

am::MonitorSpec runtime_buffer(const std::string& name) {
  am::MonitorBuilder<Buf> b(name, [] { return Buf{}; });
  b.nonblocking("put")
      .waituntil([](const Buf& s) { return s.items.size() < kCap; })
      .run([](Buf& s, am::Frame& f) { s.items.push_back(f.arg<int>(0)); });
  b.blocking("put_b")
      .waituntil([](const Buf& s) { return s.items.size() < kCap; })
      .run([](Buf& s, am::Frame& f) { s.items.push_back(f.arg<int>(0)); });
  b.blocking("take").waituntil([](const Buf& s) { return !s.items.empty(); }).run([](Buf& s) {
    int v = s.items.front();
    s.items.pop_front();
    return v;
  });
  return b.build();
}

class PutTakeModel : public BufferModel {
 public:
  PutTakeModel() : BufferModel(kCap) {}
  std::unique_ptr<am::check::SpecModel> clone() const override { return std::make_unique<PutTakeModel>(*this); }
  bool apply(const am::check::OpRecord& op, std::string* why) override {
    am::check::OpRecord copy = op;
    if (copy.method == "put_b") copy.method = "put";
    return BufferModel::apply(copy, why);
  }
};

TEST(Property, RuntimeHistoriesPassRules) {
  am::check::SequentialSpec spec{"buffer", [](std::uint32_t) { return std::make_unique<PutTakeModel>(); }};
  for (int seed = 0; seed < 40; ++seed) {
    for (auto mode : {am::OrderingMode::Strict, am::OrderingMode::Relaxed}) {
      am::RuntimeConfig c;
      c.history_recording = true;
      c.ordering_mode = mode;
      c.max_monitor_threads = 2;
      auto rt = am::start_runtime(c, {runtime_buffer("m0"), runtime_buffer("m1")});
      const int pairs = 2, per = 15;
      std::vector<std::thread> ts;
      for (int p = 0; p < pairs; ++p) {
        ts.emplace_back([&, p] {
          std::mt19937_64 rng(seed * 100 + p);
          for (int i = 0; i < per; ++i) {
            auto m = "m" + std::to_string(rng() % 2);
            int v = p * 1000 + i;
            if (rng() % 3 == 0)
              rt->call_with(rt->method(m, "put_b"), v);
            else {
              auto h = rt->submit_with(rt->method(m, "put"), v);
              if (rng() % 4 == 0) h.await();
            }
          }
        });
        ts.emplace_back([&, p] {
          // Consume exactly what the matching producer will put on each monitor.
          std::mt19937_64 rng(seed * 100 + p);
          for (int i = 0; i < per; ++i) {
            auto m = "m" + std::to_string(rng() % 2);
            if (rng() % 3 != 0) rng();
            rt->call(rt->method(m, "take"));
          }
        });
      }
      for (auto& t : ts) t.join();
      rt->shutdown(am::ShutdownMode::Drain);
      auto h = rt->history();
      ASSERT_TRUE(am::check::check_rule1(h).pass);
      ASSERT_TRUE(am::check::check_rule2(h).pass);
      if (mode == am::OrderingMode::Strict) {
        auto r3 = am::check::check_rule3(h);
        ASSERT_TRUE(r3.pass) << r3.message;
        ASSERT_TRUE(am::check::check_lock_equivalence(h).pass);
      }
      auto lin = am::check::check_linearizable(h, spec);
      ASSERT_TRUE(lin.pass) << lin.violation;
      ASSERT_TRUE(am::check::is_valid_witness(h, spec, lin.witness));
      for (auto s : am::check::IndexedHistory(h).submitters()) {
        auto o = am::check::build_thread_order(h, s);
        ASSERT_TRUE(o.acyclic());
      }
    }
  }
}

}  // namespace
