#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "activemonitor/error.hpp"
#include "activemonitor/history.hpp"

namespace {

am::HistoryEvent make(std::uint64_t ts, am::EventKind kind, std::uint64_t task) {
  am::HistoryEvent e;
  e.ts = ts;
  e.kind = kind;
  e.task_id = task;
  e.monitor_id = 1;
  e.thread_id = 4;
  e.method = "put";
  e.seq = 9;
  return e;
}

TEST(HistoryFormat, RoundTrip) {
  am::History h;
  auto sub = make(10, am::EventKind::Submit, 3);
  sub.args = {5, -2};
  sub.stage_count = 2;
  h.push_back(sub);
  h.push_back(make(11, am::EventKind::ExecStart, 3));
  auto end = make(12, am::EventKind::ExecEnd, 3);
  end.outcome = am::Outcome::Completed;
  end.result = {7};
  h.push_back(end);
  auto awt = make(13, am::EventKind::AwaitReturn, 3);
  awt.blocking = false;
  h.push_back(awt);

  std::stringstream io;
  am::write_history(io, h);
  am::History back = am::read_history(io);
  EXPECT_EQ(back, h);
}

TEST(HistoryFormat, CoreColumnsOnly) {
  auto e = am::parse_event("100 EXS 4 0 2 take 0 7");
  EXPECT_EQ(e.ts, 100u);
  EXPECT_EQ(e.kind, am::EventKind::ExecStart);
  EXPECT_EQ(e.task_id, 4u);
  EXPECT_EQ(e.monitor_id, 0u);
  EXPECT_EQ(e.thread_id, 2u);
  EXPECT_EQ(e.method, "take");
  EXPECT_EQ(e.seq, 7u);
  EXPECT_EQ(am::parse_event("101 EXE 4 0 2 take 0 7").outcome, am::Outcome::Completed);
  EXPECT_EQ(am::format_event(e).rfind("100 EXS 4 0 2 take 0 7", 0), 0u);
}

TEST(HistoryFormat, MalformedLinesReportLineNumber) {
  std::stringstream io("# comment\n1 SUB 1 0 1 put 0 0\n2 XYZ 1 0 1 put 0 0\n");
  try {
    am::read_history(io);
    FAIL();
  } catch (const am::Error& e) {
    EXPECT_EQ(e.code(), am::Errc::MalformedHistory);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(am::parse_event("1 SUB 1 0"), am::Error);
  EXPECT_THROW(am::parse_event("1 SUB 1 0 1 put 0 x"), am::Error);
  EXPECT_THROW(am::parse_event("1 EXE 1 0 1 put 0 0 o=maybe"), am::Error);
}

TEST(EventClock, StrictlyIncreasingAcrossThreads) {
  constexpr int kThreads = 4, kPer = 20000;
  std::vector<std::vector<std::uint64_t>> seen(kThreads);
  std::vector<std::thread> ts;
  for (int t = 0; t < kThreads; ++t)
    ts.emplace_back([&, t] {
      for (int i = 0; i < kPer; ++i) seen[t].push_back(am::event_clock());
    });
  for (auto& t : ts) t.join();
  std::vector<std::uint64_t> all;
  for (auto& v : seen) {
    for (std::size_t i = 1; i < v.size(); ++i) ASSERT_LT(v[i - 1], v[i]);
    all.insert(all.end(), v.begin(), v.end());
  }
  std::sort(all.begin(), all.end());
  EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
}

TEST(HistoryRecorder, MergesPerThreadBuffers) {
  am::HistoryRecorder rec;
  std::vector<std::thread> ts;
  for (int t = 0; t < 3; ++t)
    ts.emplace_back([&, t] {
      for (int i = 0; i < 100; ++i) {
        auto e = make(am::event_clock(), am::EventKind::Submit, t * 1000 + i);
        e.thread_id = t;
        rec.record(e);
      }
    });
  for (auto& t : ts) t.join();
  auto h = rec.merged();
  ASSERT_EQ(h.size(), 300u);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i - 1].ts, h[i].ts);
}

}  // namespace
