#include "activemonitor/history.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <istream>
#include <ostream>
#include <sstream>

#include "activemonitor/error.hpp"

namespace am {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Submit: return "SUB";
    case EventKind::ExecStart: return "EXS";
    case EventKind::ExecEnd: return "EXE";
    case EventKind::AwaitReturn: return "AWT";
  }
  return "???";
}

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::None: return "none";
    case Outcome::Completed: return "ok";
    case Outcome::Retry: return "retry";
    case Outcome::Failed: return "fail";
  }
  return "none";
}

std::uint64_t event_clock() noexcept {
  static std::atomic<std::uint64_t> last{0};
  auto now = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
  std::uint64_t prev = last.load(std::memory_order_relaxed);
  std::uint64_t next;
  do {
    next = std::max(now, prev + 1);
  } while (!last.compare_exchange_weak(prev, next, std::memory_order_acq_rel));
  return next;
}

void sort_history(History& history) {
  std::stable_sort(history.begin(), history.end(), [](const HistoryEvent& a, const HistoryEvent& b) {
    if (a.ts != b.ts) return a.ts < b.ts;
    return a.thread_id < b.thread_id;
  });
}

namespace {
std::atomic<std::uint64_t> g_recorder_uid{0};

struct LocalBuffer {
  std::uint64_t uid;
  std::vector<HistoryEvent>* buffer;
};
thread_local std::vector<LocalBuffer> t_buffers;
}  // namespace

HistoryRecorder::HistoryRecorder() : uid_(g_recorder_uid.fetch_add(1) + 1) {}

std::vector<HistoryEvent>& HistoryRecorder::local_buffer() {
  for (auto it = t_buffers.rbegin(); it != t_buffers.rend(); ++it)
    if (it->uid == uid_) return *it->buffer;
  std::vector<HistoryEvent>* buffer;
  {
    std::lock_guard lock(mutex_);
    buffers_.push_back(std::make_unique<std::vector<HistoryEvent>>());
    buffer = buffers_.back().get();
  }
  if (t_buffers.size() >= 64) t_buffers.erase(t_buffers.begin());
  t_buffers.push_back(LocalBuffer{uid_, buffer});
  return *buffer;
}

void HistoryRecorder::record(HistoryEvent event) { local_buffer().push_back(std::move(event)); }

History HistoryRecorder::merged() const {
  History all;
  std::lock_guard lock(mutex_);
  for (const auto& buffer : buffers_) all.insert(all.end(), buffer->begin(), buffer->end());
  sort_history(all);
  return all;
}

// ---------------------------------------------------------------------------
// Dump format

namespace {

void write_list(std::ostream& out, const std::vector<std::int64_t>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << values[i];
  }
}

[[noreturn]] void malformed(const std::string& why) { throw Error(Errc::MalformedHistory, why); }

template <class T>
T parse_number(std::string_view token, const char* field) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
    malformed(std::string("bad ") + field + " '" + std::string(token) + "'");
  return value;
}

std::vector<std::int64_t> parse_list(std::string_view text) {
  std::vector<std::int64_t> values;
  while (!text.empty()) {
    auto comma = text.find(',');
    values.push_back(parse_number<std::int64_t>(text.substr(0, comma), "list value"));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return values;
}

}  // namespace

std::string format_event(const HistoryEvent& e) {
  std::ostringstream out;
  out << e.ts << ' ' << to_string(e.kind) << ' ' << e.task_id << ' ' << e.monitor_id << ' '
      << e.thread_id << ' ' << e.method << ' ' << e.stage << ' ' << e.seq;
  out << " f=" << (e.blocking ? 'b' : 'n');
  if (e.stage_count != 1) out << " n=" << e.stage_count;
  if (e.outcome != Outcome::None) out << " o=" << to_string(e.outcome);
  if (!e.args.empty()) {
    out << " a=";
    write_list(out, e.args);
  }
  if (!e.result.empty()) {
    out << " r=";
    write_list(out, e.result);
  }
  return out.str();
}

void write_history(std::ostream& out, const History& history) {
  for (const auto& e : history) out << format_event(e) << '\n';
}

HistoryEvent parse_event(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  if (tokens.size() < 8) malformed("expected at least 8 fields, got " + std::to_string(tokens.size()));

  HistoryEvent e;
  e.ts = parse_number<std::uint64_t>(tokens[0], "ts_ns");
  if (tokens[1] == "SUB") e.kind = EventKind::Submit;
  else if (tokens[1] == "EXS") e.kind = EventKind::ExecStart;
  else if (tokens[1] == "EXE") e.kind = EventKind::ExecEnd;
  else if (tokens[1] == "AWT") e.kind = EventKind::AwaitReturn;
  else malformed("unknown event kind '" + std::string(tokens[1]) + "'");
  e.task_id = parse_number<std::uint64_t>(tokens[2], "task_id");
  e.monitor_id = parse_number<std::uint32_t>(tokens[3], "monitor_id");
  e.thread_id = parse_number<std::uint64_t>(tokens[4], "thread_id");
  e.method = std::string(tokens[5]);
  e.stage = parse_number<std::uint32_t>(tokens[6], "stage");
  e.seq = parse_number<std::uint64_t>(tokens[7], "seq");
  if (e.kind == EventKind::ExecEnd) e.outcome = Outcome::Completed;

  for (std::size_t t = 8; t < tokens.size(); ++t) {
    std::string_view tok = tokens[t];
    if (tok.size() < 2 || tok[1] != '=') malformed("bad optional field '" + std::string(tok) + "'");
    std::string_view value = tok.substr(2);
    switch (tok[0]) {
      case 'f':
        if (value != "b" && value != "n") malformed("flag must be b or n");
        e.blocking = value == "b";
        break;
      case 'n': e.stage_count = parse_number<std::uint32_t>(value, "stage count"); break;
      case 'o':
        if (value == "ok") e.outcome = Outcome::Completed;
        else if (value == "retry") e.outcome = Outcome::Retry;
        else if (value == "fail") e.outcome = Outcome::Failed;
        else malformed("unknown outcome '" + std::string(value) + "'");
        break;
      case 'a': e.args = parse_list(value); break;
      case 'r': e.result = parse_list(value); break;
      default: malformed("unknown optional field '" + std::string(tok) + "'");
    }
  }
  return e;
}

History read_history(std::istream& in) {
  History history;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    if (view.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    if (view.front() == '#') continue;
    try {
      history.push_back(parse_event(view));
    } catch (const Error& e) {
      throw Error(Errc::MalformedHistory, "line " + std::to_string(number) + ": " + e.what());
    }
  }
  return history;
}

}  // namespace am
