#include <algorithm>
#include <deque>
#include <set>

#include "activemonitor/error.hpp"
#include "activemonitor/workloads.hpp"

namespace am::workloads {

BufferState::BufferState(std::size_t size) : items_(size), size_(size) {
  if (size == 0) throw Error(Errc::ConfigError, "buffer size must be at least 1");
}

void BufferState::put(std::int64_t item) {
  items_[put_ptr_] = item;
  put_ptr_ = (put_ptr_ + 1) % size_;
  ++item_count_;
}

std::int64_t BufferState::take() {
  std::int64_t item = items_[take_ptr_];
  take_ptr_ = (take_ptr_ + 1) % size_;
  --item_count_;
  return item;
}

SortedList::SortedList(std::vector<std::int64_t> values) {
  std::sort(values.begin(), values.end());
  nodes_.reserve(values.size() + 1);
  std::uint32_t tail = 0;
  for (auto v : values) {
    const auto i = allocate(v, kNil);
    nodes_[tail].next = i;
    tail = i;
  }
  size_ = values.size();
}

std::uint32_t SortedList::allocate(std::int64_t v, std::uint32_t next) {
  if (!free_.empty()) {
    const auto i = free_.back();
    free_.pop_back();
    nodes_[i] = Node{v, next};
    return i;
  }
  nodes_.push_back(Node{v, next});
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

void SortedList::insert(std::int64_t v) {
  std::uint32_t prev = 0;
  for (auto i = nodes_[0].next; i != kNil && nodes_[i].value < v; i = nodes_[i].next) prev = i;
  const auto node = allocate(v, nodes_[prev].next);
  nodes_[prev].next = node;
  ++size_;
}

bool SortedList::remove(std::int64_t v) {
  std::uint32_t prev = 0;
  auto i = nodes_[0].next;
  for (; i != kNil && nodes_[i].value < v; i = nodes_[i].next) prev = i;
  if (i == kNil || nodes_[i].value != v) return false;
  nodes_[prev].next = nodes_[i].next;
  free_.push_back(i);
  --size_;
  return true;
}

bool SortedList::contains(std::int64_t v) const {
  for (auto i = nodes_[0].next; i != kNil; i = nodes_[i].next) {
    if (nodes_[i].value == v) return true;
    if (nodes_[i].value > v) return false;
  }
  return false;
}

std::vector<std::int64_t> SortedList::values() const {
  std::vector<std::int64_t> out;
  out.reserve(size_);
  for (auto i = nodes_[0].next; i != kNil; i = nodes_[i].next) out.push_back(nodes_[i].value);
  return out;
}

bool SortedList::sorted() const {
  auto v = values();
  return std::is_sorted(v.begin(), v.end());
}

namespace {

MethodKind nb(bool all_blocking) { return all_blocking ? MethodKind::Blocking : MethodKind::NonBlocking; }

}  // namespace

MonitorSpec build_bounded_buffer(std::size_t size, bool all_blocking, std::string name) {
  if (size < 1) throw Error(Errc::ConfigError, "bounded buffer size must be at least 1");
  MonitorBuilder<BufferState> b(std::move(name), [size] { return BufferState(size); });
  b.method("put", nb(all_blocking))
      .waituntil([](const BufferState& s) { return s.can_put(); })
      .run([](BufferState& s, Frame& f) { s.put(f.arg<std::int64_t>(0)); });
  b.blocking("take")
      .waituntil([](const BufferState& s) { return s.can_take(); })
      .run([](BufferState& s) { return s.take(); });
  return b.build();
}

MonitorSpec build_sorted_list(std::vector<std::int64_t> initial, bool all_blocking, std::string name) {
  MonitorBuilder<SortedList> b(std::move(name), [initial] { return SortedList(initial); });
  b.method("insert", nb(all_blocking)).run([](SortedList& s, Frame& f) { s.insert(f.arg<std::int64_t>(0)); });
  b.method("remove", nb(all_blocking)).run([](SortedList& s, Frame& f) {
    return s.remove(f.arg<std::int64_t>(0));
  });
  b.blocking("snapshot").run([](SortedList& s) { return s.values(); });
  return b.build();
}

MonitorSpec build_round_robin(std::size_t n, bool all_blocking, std::string name) {
  if (n < 2) throw Error(Errc::ConfigError, "round robin needs at least 2 threads");
  MonitorBuilder<RRState> b(std::move(name),
                            [n] { return RRState{0, static_cast<std::int64_t>(n), 0}; });
  b.method("enter", nb(all_blocking))
      .waituntil([](const RRState& s, const Frame& f) { return s.turn == f.arg<std::int64_t>(0); })
      .run([](RRState& s) {
        s.turn = (s.turn + 1) % s.n;
        return s.entries++;
      });
  return b.build();
}

MonitorSpec build_parametrized_buffer(std::size_t size, bool all_blocking, std::string name) {
  if (size < 1) throw Error(Errc::ConfigError, "parametrized buffer size must be at least 1");
  MonitorBuilder<BufferState> b(std::move(name), [size] { return BufferState(size); });
  b.method("put_batch", nb(all_blocking))
      .waituntil([](const BufferState& s, const Frame& f) {
        return s.can_put(f.arg<std::vector<std::int64_t>>(0).size());
      })
      .run([](BufferState& s, Frame& f) {
        for (auto v : f.arg<std::vector<std::int64_t>>(0)) s.put(v);
      });
  b.blocking("take_batch")
      .waituntil([](const BufferState& s, const Frame& f) {
        return s.can_take(static_cast<std::size_t>(f.arg<std::int64_t>(0)));
      })
      .run([](BufferState& s, Frame& f) {
        std::vector<std::int64_t> out(static_cast<std::size_t>(f.arg<std::int64_t>(0)));
        for (auto& v : out) v = s.take();
        return out;
      });
  return b.build();
}

MonitorSpec build_ticketed_rw(bool all_blocking, std::string name) {
  MonitorBuilder<TicketState> b(std::move(name), [] { return TicketState{}; });
  auto take_ticket = [](TicketState& s, Frame& f) {
    std::int64_t t = s.ticket++;
    f.scratch.set("ticket", t);
    return t;
  };
  auto my_ticket = [](const Frame& f) { return f.scratch.get<std::int64_t>("ticket"); };
  b.blocking("startRead")
      .scratch("ticket")
      .run(take_ticket)
      .waituntil([my_ticket](const TicketState& s, const Frame& f) { return s.serving == my_ticket(f); })
      .run([my_ticket](TicketState& s, Frame& f) {
        if (s.writer) throw std::logic_error("reader admitted while a writer is active");
        ++s.rcnt;
        ++s.serving;
        return my_ticket(f);
      });
  b.blocking("startWrite")
      .scratch("ticket")
      .run(take_ticket)
      .waituntil([my_ticket](const TicketState& s, const Frame& f) {
        return s.serving == my_ticket(f) && s.rcnt == 0;
      })
      .run([my_ticket](TicketState& s, Frame& f) {
        s.writer = true;
        return my_ticket(f);
      });
  b.method("endRead", nb(all_blocking)).run([](TicketState& s) { --s.rcnt; });
  b.method("endWrite", nb(all_blocking)).run([](TicketState& s) {
    s.writer = false;
    ++s.serving;
  });
  return b.build();
}

MonitorSpec build_counter(bool all_blocking, std::string name) {
  MonitorBuilder<CounterState> b(std::move(name), [] { return CounterState{}; });
  b.method("inc", nb(all_blocking)).run([](CounterState& s, Frame& f) { s.count += f.arg<std::int64_t>(0); });
  b.method("dec", nb(all_blocking))
      .waituntil([](const CounterState& s, const Frame& f) { return s.count >= f.arg<std::int64_t>(0); })
      .run([](CounterState& s, Frame& f) { s.count -= f.arg<std::int64_t>(0); });
  b.blocking("read").run([](CounterState& s) { return s.count; });
  b.method("bump", nb(all_blocking))
      .scratch("seen")
      .run([](CounterState& s, Frame& f) {
        f.scratch.set("seen", s.count);
        return s.count;
      })
      .waituntil([](const CounterState&) { return true; })
      .run([](CounterState& s, Frame& f) {
        s.count += 1;
        return f.scratch.get<std::int64_t>("seen");
      });
  return b.build();
}

// ---------------------------------------------------------------------------
// Sequential models

namespace {

using check::OpRecord;
using check::SpecModel;
using Ints = std::vector<std::int64_t>;

bool deny(std::string* why, std::string msg) {
  if (why) *why = std::move(msg);
  return false;
}

std::string show(const Ints& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

std::int64_t arg0(const OpRecord& op) { return op.args.empty() ? 0 : op.args[0]; }

template <class Derived>
class Model : public SpecModel {
 public:
  std::unique_ptr<SpecModel> clone() const override {
    return std::make_unique<Derived>(static_cast<const Derived&>(*this));
  }
};

class BufferModel : public Model<BufferModel> {
 public:
  explicit BufferModel(std::size_t cap) : cap_(cap) {}
  bool apply(const OpRecord& op, std::string* why) override {
    if (op.method == "put") {
      if (items_.size() >= cap_) return deny(why, "put on a full buffer");
      items_.push_back(arg0(op));
      return true;
    }
    if (op.method == "take") {
      if (items_.empty()) return deny(why, "take on an empty buffer");
      if (op.result != Ints{items_.front()})
        return deny(why, "take returned " + show(op.result) + ", expected " + std::to_string(items_.front()));
      items_.pop_front();
      return true;
    }
    return deny(why, "unknown buffer method " + op.method);
  }

 private:
  std::size_t cap_;
  std::deque<std::int64_t> items_;
};

class BatchModel : public Model<BatchModel> {
 public:
  explicit BatchModel(std::size_t cap) : cap_(cap) {}
  bool apply(const OpRecord& op, std::string* why) override {
    if (op.method == "put_batch") {
      if (items_.size() + op.args.size() > cap_) return deny(why, "batch does not fit");
      items_.insert(items_.end(), op.args.begin(), op.args.end());
      return true;
    }
    if (op.method == "take_batch") {
      auto k = static_cast<std::size_t>(arg0(op));
      if (items_.size() < k) return deny(why, "not enough items for the batch");
      Ints expect(items_.begin(), items_.begin() + static_cast<std::ptrdiff_t>(k));
      if (op.result != expect) return deny(why, "take_batch returned " + show(op.result) + ", expected " + show(expect));
      items_.erase(items_.begin(), items_.begin() + static_cast<std::ptrdiff_t>(k));
      return true;
    }
    return deny(why, "unknown batch-buffer method " + op.method);
  }

 private:
  std::size_t cap_;
  std::deque<std::int64_t> items_;
};

class ListModel : public Model<ListModel> {
 public:
  explicit ListModel(const Ints& initial) : items_(initial.begin(), initial.end()) {}
  bool apply(const OpRecord& op, std::string* why) override {
    if (op.method == "insert") {
      items_.insert(arg0(op));
      return true;
    }
    if (op.method == "remove") {
      auto it = items_.find(arg0(op));
      Ints expect{it != items_.end() ? 1 : 0};
      if (op.result != expect) return deny(why, "remove reported " + show(op.result) + ", expected " + show(expect));
      if (it != items_.end()) items_.erase(it);
      return true;
    }
    if (op.method == "snapshot") {
      Ints expect(items_.begin(), items_.end());
      if (op.result != expect) return deny(why, "snapshot differs from the model list");
      return true;
    }
    return deny(why, "unknown list method " + op.method);
  }

 private:
  std::multiset<std::int64_t> items_;
};

class RRModel : public Model<RRModel> {
 public:
  explicit RRModel(std::size_t n) : n_(static_cast<std::int64_t>(n)) {}
  bool apply(const OpRecord& op, std::string* why) override {
    if (op.method != "enter") return deny(why, "unknown round-robin method " + op.method);
    if (arg0(op) != turn_)
      return deny(why, "thread " + std::to_string(arg0(op)) + " entered on turn " + std::to_string(turn_));
    if (op.result != Ints{entries_}) return deny(why, "entry index " + show(op.result) + ", expected " + std::to_string(entries_));
    turn_ = (turn_ + 1) % n_;
    ++entries_;
    return true;
  }

 private:
  std::int64_t n_;
  std::int64_t turn_ = 0;
  std::int64_t entries_ = 0;
};

class TicketModel : public Model<TicketModel> {
 public:
  bool apply(const OpRecord& op, std::string* why) override {
    const bool read = op.method == "startRead";
    if (read || op.method == "startWrite") {
      if (op.result.size() != 1) return deny(why, "ticket missing from result");
      const std::int64_t t = op.result[0];
      if (op.stage == 0) {
        if (t != ticket_) return deny(why, "handed ticket " + std::to_string(t) + ", expected " + std::to_string(ticket_));
        ++ticket_;
        return true;
      }
      if (t != serving_) return deny(why, "ticket " + std::to_string(t) + " admitted while serving " + std::to_string(serving_));
      if (writer_) return deny(why, "admitted while a writer is active");
      if (read) {
        ++rcnt_;
        ++serving_;
      } else {
        if (rcnt_ != 0) return deny(why, "writer admitted with active readers");
        writer_ = true;
      }
      return true;
    }
    if (op.method == "endRead") {
      if (rcnt_ <= 0) return deny(why, "endRead without an active reader");
      --rcnt_;
      return true;
    }
    if (op.method == "endWrite") {
      if (!writer_) return deny(why, "endWrite without an active writer");
      writer_ = false;
      ++serving_;
      return true;
    }
    return deny(why, "unknown ticket method " + op.method);
  }

 private:
  std::int64_t ticket_ = 0, serving_ = 0, rcnt_ = 0;
  bool writer_ = false;
};

class CounterModel : public Model<CounterModel> {
 public:
  bool apply(const OpRecord& op, std::string* why) override {
    if (op.method == "inc") {
      count_ += arg0(op);
      return true;
    }
    if (op.method == "dec") {
      if (count_ < arg0(op)) return deny(why, "dec below zero");
      count_ -= arg0(op);
      return true;
    }
    if (op.method == "read") {
      if (op.result != Ints{count_}) return deny(why, "read " + show(op.result) + ", expected " + std::to_string(count_));
      return true;
    }
    if (op.method == "bump") {
      if (op.stage == 0) {
        if (op.result != Ints{count_}) return deny(why, "bump saw " + show(op.result) + ", expected " + std::to_string(count_));
        return true;
      }
      count_ += 1;
      return true;
    }
    return deny(why, "unknown counter method " + op.method);
  }

 private:
  std::int64_t count_ = 0;
};

}  // namespace

check::SequentialSpec buffer_spec(std::size_t size) {
  return {"bounded_buffer", [size](std::uint32_t) { return std::make_unique<BufferModel>(size); }};
}

check::SequentialSpec parametrized_buffer_spec(std::size_t size) {
  return {"parametrized_buffer", [size](std::uint32_t) { return std::make_unique<BatchModel>(size); }};
}

check::SequentialSpec sorted_list_spec(std::vector<std::int64_t> initial) {
  auto shared = std::make_shared<const Ints>(std::move(initial));
  return {"sorted_list", [shared](std::uint32_t) { return std::make_unique<ListModel>(*shared); }};
}

check::SequentialSpec round_robin_spec(std::size_t n) {
  return {"round_robin", [n](std::uint32_t) { return std::make_unique<RRModel>(n); }};
}

check::SequentialSpec ticket_spec() {
  return {"ticketed_rw", [](std::uint32_t) { return std::make_unique<TicketModel>(); }};
}

check::SequentialSpec counter_spec() {
  return {"counter", [](std::uint32_t) { return std::make_unique<CounterModel>(); }};
}

}  // namespace am::workloads
