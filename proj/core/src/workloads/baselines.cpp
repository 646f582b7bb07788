#include <algorithm>
#include <condition_variable>
#include <limits>
#include <mutex>

#include "activemonitor/error.hpp"
#include "activemonitor/workloads.hpp"

namespace am::workloads {

namespace {

using Ints = std::vector<std::int64_t>;

void emit(const TraceHook& hook, std::string_view method, std::uint32_t stage, Ints args, Ints result) {
  if (hook) hook(method, stage, std::move(args), std::move(result));
}

}  // namespace

struct LockBuffer::Impl {
  explicit Impl(std::size_t size) : state(size) {}
  std::mutex m;
  std::condition_variable not_full, not_empty;
  BufferState state;
  TraceHook hook;
};

LockBuffer::LockBuffer(std::size_t size) : impl_(std::make_unique<Impl>(size)) {}
LockBuffer::~LockBuffer() = default;
void LockBuffer::set_hook(TraceHook hook) { impl_->hook = std::move(hook); }

void LockBuffer::put(std::int64_t item) {
  std::unique_lock lock(impl_->m);
  impl_->not_full.wait(lock, [&] { return impl_->state.can_put(); });
  impl_->state.put(item);
  emit(impl_->hook, "put", 0, {item}, {});
  lock.unlock();
  impl_->not_empty.notify_one();
}

std::int64_t LockBuffer::take() {
  std::unique_lock lock(impl_->m);
  impl_->not_empty.wait(lock, [&] { return impl_->state.can_take(); });
  std::int64_t item = impl_->state.take();
  emit(impl_->hook, "take", 0, {}, {item});
  lock.unlock();
  impl_->not_full.notify_one();
  return item;
}

struct LockBatchBuffer::Impl {
  explicit Impl(std::size_t size) : state(size) {}
  std::mutex m;
  std::condition_variable not_full, not_empty;
  BufferState state;
  TraceHook hook;
};

LockBatchBuffer::LockBatchBuffer(std::size_t size) : impl_(std::make_unique<Impl>(size)) {}
LockBatchBuffer::~LockBatchBuffer() = default;
void LockBatchBuffer::set_hook(TraceHook hook) { impl_->hook = std::move(hook); }

void LockBatchBuffer::put_batch(const std::vector<std::int64_t>& items) {
  if (items.size() > impl_->state.size()) throw Error(Errc::ConfigError, "batch larger than the buffer");
  std::unique_lock lock(impl_->m);
  impl_->not_full.wait(lock, [&] { return impl_->state.can_put(items.size()); });
  for (auto v : items) impl_->state.put(v);
  emit(impl_->hook, "put_batch", 0, items, {});
  lock.unlock();
  // waiters need different amounts, so wake all of them
  impl_->not_empty.notify_all();
}

std::vector<std::int64_t> LockBatchBuffer::take_batch(std::size_t k) {
  if (k > impl_->state.size()) throw Error(Errc::ConfigError, "batch larger than the buffer");
  std::unique_lock lock(impl_->m);
  impl_->not_empty.wait(lock, [&] { return impl_->state.can_take(k); });
  Ints out(k);
  for (auto& v : out) v = impl_->state.take();
  emit(impl_->hook, "take_batch", 0, {static_cast<std::int64_t>(k)}, out);
  lock.unlock();
  impl_->not_full.notify_all();
  return out;
}

struct LockSortedList::Impl {
  explicit Impl(Ints initial) : list(std::move(initial)) {}
  mutable std::mutex m;
  SortedList list;
  TraceHook hook;
};

LockSortedList::LockSortedList(std::vector<std::int64_t> initial)
    : impl_(std::make_unique<Impl>(std::move(initial))) {}
LockSortedList::~LockSortedList() = default;
void LockSortedList::set_hook(TraceHook hook) { impl_->hook = std::move(hook); }

void LockSortedList::insert(std::int64_t v) {
  std::lock_guard lock(impl_->m);
  impl_->list.insert(v);
  emit(impl_->hook, "insert", 0, {v}, {});
}

bool LockSortedList::remove(std::int64_t v) {
  std::lock_guard lock(impl_->m);
  bool found = impl_->list.remove(v);
  emit(impl_->hook, "remove", 0, {v}, {found ? 1 : 0});
  return found;
}

std::vector<std::int64_t> LockSortedList::values() const {
  std::lock_guard lock(impl_->m);
  return impl_->list.values();
}

// Hand-over-hand list. The head is a sentinel that never holds a value.
struct FineGrainedSortedList::Node {
  explicit Node(std::int64_t v, Node* n = nullptr) : value(v), next(n) {}
  std::int64_t value;
  Node* next;
  std::mutex m;
};

FineGrainedSortedList::FineGrainedSortedList(std::vector<std::int64_t> initial)
    : head_(new Node(std::numeric_limits<std::int64_t>::min())) {
  std::sort(initial.begin(), initial.end());
  Node* tail = head_;
  for (auto v : initial) {
    tail->next = new Node(v);
    tail = tail->next;
  }
}

FineGrainedSortedList::~FineGrainedSortedList() {
  while (head_) {
    Node* next = head_->next;
    delete head_;
    head_ = next;
  }
}

void FineGrainedSortedList::insert(std::int64_t v) {
  Node* pred = head_;
  pred->m.lock();
  Node* curr = pred->next;
  if (curr) curr->m.lock();
  while (curr && curr->value < v) {
    pred->m.unlock();
    pred = curr;
    curr = curr->next;
    if (curr) curr->m.lock();
  }
  pred->next = new Node(v, curr);
  emit(hook_, "insert", 0, {v}, {});
  if (curr) curr->m.unlock();
  pred->m.unlock();
}

bool FineGrainedSortedList::remove(std::int64_t v) {
  Node* pred = head_;
  pred->m.lock();
  Node* curr = pred->next;
  if (curr) curr->m.lock();
  while (curr && curr->value < v) {
    pred->m.unlock();
    pred = curr;
    curr = curr->next;
    if (curr) curr->m.lock();
  }
  const bool found = curr && curr->value == v;
  if (found) pred->next = curr->next;
  emit(hook_, "remove", 0, {v}, {found ? 1 : 0});
  if (curr) curr->m.unlock();
  pred->m.unlock();
  if (found) delete curr;
  return found;
}

std::vector<std::int64_t> FineGrainedSortedList::values() const {
  Ints out;
  Node* pred = head_;
  pred->m.lock();
  for (Node* curr = pred->next; curr; curr = curr->next) {
    curr->m.lock();
    pred->m.unlock();
    out.push_back(curr->value);
    pred = curr;
  }
  pred->m.unlock();
  return out;
}

struct LockRoundRobin::Impl {
  std::mutex m;
  std::condition_variable turn_changed;
  RRState state;
  TraceHook hook;
};

LockRoundRobin::LockRoundRobin(std::size_t n) : impl_(std::make_unique<Impl>()) {
  if (n < 2) throw Error(Errc::ConfigError, "round robin needs at least 2 threads");
  impl_->state.n = static_cast<std::int64_t>(n);
}
LockRoundRobin::~LockRoundRobin() = default;
void LockRoundRobin::set_hook(TraceHook hook) { impl_->hook = std::move(hook); }

std::int64_t LockRoundRobin::enter(std::int64_t id) {
  std::unique_lock lock(impl_->m);
  auto& s = impl_->state;
  impl_->turn_changed.wait(lock, [&] { return s.turn == id; });
  s.turn = (s.turn + 1) % s.n;
  std::int64_t index = s.entries++;
  emit(impl_->hook, "enter", 0, {id}, {index});
  lock.unlock();
  impl_->turn_changed.notify_all();
  return index;
}

struct LockTicketRW::Impl {
  std::mutex m;
  std::condition_variable changed;
  TicketState state;
  TraceHook hook;
};

LockTicketRW::LockTicketRW() : impl_(std::make_unique<Impl>()) {}
LockTicketRW::~LockTicketRW() = default;
void LockTicketRW::set_hook(TraceHook hook) { impl_->hook = std::move(hook); }

std::int64_t LockTicketRW::start_read() {
  std::unique_lock lock(impl_->m);
  auto& s = impl_->state;
  std::int64_t t = s.ticket++;
  emit(impl_->hook, "startRead", 0, {}, {t});
  impl_->changed.wait(lock, [&] { return s.serving == t; });
  ++s.rcnt;
  ++s.serving;
  emit(impl_->hook, "startRead", 1, {}, {t});
  lock.unlock();
  impl_->changed.notify_all();
  return t;
}

void LockTicketRW::end_read() {
  std::unique_lock lock(impl_->m);
  --impl_->state.rcnt;
  emit(impl_->hook, "endRead", 0, {}, {});
  lock.unlock();
  impl_->changed.notify_all();
}

std::int64_t LockTicketRW::start_write() {
  std::unique_lock lock(impl_->m);
  auto& s = impl_->state;
  std::int64_t t = s.ticket++;
  emit(impl_->hook, "startWrite", 0, {}, {t});
  impl_->changed.wait(lock, [&] { return s.serving == t && s.rcnt == 0; });
  s.writer = true;
  emit(impl_->hook, "startWrite", 1, {}, {t});
  return t;
}

void LockTicketRW::end_write() {
  std::unique_lock lock(impl_->m);
  impl_->state.writer = false;
  ++impl_->state.serving;
  emit(impl_->hook, "endWrite", 0, {}, {});
  lock.unlock();
  impl_->changed.notify_all();
}

}  // namespace am::workloads
