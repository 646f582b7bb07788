#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "activemonitor/value.hpp"

namespace am {

/// Per-monitor table of submitter lanes. Each lane is a FIFO of entries in
/// submission order; only lane heads are ever candidates for execution.
template <class Entry>
class LaneTable {
 public:
  struct Item {
    Entry entry;
    std::uint64_t stamp;
  };

  struct Lane {
    SubmitterId submitter;
    std::deque<Item> items;
  };

  void push_back(SubmitterId submitter, Entry entry, std::uint64_t stamp) {
    lane_for(submitter).items.push_back(Item{std::move(entry), stamp});
    ++size_;
  }

  /// Continuation of the current head (next stage, retry).
  void push_front(SubmitterId submitter, Entry entry, std::uint64_t stamp) {
    lane_for(submitter).items.push_front(Item{std::move(entry), stamp});
    ++size_;
  }

  /// Among lane heads accepted by `executable`, returns the lane index of the
  /// one with the smallest stamp. A head whose stamp is not smaller than the
  /// best found so far is not evaluated.
  template <class Executable>
  std::optional<std::size_t> schedule_next(Executable&& executable) const {
    std::optional<std::size_t> best;
    std::uint64_t best_stamp = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t i = 0; i < lanes_.size(); ++i) {
      const auto& items = lanes_[i].items;
      if (items.empty()) continue;
      const Item& head = items.front();
      if (head.stamp >= best_stamp) continue;
      if (executable(head.entry)) {
        best = i;
        best_stamp = head.stamp;
      }
    }
    return best;
  }

  Entry& head(std::size_t lane) { return lanes_[lane].items.front().entry; }
  const Lane& lane(std::size_t index) const { return lanes_[index]; }
  std::size_t lane_count() const noexcept { return lanes_.size(); }

  Entry pop_front(std::size_t lane) {
    auto& items = lanes_[lane].items;
    Entry entry = std::move(items.front().entry);
    items.pop_front();
    --size_;
    return entry;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& lane : lanes_)
      for (const auto& item : lane.items) fn(lane.submitter, item.entry);
  }

  void clear() {
    for (auto& lane : lanes_) lane.items.clear();
    size_ = 0;
  }

 private:
  Lane& lane_for(SubmitterId submitter) {
    auto [it, inserted] = index_.try_emplace(submitter, lanes_.size());
    if (inserted) lanes_.push_back(Lane{submitter, {}});
    return lanes_[it->second];
  }

  std::vector<Lane> lanes_;
  std::unordered_map<SubmitterId, std::size_t> index_;
  std::size_t size_ = 0;
};

}  // namespace am
