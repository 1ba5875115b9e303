#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "chosim/sim_time.hpp"

namespace chosim {

/// Min-queue of timed payloads. Equal times pop in insertion order.
template <class T>
class EventQueue {
public:
  struct Entry {
    SimTime time;
    std::uint64_t seq;
    T payload;
  };

  void push(SimTime time, T payload) { heap_.push(Entry{time, next_seq_++, std::move(payload)}); }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const Entry& top() const { return heap_.top(); }

  /// True if the earliest entry is due at or before `now`.
  bool due(SimTime now) const { return !heap_.empty() && heap_.top().time <= now; }

  Entry pop() {
    Entry e = heap_.top();
    heap_.pop();
    return e;
  }

private:
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace chosim
