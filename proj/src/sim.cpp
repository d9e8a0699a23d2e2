#include "sdnbench/sim.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace sdnbench {

EventId Simulator::schedule(double delay_ms, Action action) {
  if (!(delay_ms >= 0.0)) throw std::invalid_argument("schedule: negative delay");
  return schedule_at(now_ + delay_ms, std::move(action));
}

EventId Simulator::schedule_at(SimTime at, Action action) {
  if (!(at >= now_)) throw std::invalid_argument("schedule: event in the past");
  const std::uint64_t seq = next_seq_++;
  if (stopped_) return EventId{seq};
  queue_.push_back(Event{at, seq, std::move(action)});
  std::push_heap(queue_.begin(), queue_.end(), Later{});
  return EventId{seq};
}

void Simulator::cancel(EventId id) {
  if (id.seq < next_seq_) cancelled_.insert(id.seq);
}

bool Simulator::step(SimTime until) {
  while (!queue_.empty() && !stopped_) {
    if (queue_.front().fire_at > until) return false;
    std::pop_heap(queue_.begin(), queue_.end(), Later{});
    Event ev = std::move(queue_.back());
    queue_.pop_back();
    if (!cancelled_.empty()) {
      if (auto it = cancelled_.find(ev.seq); it != cancelled_.end()) {
        cancelled_.erase(it);
        continue;
      }
    }
    now_ = ev.fire_at;
    ++executed_;
    ev.action();
    return true;
  }
  return false;
}

SimTime Simulator::run() {
  while (step(std::numeric_limits<double>::infinity())) {
  }
  // Drop cancellation marks for events that will never run.
  if (queue_.empty()) cancelled_.clear();
  return now_;
}

SimTime Simulator::run_while(const std::function<bool()>& keep_going) {
  while (keep_going() && step(std::numeric_limits<double>::infinity())) {
  }
  return now_;
}

SimTime Simulator::run(SimTime until) {
  while (step(until)) {
  }
  if (!stopped_ && until > now_) now_ = until;
  return now_;
}

}  // namespace sdnbench
