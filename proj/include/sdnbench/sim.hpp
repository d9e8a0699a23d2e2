#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <unordered_set>
#include <vector>

namespace sdnbench {

/// Simulated time in milliseconds since simulation start.
using SimTime = double;

/// Deterministic 64-bit generator. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; doubles take the top 53 bits.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with probability p. p <= 0 and p >= 1 consume no draw.
  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

struct EventId {
  std::uint64_t seq = 0;
};

/// Single-threaded discrete-event scheduler. Events with equal fire time run
/// in insertion order.
class Simulator {
 public:
  using Action = std::function<void()>;

  explicit Simulator(std::uint64_t seed = 0) : rng_(seed) {}
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimTime now() const { return now_; }

  /// Throws std::invalid_argument on negative delay. A stopped simulator
  /// discards new events and returns an id that never fires.
  EventId schedule(double delay_ms, Action action);
  EventId schedule_at(SimTime at, Action action);
  void cancel(EventId id);

  /// Runs to quiescence; returns the time of the last executed event.
  SimTime run();
  /// Runs every event with fire_at <= until, then advances the clock to until
  /// (unless stopped earlier).
  SimTime run(SimTime until);
  /// Runs events while `keep_going()` holds before each one; returns the clock.
  SimTime run_while(const std::function<bool()>& keep_going);

  /// Ends the run after the executing event.
  void stop() { stopped_ = true; }
  bool stopped() const { return stopped_; }

  /// Queued entries, cancelled ones included until they are popped.
  std::size_t queued() const { return queue_.size(); }
  std::uint64_t executed() const { return executed_; }
  SeededRng& rng() { return rng_; }

 private:
  struct Event {
    SimTime fire_at;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.fire_at > b.fire_at || (a.fire_at == b.fire_at && a.seq > b.seq);
    }
  };

  bool step(SimTime until);

  std::vector<Event> queue_;
  std::unordered_set<std::uint64_t> cancelled_;
  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
  bool stopped_ = false;
  SeededRng rng_;
};

}  // namespace sdnbench
