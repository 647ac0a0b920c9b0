#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

#include "paperfeed/common/clock.hpp"

namespace paperfeed {

/// Runs a callback every `period` on a background thread until destroyed
/// or stopped. The first run happens one period after start.
class PeriodicTask {
 public:
  PeriodicTask(std::chrono::steady_clock::duration period, std::function<void()> fn);
  ~PeriodicTask();

  PeriodicTask(const PeriodicTask&) = delete;
  PeriodicTask& operator=(const PeriodicTask&) = delete;

  void stop();
  std::uint64_t runs() const;

 private:
  std::chrono::steady_clock::duration period_;
  std::function<void()> fn_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::uint64_t runs_ = 0;
  std::jthread thread_;
};

/// Discrete-event scheduler over a ManualClock. Callbacks fire in
/// (time, insertion order); firing sets the clock to the event time.
class VirtualScheduler {
 public:
  using Callback = std::function<void(Timestamp)>;

  explicit VirtualScheduler(ManualClock& clock) : clock_(clock) {}

  void at(Timestamp when, Callback fn);

  /// Fires at start + k*period for k >= 1 while the time is <= `until`.
  void every(Duration period, Timestamp start, Timestamp until, Callback fn);

  /// Fires every pending event with time <= `until`, then sets the clock to
  /// `until`. Callbacks may schedule further events.
  void run_until(Timestamp until);

  bool empty() const { return events_.empty(); }
  std::size_t pending() const { return events_.size(); }
  std::uint64_t fired() const { return fired_; }

 private:
  struct Event {
    Timestamp when;
    std::uint64_t order;
    Callback fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.when != b.when ? a.when > b.when : a.order > b.order;
    }
  };

  ManualClock& clock_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t next_order_ = 0;
  std::uint64_t fired_ = 0;
};

}  // namespace paperfeed
