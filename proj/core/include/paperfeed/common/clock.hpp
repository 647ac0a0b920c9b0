#pragma once

#include <atomic>

#include "paperfeed/common/time.hpp"

namespace paperfeed {

/// Time source injected into every module so replays can run on a virtual
/// clock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
};

/// Externally driven clock. Thread-safe; time only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{}) : micros_(to_micros(start)) {}

  Timestamp now() const override { return from_micros(micros_.load(std::memory_order_acquire)); }
  void set(Timestamp t) { micros_.store(to_micros(t), std::memory_order_release); }
  void advance(Duration d) { micros_.fetch_add(d.count(), std::memory_order_acq_rel); }

 private:
  std::atomic<std::int64_t> micros_;
};

}  // namespace paperfeed
