#include "paperfeed/common/scheduling.hpp"

#include <memory>

namespace paperfeed {

PeriodicTask::PeriodicTask(std::chrono::steady_clock::duration period, std::function<void()> fn)
    : period_(period), fn_(std::move(fn)) {
  thread_ = std::jthread([this] {
    auto next = std::chrono::steady_clock::now() + period_;
    std::unique_lock lock(mu_);
    while (!stopping_) {
      if (cv_.wait_until(lock, next, [&] { return stopping_; })) break;
      lock.unlock();
      fn_();
      lock.lock();
      ++runs_;
      next += period_;
    }
  });
}

PeriodicTask::~PeriodicTask() { stop(); }

void PeriodicTask::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

std::uint64_t PeriodicTask::runs() const {
  std::lock_guard lock(mu_);
  return runs_;
}

void VirtualScheduler::at(Timestamp when, Callback fn) {
  events_.push(Event{when, next_order_++, std::move(fn)});
}

namespace {

struct Repeater {
  VirtualScheduler* scheduler;
  Duration period;
  Timestamp until;
  std::shared_ptr<VirtualScheduler::Callback> fn;

  void operator()(Timestamp now) const {
    (*fn)(now);
    if (now + period <= until) scheduler->at(now + period, *this);
  }
};

}  // namespace

void VirtualScheduler::every(Duration period, Timestamp start, Timestamp until, Callback fn) {
  const Timestamp first = start + period;
  if (first > until) return;
  at(first, Repeater{this, period, until, std::make_shared<Callback>(std::move(fn))});
}

void VirtualScheduler::run_until(Timestamp until) {
  while (!events_.empty() && events_.top().when <= until) {
    Event ev = events_.top();
    events_.pop();
    if (ev.when > clock_.now()) clock_.set(ev.when);
    ++fired_;
    ev.fn(ev.when);
  }
  if (until > clock_.now()) clock_.set(until);
}

}  // namespace paperfeed
