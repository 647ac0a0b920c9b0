#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace paperfeed {

/// Fixed-size worker pool. Tasks run in submission order per worker pick-up;
/// a task that throws is logged and swallowed so one failure never stalls
/// the pool.
class ThreadPool {
 public:
  explicit ThreadPool(std::size_t threads, std::string name = "pool");
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  void submit(std::function<void()> task);

  /// Blocks until the queue is empty and no task is running.
  void wait_idle();

  std::size_t size() const { return workers_.size(); }

 private:
  void work();

  std::string name_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<std::function<void()>> tasks_;
  std::size_t running_ = 0;
  bool stopping_ = false;
  std::vector<std::jthread> workers_;
};

}  // namespace paperfeed
