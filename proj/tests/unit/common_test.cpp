#include <atomic>
#include <sstream>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "paperfeed/common/bounded_queue.hpp"
#include "paperfeed/common/clock.hpp"
#include "paperfeed/common/errors.hpp"
#include "paperfeed/common/jsonl.hpp"
#include "paperfeed/common/random.hpp"
#include "paperfeed/common/scheduling.hpp"
#include "paperfeed/common/thread_pool.hpp"
#include "paperfeed/common/time.hpp"

namespace paperfeed {
namespace {

TEST(Time, ParsesUtcAndOffsets) {
  EXPECT_EQ(to_micros(parse_timestamp("1970-01-01T00:00:01Z")), 1'000'000);
  EXPECT_EQ(parse_timestamp("2025-03-01T07:00:00-05:00"), parse_timestamp("2025-03-01T12:00:00Z"));
  EXPECT_EQ(parse_timestamp("2025-03-01T12:00:00.123456789Z") - parse_timestamp("2025-03-01T12:00:00Z"),
            Duration{123456});
}

TEST(Time, RejectsGarbage) {
  EXPECT_THROW(parse_timestamp(""), ParseError);
  EXPECT_THROW(parse_timestamp("2025-13-01T00:00:00Z"), ParseError);
  EXPECT_THROW(parse_timestamp("yesterday"), ParseError);
}

TEST(Time, FormatRoundTripsForRandomInstants) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    // Cover 1970..2100 and both millisecond and microsecond precision.
    auto us = static_cast<std::int64_t>(rng.below(4'102'444'800ull * 1'000'000));
    if (i % 2 == 0) us -= us % 1000;
    const Timestamp t = from_micros(us);
    ASSERT_EQ(parse_timestamp(format_timestamp(t)), t) << format_timestamp(t);
  }
  EXPECT_EQ(format_timestamp(parse_timestamp("2025-03-01T12:00:00Z")), "2025-03-01T12:00:00.000Z");
  EXPECT_EQ(format_timestamp(parse_timestamp("2025-03-01T12:00:00.000001Z")), "2025-03-01T12:00:00.000001Z");
}

TEST(Time, DayFloor) {
  EXPECT_EQ(day_floor(parse_timestamp("2025-03-01T23:59:59.999Z")), parse_timestamp("2025-03-01T00:00:00Z"));
}

TEST(Rng, SeededSequencesRepeat) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    ASSERT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, BelowStaysInRangeAndHitsEveryValue) {
  Rng rng(5);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++seen[v];
  }
  for (int count : seen) EXPECT_GT(count, 800);
}

TEST(Rng, PoissonAndExponentialMeans) {
  Rng rng(9);
  double sum_p = 0, sum_e = 0, sum_big = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    sum_p += static_cast<double>(rng.poisson(3.0));
    sum_e += rng.exponential(2.0);
    sum_big += static_cast<double>(rng.poisson(800.0));
  }
  EXPECT_NEAR(sum_p / n, 3.0, 0.05);
  EXPECT_NEAR(sum_e / n, 0.5, 0.01);
  EXPECT_NEAR(sum_big / n, 800.0, 1.0);
}

TEST(Rng, MixSeedSeparatesStreams) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(1, 0), mix_seed(1, 0));
}

TEST(ManualClock, MovesOnlyWhenTold) {
  ManualClock clock(parse_timestamp("2025-03-01T00:00:00Z"));
  const auto before = clock.now();
  clock.advance(std::chrono::seconds(3));
  EXPECT_EQ(clock.now() - before, std::chrono::seconds(3));
}

TEST(VirtualScheduler, FiresInTimeThenInsertionOrder) {
  const auto start = parse_timestamp("2025-03-01T00:00:00Z");
  ManualClock clock(start);
  VirtualScheduler sched(clock);
  std::vector<std::string> fired;
  sched.at(start + std::chrono::seconds(2), [&](Timestamp) { fired.push_back("b"); });
  sched.at(start + std::chrono::seconds(1), [&](Timestamp t) {
    fired.push_back("a");
    EXPECT_EQ(clock.now(), t);
    sched.at(t + std::chrono::seconds(1), [&](Timestamp) { fired.push_back("c"); });
  });
  sched.at(start + std::chrono::seconds(9), [&](Timestamp) { fired.push_back("late"); });
  sched.run_until(start + std::chrono::seconds(5));
  EXPECT_EQ(fired, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(clock.now(), start + std::chrono::seconds(5));
  EXPECT_EQ(sched.pending(), 1u);
}

TEST(VirtualScheduler, EveryStopsAtUntil) {
  const auto start = parse_timestamp("2025-03-01T00:00:00Z");
  ManualClock clock(start);
  VirtualScheduler sched(clock);
  int n = 0;
  sched.every(std::chrono::minutes(20), start, start + std::chrono::hours(1), [&](Timestamp) { ++n; });
  sched.run_until(start + std::chrono::hours(5));
  EXPECT_EQ(n, 3);
}

TEST(BoundedQueue, BlocksProducersAtCapacity) {
  BoundedQueue<int> q(2);
  ASSERT_TRUE(q.push(1));
  ASSERT_TRUE(q.push(2));
  std::atomic<bool> pushed{false};
  std::jthread producer([&] {
    q.push(3);
    pushed = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_FALSE(pushed.load());
  EXPECT_EQ(q.pop(), 1);
  producer.join();
  EXPECT_TRUE(pushed.load());
  EXPECT_EQ(q.size(), 2u);
}

TEST(BoundedQueue, CloseDrainsThenEnds) {
  BoundedQueue<int> q(4);
  q.push(7);
  q.close();
  EXPECT_FALSE(q.push(8));
  EXPECT_EQ(q.pop(), 7);
  EXPECT_EQ(q.pop(), std::nullopt);
}

TEST(ThreadPool, RunsEverythingAndSurvivesThrowingTasks) {
  ThreadPool pool(3, "test");
  std::atomic<int> done{0};
  for (int i = 0; i < 100; ++i) {
    pool.submit([&, i] {
      if (i % 10 == 0) throw std::runtime_error("boom");
      ++done;
    });
  }
  pool.wait_idle();
  EXPECT_EQ(done.load(), 90);
}

TEST(Jsonl, ReportsLineNumberOfBadRow) {
  std::istringstream in("{\"a\":1}\n\n{oops\n");
  int rows = 0;
  try {
    for_each_jsonl(in, [&](const nlohmann::json&) { ++rows; });
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
  EXPECT_EQ(rows, 1);
}

}  // namespace
}  // namespace paperfeed
