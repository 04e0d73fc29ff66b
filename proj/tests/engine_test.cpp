#include <gtest/gtest.h>

#include <vector>

#include "antsim/engine.hpp"

using antsim::EventQueue;
using antsim::Rng;
using antsim::RngStreams;
using antsim::Stream;

TEST(EventQueue, PopsInTimeOrder) {
  EventQueue<int> q;
  q.schedule(3.0, 3);
  q.schedule(1.0, 1);
  q.schedule(2.0, 2);
  std::vector<int> order;
  q.run_until(10.0, [&](double, int v) { order.push_back(v); });
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(q.now(), 10.0);
}

TEST(EventQueue, EqualTimesAreFifo) {
  EventQueue<int> q;
  for (int i = 0; i < 100; ++i) q.schedule(5.0, i);
  std::vector<int> order;
  q.run_until(5.0, [&](double, int v) { order.push_back(v); });
  for (int i = 0; i < 100; ++i) EXPECT_EQ(order[static_cast<std::size_t>(i)], i);
}

TEST(EventQueue, RejectsPastEvents) {
  EventQueue<int> q;
  q.schedule(2.0, 0);
  q.run_until(2.0, [](double, int) {});
  EXPECT_THROW(q.schedule(1.0, 1), antsim::SchedulingError);
  EXPECT_NO_THROW(q.schedule(2.0, 1));
}

TEST(EventQueue, RunUntilStopsAtBoundary) {
  EventQueue<int> q;
  q.schedule(1.0, 1);
  q.schedule(2.0, 2);
  q.schedule(3.0, 3);
  std::size_t n = q.run_until(2.5, [](double, int) {});
  EXPECT_EQ(n, 2U);
  EXPECT_DOUBLE_EQ(q.now(), 2.5);
  EXPECT_EQ(q.size(), 1U);
}

TEST(EventQueue, EmptyQueueAdvancesClock) {
  EventQueue<int> q;
  EXPECT_EQ(q.run_until(10.0, [](double, int) {}), 0U);
  EXPECT_DOUBLE_EQ(q.now(), 10.0);
}

TEST(EventQueue, HandlerMaySchedule) {
  EventQueue<int> q;
  q.schedule(0.0, 0);
  int fired = 0;
  q.run_until(1.0, [&](double t, int v) {
    ++fired;
    if (v < 9) q.schedule(t + 0.1, v + 1);
  });
  EXPECT_EQ(fired, 10);
}

TEST(Rng, ExponentialMean) {
  Rng rng(42);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = antsim::sample_exponential(rng, 2.0);
    ASSERT_GT(x, 0.0);
    sum += x;
  }
  EXPECT_NEAR(sum / n, 2.0, 0.02);
}

TEST(Rng, ExponentialRejectsBadMean) {
  Rng rng(1);
  EXPECT_THROW(antsim::sample_exponential(rng, 0.0), std::invalid_argument);
  EXPECT_THROW(antsim::sample_exponential(rng, -1.0), std::invalid_argument);
}

TEST(Rng, StreamsReplay) {
  RngStreams a(7);
  RngStreams b(7);
  Rng x = a.make(Stream::kPacketSize, 3);
  Rng y = b.make(Stream::kPacketSize, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(x.next_u64(), y.next_u64());
}

TEST(Rng, StreamsAreDistinct) {
  RngStreams s(7);
  EXPECT_NE(s.make(Stream::kPacketSize).next_u64(), s.make(Stream::kPacketGap).next_u64());
  EXPECT_NE(s.make(Stream::kPacketSize, 0).next_u64(), s.make(Stream::kPacketSize, 1).next_u64());
  EXPECT_NE(RngStreams(1).make(Stream::kPacketSize).next_u64(), RngStreams(2).make(Stream::kPacketSize).next_u64());
}

TEST(Rng, UniformOpenInterval) {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    double u = rng.uniform_open();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, SampleDiscrete) {
  Rng rng(5);
  std::vector<double> w{1.0, 0.0, 3.0};
  std::vector<int> counts(3);
  for (int i = 0; i < 100000; ++i) ++counts[antsim::sample_discrete(rng, w)];
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[2] / 100000.0, 0.75, 0.01);
  std::vector<double> zero{0.0, 0.0};
  EXPECT_EQ(antsim::sample_discrete(rng, zero), 2U);
}
