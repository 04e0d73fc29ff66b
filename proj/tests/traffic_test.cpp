#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "antsim/antsim.hpp"
#include "test_support.hpp"

using namespace antsim;

namespace {

struct TrafficRun {
  Topology topo;
  test::HopRouting algo;
  Network net;
  Workload work;

  TrafficRun(const std::string& name, const TrafficSpec& spec, double end, std::uint64_t seed = 1)
      : topo(builtin_topology(name)), net(topo, {}, seed, 0.0, end), work(net, spec, 0.0, end) {
    net.set_routing(&algo);
    net.start();
    work.install(net);
  }
};

double chi_square(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  const double expected = total / static_cast<double>(counts.size());
  double x = 0.0;
  for (double c : counts) x += (c - expected) * (c - expected) / expected;
  return x;
}

}  // namespace

TEST(Traffic, CbrCadence) {
  TrafficSpec spec;
  spec.temporal = Temporal::kFixed;
  spec.stream = StreamShape::kCbr;
  spec.mpia_s = 0.0003;
  spec.fixed_pairs = {{1, 6}};
  TrafficRun r("simplenet", spec, 1.0);
  r.net.run_until(1.0);
  auto s = r.net.metrics().summarize(1.0);
  EXPECT_NEAR(static_cast<double>(s.generated_packets), 1.0 / 0.0003, 1.0);
  EXPECT_DOUBLE_EQ(s.offered_bps, 4096.0 * static_cast<double>(s.generated_packets));
  EXPECT_EQ(r.work.sessions_opened(), 1U);
  EXPECT_EQ(r.net.session(0).src, 0);
  EXPECT_EQ(r.net.session(0).dst, 5);
}

TEST(Traffic, GvbrSizeMean) {
  Rng rng(17);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    auto b = gvbr_packet_bits(rng, 4096.0);
    ASSERT_GT(b, 0);
    sum += static_cast<double>(b);
  }
  EXPECT_NEAR(sum / n, 4096.0, 0.01 * 4096.0);
}

TEST(Traffic, FixedHasNoLaterArrivals) {
  TrafficSpec spec;
  spec.temporal = Temporal::kFixed;
  spec.mpia_s = 0.5;
  TrafficRun r("simplenet", spec, 50.0);
  EXPECT_EQ(r.work.sessions_opened(), 56U);  // every ordered pair
  r.net.run_until(50.0);
  EXPECT_EQ(r.work.sessions_opened(), 56U);
}

TEST(Traffic, UniformPoissonIsExchangeable) {
  TrafficSpec spec;
  spec.msia_s = 2.4;
  spec.mpia_s = 5.0;  // few packets; the session process is what is under test
  const double end = 4000.0;
  TrafficRun r("nsfnet", spec, end, 23);
  r.net.run_until(end);
  std::vector<double> per_src(14, 0.0);
  std::vector<double> dst_of_first(14, 0.0);
  for (std::size_t i = 0; i < r.net.session_count(); ++i) {
    const auto& s = r.net.session(static_cast<int>(i));
    per_src[static_cast<std::size_t>(s.src)] += 1.0;
    if (s.src == 0) dst_of_first[static_cast<std::size_t>(s.dst)] += 1.0;
  }
  EXPECT_EQ(dst_of_first[0], 0.0);
  dst_of_first.erase(dst_of_first.begin());
  // 13 degrees of freedom, 0.1% critical value 34.53; 12 dof 32.91.
  EXPECT_LT(chi_square(per_src), 34.53);
  EXPECT_LT(chi_square(dst_of_first), 32.91);
  const double mean_sessions = static_cast<double>(r.net.session_count()) / 14.0;
  EXPECT_NEAR(mean_sessions, end / 2.4, 0.05 * end / 2.4);
}

TEST(Traffic, RandomSpatialReproducible) {
  TrafficSpec spec;
  spec.spatial = Spatial::kRandom;
  spec.msia_s = 2.0;
  TrafficRun a("nsfnet", spec, 10.0, 5);
  TrafficRun b("nsfnet", spec, 10.0, 5);
  TrafficRun c("nsfnet", spec, 10.0, 6);
  EXPECT_EQ(a.work.node_msia(), b.work.node_msia());
  EXPECT_NE(a.work.node_msia(), c.work.node_msia());
  std::set<double> distinct(a.work.node_msia().begin(), a.work.node_msia().end());
  EXPECT_GT(distinct.size(), 1U);
  for (double m : a.work.node_msia()) {
    EXPECT_GE(m, 1.0);
    EXPECT_LE(m, 3.0);
  }
}

TEST(Traffic, HotSpotSessionCount) {
  TrafficSpec spec;
  spec.msia_s = 1e9;
  spec.hs_count = 4;
  TrafficRun r("nsfnet", spec, 10.0);
  r.net.run_until(0.0);
  EXPECT_EQ(r.work.hot_spot_sessions_opened(), 52U);
  std::set<NodeId> hs(r.work.hot_spots().begin(), r.work.hot_spots().end());
  EXPECT_EQ(hs.size(), 4U);
}

TEST(Traffic, ExplicitHotSpots) {
  TrafficSpec spec;
  spec.msia_s = 1e9;
  spec.hs_count = 2;
  spec.hot_spots = {3, 9};
  TrafficRun r("nsfnet", spec, 1.0);
  EXPECT_EQ(r.work.hot_spots(), (std::vector<NodeId>{2, 8}));
}

TEST(Traffic, HotSpotWindow) {
  TrafficSpec spec;
  spec.temporal = Temporal::kTemporaryHotSpots;
  spec.msia_s = 1e9;
  spec.hs_count = 2;
  spec.mpia_hs_s = 0.5;
  spec.hot_spot_on_s = 400.0;
  spec.hot_spot_off_s = 520.0;
  TrafficRun r("nsfnet", spec, 700.0);
  r.net.run_until(700.0);
  EXPECT_EQ(r.work.hot_spot_sessions_opened(), 26U);
  for (const auto& p : r.net.metrics().windowed_series(5.0)) {
    bool inside = p.t_start_s >= 400.0 && p.t_start_s < 520.0;
    EXPECT_EQ(p.offered_bps > 0.0, inside) << p.t_start_s;
  }
}

TEST(Traffic, ZeroLengthHotSpotWindow) {
  TrafficSpec spec;
  spec.temporal = Temporal::kTemporaryHotSpots;
  spec.msia_s = 1e9;
  spec.hs_count = 2;
  spec.hot_spot_on_s = 400.0;
  spec.hot_spot_off_s = 400.0;
  TrafficRun r("nsfnet", spec, 700.0);
  r.net.run_until(700.0);
  EXPECT_EQ(r.work.hot_spot_sessions_opened(), 0U);
  EXPECT_EQ(r.net.metrics().summarize(1.0).generated_packets, 0U);
}

TEST(Traffic, OfferedLoadIndependentOfRouting) {
  TrafficSpec spec;
  spec.msia_s = 1.0;
  Topology topo = builtin_topology("nsfnet");
  auto offered = [&](RoutingAlgorithm& algo) {
    Network net(topo, {}, 77, 0.0, 100.0);
    net.set_routing(&algo);
    net.start();
    Workload w(net, spec, 0.0, 100.0);
    w.install(net);
    net.run_until(100.0);
    std::vector<double> out;
    for (const auto& p : net.metrics().windowed_series(5.0)) out.push_back(p.offered_bps);
    return out;
  };
  test::HopRouting hop;
  test::RandomRouting rnd;
  AntNetRouting ant;
  auto a = offered(hop);
  EXPECT_EQ(a, offered(rnd));
  EXPECT_EQ(a, offered(ant));
}

TEST(Traffic, Validation) {
  TrafficSpec s;
  s.msia_s = 0.0;
  EXPECT_THROW(s.validate(14), std::invalid_argument);
  s = TrafficSpec{};
  s.hs_count = 14;
  EXPECT_THROW(s.validate(14), std::invalid_argument);
  s = TrafficSpec{};
  s.temporal = Temporal::kTemporaryHotSpots;
  EXPECT_THROW(s.validate(14), std::invalid_argument);
  s.hs_count = 2;
  s.hot_spot_on_s = 10.0;
  s.hot_spot_off_s = 5.0;
  EXPECT_THROW(s.validate(14), std::invalid_argument);
  s = TrafficSpec{};
  s.fixed_pairs = {{1, 1}};
  EXPECT_THROW(s.validate(14), std::invalid_argument);
}
