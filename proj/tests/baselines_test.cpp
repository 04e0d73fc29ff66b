#include <gtest/gtest.h>

#include <vector>

#include "antsim/antsim.hpp"
#include "test_support.hpp"

using namespace antsim;

namespace {

struct Rig {
  Topology topo;
  std::unique_ptr<RoutingAlgorithm> algo;
  Network net;
  std::unique_ptr<Workload> work;

  Rig(const std::string& name, std::unique_ptr<RoutingAlgorithm> a, double end, std::uint64_t seed = 1)
      : topo(builtin_topology(name)), algo(std::move(a)), net(topo, {}, seed, 0.0, end) {
    net.set_routing(algo.get());
    net.start();
  }

  void traffic(const TrafficSpec& spec, double start, double end) {
    work = std::make_unique<Workload>(net, spec, start, end);
    work->install(net);
  }
};

TrafficSpec busy_simplenet() {
  TrafficSpec s;
  s.temporal = Temporal::kFixed;
  s.stream = StreamShape::kCbr;
  s.fixed_pairs = {{1, 6}, {2, 7}, {8, 4}};
  s.mpia_s = 0.0005;
  return s;
}

NodeId next_node(const Topology& t, LinkId l) { return t.link(l).to; }

// Follows first links from src to dst and returns the node sequence.
template <class NextLink>
std::vector<NodeId> follow(const Topology& t, NodeId src, NodeId dst, NextLink next) {
  std::vector<NodeId> path{src};
  while (path.back() != dst && path.size() <= static_cast<std::size_t>(t.node_count())) {
    LinkId l = next(path.back(), dst);
    if (l == kNoLink) break;
    path.push_back(next_node(t, l));
  }
  return path;
}

}  // namespace

TEST(Ospf, LinkCost) {
  Link l{0, 1, 1.5e6, 0.004, 1};
  EXPECT_NEAR(ospf_link_cost(l), 0.004 + 4096.0 / 1.5e6, 1e-15);
  EXPECT_NEAR(ospf_link_cost(l), 0.00673067, 1e-8);
}

TEST(Ospf, SimpleNetRouteAndInvariance) {
  LinkStateParams p{false, 30.0, 0.006, {}};
  auto* ls = new LinkStateRouting(p);
  Rig r("simplenet", std::unique_ptr<RoutingAlgorithm>(ls), 300.0);
  std::vector<std::vector<LinkId>> before;
  for (NodeId k = 0; k < 8; ++k) {
    before.emplace_back();
    for (NodeId d = 0; d < 8; ++d) before.back().push_back(ls->next_link(k, d));
  }
  EXPECT_EQ(follow(r.topo, 0, 5, [&](NodeId k, NodeId d) { return ls->next_link(k, d); }),
            (std::vector<NodeId>{0, 2, 4, 5}));
  r.traffic(busy_simplenet(), 0.0, 300.0);
  r.net.run_until(300.0);
  for (NodeId k = 0; k < 8; ++k)
    for (NodeId d = 0; d < 8; ++d) EXPECT_EQ(ls->next_link(k, d), before[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)]);
}

TEST(LinkState, AdvertSize) {
  EXPECT_EQ(lsa_size_bits(3), 88 * 8);
  EXPECT_EQ(distance_vector_size_bits(14), 192 * 8);
}

TEST(Spf, IdleConvergesToMinimumHop) {
  LinkStateParams p{true, 0.8, 0.006, {}};
  auto* ls = new LinkStateRouting(p);
  Rig r("simplenet", std::unique_ptr<RoutingAlgorithm>(ls), 100.0);
  r.net.run_until(100.0);
  for (NodeId k = 0; k < 8; ++k) {
    auto path = follow(r.topo, k, 5, [&](NodeId a, NodeId d) { return ls->next_link(a, d); });
    EXPECT_EQ(static_cast<int>(path.size()) - 1, r.topo.hop_distances(k)[5]) << k;
    for (double c : ls->database(k)) EXPECT_DOUBLE_EQ(c, 1.0);
  }
}

TEST(Spf, OriginatesOneAdvertPerInterval) {
  LinkStateParams p{true, 0.8, 0.006, {}};
  auto* ls = new LinkStateRouting(p);
  Rig r("simplenet", std::unique_ptr<RoutingAlgorithm>(ls), 1000.0);
  r.net.run_until(1000.0);
  // A flood of one advertisement sends deg(origin) + sum over others of
  // (deg - 1) copies; every node floods 1250 times in 1000 s.
  std::int64_t sum_deg = 0;
  for (NodeId n = 0; n < 8; ++n) sum_deg += r.topo.degree(n);
  std::int64_t expected = 0;
  for (NodeId o = 0; o < 8; ++o) expected += 1250 * (sum_deg - 7);
  const auto created = r.net.counters().created[static_cast<std::size_t>(PacketKind::kRoutingInfo)];
  // The last flood of each node may still be in progress at t=1000.
  EXPECT_LE(created, expected);
  EXPECT_GE(created, expected - 8 * (sum_deg - 7));
}

TEST(Spf, CostsMoveUnderLoad) {
  LinkStateParams p{true, 3.0, 0.006, {}};
  auto* ls = new LinkStateRouting(p);
  Rig r("simplenet", std::unique_ptr<RoutingAlgorithm>(ls), 200.0);
  TrafficSpec saturating = busy_simplenet();
  saturating.fixed_pairs = {{1, 6}};
  saturating.mpia_s = 0.0003;  // 13.6 Mbit/s into 10 Mbit/s links
  r.traffic(saturating, 0.0, 200.0);
  r.net.run_until(200.0);
  int max_cost = 0;
  for (LinkId l = 0; l < static_cast<LinkId>(r.topo.links().size()); ++l) max_cost = std::max(max_cost, ls->estimator(l).cost());
  EXPECT_GT(max_cost, 1);
  EXPECT_LE(max_cost, 20);
}

TEST(Bf, IdleConvergesToHopCounts) {
  auto* bf = new DistanceVectorRouting(DistanceVectorParams{});
  Rig r("nsfnet", std::unique_ptr<RoutingAlgorithm>(bf), 100.0);
  EXPECT_DOUBLE_EQ(bf->elaboration_time_s(), 0.002);
  r.net.run_until(100.0);
  for (NodeId k = 0; k < 14; ++k) {
    auto hops = r.topo.hop_distances(k);
    for (NodeId d = 0; d < 14; ++d) EXPECT_DOUBLE_EQ(bf->table(k).distance(d), hops[static_cast<std::size_t>(d)]);
  }
  auto* bf2 = new DistanceVectorRouting(DistanceVectorParams{});
  Rig s("simplenet", std::unique_ptr<RoutingAlgorithm>(bf2), 100.0);
  s.net.run_until(100.0);
  EXPECT_EQ(follow(s.topo, 0, 5, [&](NodeId a, NodeId d) { return bf2->table(a).next_link(d); }),
            (std::vector<NodeId>{0, 2, 4, 5}));
}

TEST(Bf, VectorPacketsCarrySize) {
  auto* bf = new DistanceVectorRouting(DistanceVectorParams{});
  Rig r("nsfnet", std::unique_ptr<RoutingAlgorithm>(bf), 10.0);
  r.net.run_until(10.0);
  const double bits = r.net.metrics().routing_bits();
  EXPECT_GT(bits, 0.0);
  EXPECT_DOUBLE_EQ(std::fmod(bits, 192.0 * 8.0), 0.0);
}

TEST(QRouting, UpdateExample) {
  QRoutingParams p;
  QEntry e{3.0, 3.0, 0.0, 0.0};
  q_update(e, 2.0 + 0.5, 1.0, p);
  EXPECT_DOUBLE_EQ(e.q, 2.75);
  QEntry f{2.5, 2.5, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(q_update(f, 2.5, 1.0, p), 0.0);
  EXPECT_DOUBLE_EQ(f.q, 2.5);
}

TEST(QRouting, FeedbackAtDestinationIsHopTime) {
  auto* qr = new QRouting(QRoutingParams{});
  Rig r("simplenet", std::unique_ptr<RoutingAlgorithm>(qr), 10.0);
  EXPECT_DOUBLE_EQ(qr->elaboration_time_s(), 0.003);
  const int slot = r.topo.neighbor_slot(0, 1);
  const double q0 = qr->q(r.topo, 0, 1, slot).q;
  int s = r.net.open_session(0, 1);
  r.net.session_generate(s, 4096);
  r.net.run_until(1.0);
  // One hop 1->2: feedback from the destination carries t_P alone.
  const double hop = 0.0003 + 4096.0 / 10e6 + 0.001;
  EXPECT_NEAR(qr->q(r.topo, 0, 1, slot).q, q0 + 0.5 * (hop - q0), 1e-12);
  EXPECT_EQ(r.net.counters().created[static_cast<std::size_t>(PacketKind::kRoutingInfo)], 1);
  EXPECT_DOUBLE_EQ(r.net.metrics().routing_bits(), 96.0);
}

TEST(QRouting, InitialRouteIsShortest) {
  auto* qr = new QRouting(QRoutingParams{});
  Rig r("simplenet", std::unique_ptr<RoutingAlgorithm>(qr), 10.0);
  for (NodeId k = 0; k < 8; ++k) EXPECT_GE(qr->min_q(r.topo, k, 5), 0.0);
  // Node 1 to node 6: the two 3-hop neighbours tie below the 4-hop one.
  EXPECT_LT(qr->q(r.topo, 0, 5, r.topo.neighbor_slot(0, 2)).q, qr->q(r.topo, 0, 5, r.topo.neighbor_slot(0, 1)).q);
}

TEST(PredictiveQ, ZeroRateReducesToArgmin) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    std::vector<QEntry> row(4);
    for (auto& e : row) {
      e.q = rng.uniform(0.0, 1.0);
      e.best = e.q * rng.uniform(0.0, 1.0);
      e.rate = 0.0;
      e.updated_at = rng.uniform(0.0, 10.0);
    }
    EXPECT_EQ(q_argmin(row, true, 20.0), q_argmin(row, false, 20.0));
  }
}

TEST(PredictiveQ, IdleLinkGetsProbed) {
  std::vector<QEntry> row{{1.0, 0.2, -0.1, 0.0}, {0.9, 0.9, 0.0, 0.0}};
  EXPECT_EQ(q_argmin(row, true, 0.0), 1U);
  EXPECT_NEAR(predicted_q(row[0], 5.0), 0.5, 1e-12);
  EXPECT_EQ(q_argmin(row, true, 5.0), 0U);
  EXPECT_DOUBLE_EQ(predicted_q(row[0], 100.0), 0.2);  // never below the best seen
  EXPECT_EQ(q_argmin(row, false, 5.0), 1U);
}

TEST(PredictiveQ, RateLearning) {
  QRoutingParams p;
  p.predictive = true;
  QEntry e{1.0, 1.0, 0.0, 0.0};
  q_update(e, 0.6, 2.0, p);  // dq = -0.2 over 2 s
  EXPECT_DOUBLE_EQ(e.q, 0.8);
  EXPECT_DOUBLE_EQ(e.best, 0.8);
  EXPECT_NEAR(e.rate, 0.7 * -0.2 / 2.0, 1e-15);
  q_update(e, 1.0, 3.0, p);  // worse: rate decays
  EXPECT_NEAR(e.rate, 0.9 * 0.7 * -0.2 / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(e.best, 0.8);
}

TEST(Daemon, LinkCost) {
  EXPECT_NEAR(daemon_link_cost(0.001, 1.5e6, 4096, 8192, 4096, 0.4), 0.0080997, 1e-7);
  EXPECT_NEAR(daemon_link_cost(0.001, 1.5e6, 4096, 8192, 4096, 0.4),
              0.001 + 4096 / 1.5e6 + 0.6 * 8192 / 1.5e6 + 0.4 * 4096 / 1.5e6, 1e-15);
  EXPECT_DOUBLE_EQ(daemon_link_cost(0.001, 1.5e6, 4096, 0, 0), 0.001 + 4096 / 1.5e6);
}

TEST(Daemon, NoRoutingTraffic) {
  Rig r("simplenet", std::make_unique<DaemonRouting>(), 50.0);
  r.traffic(busy_simplenet(), 0.0, 50.0);
  r.net.run_until(50.0);
  auto s = r.net.metrics().summarize(r.topo.total_bandwidth_bps());
  EXPECT_EQ(s.overhead, 0.0);
  EXPECT_GT(s.delivered_packets, 0U);
}

TEST(Baselines, IdleRoutesAgree) {
  auto* ospf = new LinkStateRouting(LinkStateParams{false, 30.0, 0.006, {}});
  auto* spf = new LinkStateRouting(LinkStateParams{true, 3.0, 0.006, {}});
  auto* bf = new DistanceVectorRouting(DistanceVectorParams{});
  Rig a("simplenet", std::unique_ptr<RoutingAlgorithm>(ospf), 100.0);
  Rig b("simplenet", std::unique_ptr<RoutingAlgorithm>(spf), 100.0);
  Rig c("simplenet", std::unique_ptr<RoutingAlgorithm>(bf), 100.0);
  a.net.run_until(100.0);
  b.net.run_until(100.0);
  c.net.run_until(100.0);
  for (NodeId k = 0; k < 8; ++k)
    for (NodeId d = 0; d < 8; ++d) {
      EXPECT_EQ(ospf->next_link(k, d), spf->next_link(k, d));
      EXPECT_EQ(ospf->next_link(k, d), bf->table(k).next_link(d));
    }
}
