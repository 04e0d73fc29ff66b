#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "antsim/topology.hpp"

using antsim::LinkSpec;
using antsim::Topology;
using antsim::TopologyError;

namespace {

// Floyd-Warshall over unit weights: an oracle independent of the BFS in topology_stats.
std::pair<double, double> hop_moments(const Topology& t) {
  const int n = t.node_count();
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), inf));
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
  for (const auto& l : t.links()) d[static_cast<std::size_t>(l.from)][static_cast<std::size_t>(l.to)] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        auto& x = d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        x = std::min(x, d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                            d[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
      }
  double s = 0, s2 = 0, c = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        double h = d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        s += h;
        s2 += h * h;
        ++c;
      }
  double mean = s / c;
  return {mean, std::sqrt(s2 / c - mean * mean)};
}

}  // namespace

TEST(Topology, SimpleNetShape) {
  Topology t = antsim::builtin_topology("simplenet");
  EXPECT_EQ(t.node_count(), 8);
  EXPECT_EQ(t.links().size(), 18U);
  for (const auto& l : t.links()) {
    EXPECT_DOUBLE_EQ(l.bandwidth_bps, 10e6);
    EXPECT_DOUBLE_EQ(l.prop_delay_s, 0.001);
  }
}

TEST(Topology, NsfNetShape) {
  Topology t = antsim::builtin_topology("nsfnet");
  EXPECT_EQ(t.node_count(), 14);
  EXPECT_EQ(t.links().size(), 42U);
  for (const auto& l : t.links()) {
    EXPECT_DOUBLE_EQ(l.bandwidth_bps, 1.5e6);
    EXPECT_GE(l.prop_delay_s, 0.004);
    EXPECT_LE(l.prop_delay_s, 0.020);
  }
}

TEST(Topology, NttNetShape) {
  Topology t = antsim::builtin_topology("nttnet");
  EXPECT_EQ(t.node_count(), 57);
  EXPECT_EQ(t.links().size(), 162U);
  for (const auto& l : t.links()) {
    EXPECT_DOUBLE_EQ(l.bandwidth_bps, 6e6);
    EXPECT_GE(l.prop_delay_s, 0.001);
    EXPECT_LE(l.prop_delay_s, 0.005);
  }
}

TEST(Topology, LinksAreMirrored) {
  for (const char* name : {"simplenet", "nsfnet", "nttnet"}) {
    Topology t = antsim::builtin_topology(name);
    EXPECT_TRUE(t.is_connected()) << name;
    for (std::size_t i = 0; i < t.links().size(); ++i) {
      const auto& l = t.links()[i];
      const auto& r = t.link(l.reverse);
      EXPECT_EQ(r.from, l.to);
      EXPECT_EQ(r.to, l.from);
      EXPECT_EQ(static_cast<std::size_t>(r.reverse), i);
      EXPECT_DOUBLE_EQ(r.bandwidth_bps, l.bandwidth_bps);
    }
  }
}

TEST(Topology, OutLinksSortedByNeighbour) {
  Topology t = antsim::builtin_topology("nsfnet");
  for (int n = 0; n < t.node_count(); ++n) {
    auto ls = t.out_links(n);
    for (std::size_t i = 1; i < ls.size(); ++i) EXPECT_LT(t.link(ls[i - 1]).to, t.link(ls[i]).to);
  }
}

TEST(TopologyStats, SimpleNet) {
  Topology t = antsim::builtin_topology("simplenet");
  auto s = antsim::topology_stats(t);
  auto [mean, sd] = hop_moments(t);
  EXPECT_NEAR(s.mean_hops, mean, 1e-12);
  EXPECT_NEAR(s.stddev_hops, sd, 1e-12);
  EXPECT_NEAR(s.mean_hops, 1.93, 0.05);
  EXPECT_NEAR(s.stddev_hops, 0.75, 0.01);
  EXPECT_EQ(s.node_count, 8);
}

TEST(TopologyStats, CompleteGraph) {
  std::vector<LinkSpec> specs;
  for (int a = 1; a <= 4; ++a)
    for (int b = a + 1; b <= 4; ++b) specs.push_back({a, b, 1e6, 0.001});
  auto s = antsim::topology_stats(Topology("k4", 4, specs));
  EXPECT_DOUBLE_EQ(s.mean_hops, 1.0);
  EXPECT_DOUBLE_EQ(s.stddev_hops, 0.0);
}

TEST(TopologyStats, PathGraph) {
  auto s = antsim::topology_stats(Topology("p3", 3, {{1, 2, 1e6, 0.0}, {2, 3, 1e6, 0.0}}));
  EXPECT_NEAR(s.mean_hops, 4.0 / 3.0, 1e-12);
}

TEST(TopologyStats, NttMoreImbalancedThanNsf) {
  auto nsf = antsim::topology_stats(antsim::builtin_topology("nsfnet"));
  auto ntt = antsim::topology_stats(antsim::builtin_topology("nttnet"));
  EXPECT_GT(ntt.stddev_hops / ntt.mean_hops, nsf.stddev_hops / nsf.mean_hops);
  EXPECT_EQ(nsf.node_count, 14);
  EXPECT_EQ(ntt.node_count, 57);
}

TEST(Topology, DataFilesMatchBuiltins) {
  for (std::string name : {"simplenet", "nsfnet", "nttnet"}) {
    Topology file = antsim::load_topology_file(std::string(ANTSIM_DATA_DIR) + "/topologies/" + name + ".json");
    Topology builtin = antsim::builtin_topology(name);
    ASSERT_EQ(file.node_count(), builtin.node_count()) << name;
    auto a = file.undirected_specs();
    auto b = builtin.undirected_specs();
    ASSERT_EQ(a.size(), b.size()) << name;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].a, b[i].a);
      EXPECT_EQ(a[i].b, b[i].b);
      EXPECT_DOUBLE_EQ(a[i].bandwidth_bps, b[i].bandwidth_bps);
      EXPECT_DOUBLE_EQ(a[i].prop_delay_s, b[i].prop_delay_s);
    }
  }
}

TEST(Topology, JsonRoundTrip) {
  Topology t = antsim::builtin_topology("nsfnet");
  Topology u = antsim::parse_topology(antsim::topology_to_json(t));
  EXPECT_EQ(u.links().size(), t.links().size());
  EXPECT_EQ(u.name(), "nsfnet");
}

TEST(Topology, RejectsBadInput) {
  EXPECT_THROW(Topology("x", 3, {{1, 2, 1e6, 0.0}}), TopologyError);  // node 3 isolated
  EXPECT_THROW(Topology("x", 2, {{1, 3, 1e6, 0.0}}), TopologyError);
  EXPECT_THROW(Topology("x", 2, {{1, 1, 1e6, 0.0}}), TopologyError);
  EXPECT_THROW(Topology("x", 2, {{1, 2, 1e6, 0.0}, {2, 1, 1e6, 0.0}}), TopologyError);
  EXPECT_THROW(Topology("x", 2, {{1, 2, 0.0, 0.0}}), TopologyError);
  EXPECT_THROW(antsim::builtin_topology("arpanet"), TopologyError);
  EXPECT_THROW(antsim::parse_topology(nlohmann::json{{"nodes", 2}}), TopologyError);
  EXPECT_THROW(antsim::load_topology_file("/nonexistent.json"), TopologyError);
}
