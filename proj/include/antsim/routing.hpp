#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "packet.hpp"
#include "topology.hpp"

namespace antsim {

class Network;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Callbacks every routing protocol implements. The network owns packets and
/// queues; protocols decide where packets go and react to routing traffic.
class RoutingAlgorithm {
 public:
  virtual ~RoutingAlgorithm() = default;

  virtual std::string_view name() const = 0;

  /// Called once at t=0, before any event runs.
  virtual void start(Network& net) = 0;

  /// Outgoing link for a data packet held by `node`, or kNoLink.
  virtual LinkId select_next_hop(Network& net, NodeId node, PacketId pid) = 0;

  /// A routing packet finished its elaboration delay at `node`. The protocol
  /// must forward, consume or kill it.
  virtual void on_routing_packet(Network& net, NodeId node, PacketId pid) = 0;

  virtual void on_timer(Network& /*net*/, NodeId /*node*/, int /*tag*/) {}

  /// A session released a data packet into the network.
  virtual void on_data_generated(NodeId /*src*/, NodeId /*dst*/, std::int64_t /*bits*/) {}

  /// A data packet arrived over a link (before delivery or forwarding).
  virtual void on_data_arrival(Network& /*net*/, NodeId /*node*/, PacketId /*pid*/) {}

  /// A packet's last bit left `link`; `delay_s` is queueing plus transmission.
  virtual void on_link_transmitted(LinkId /*link*/, double /*delay_s*/, double /*tx_s*/) {}

  virtual void on_warmup_end(Network& /*net*/) {}

  /// Processing delay applied to routing packets at every node they reach.
  virtual double elaboration_time_s() const { return 0.0; }
};

// ---------------------------------------------------------------------------
// Shortest paths

struct ShortestPaths {
  std::vector<double> dist;
  std::vector<LinkId> first_link;  // kNoLink for the source and unreachable nodes
};

/// Single-source Dijkstra over per-link costs. Among equal-cost paths the one
/// whose first hop has the smallest neighbour id wins.
inline ShortestPaths dijkstra(const Topology& topo, std::span<const double> link_costs, NodeId src) {
  const auto n = static_cast<std::size_t>(topo.node_count());
  if (link_costs.size() != topo.links().size()) {
    throw std::invalid_argument("dijkstra: one cost per directed link required");
  }
  for (double c : link_costs) {
    if (!(c > 0.0)) throw std::invalid_argument("dijkstra: link costs must be positive");
  }
  ShortestPaths sp{std::vector<double>(n, kInfinity), std::vector<LinkId>(n, kNoLink)};
  std::vector<char> done(n, 0);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  sp.dist[static_cast<std::size_t>(src)] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    auto ui = static_cast<std::size_t>(u);
    if (done[ui]) continue;
    done[ui] = 1;
    for (LinkId l : topo.out_links(u)) {
      const Link& lk = topo.link(l);
      auto vi = static_cast<std::size_t>(lk.to);
      if (done[vi]) continue;
      double nd = d + link_costs[static_cast<std::size_t>(l)];
      LinkId fh = (u == src) ? l : sp.first_link[ui];
      bool better = nd < sp.dist[vi];
      bool tie_smaller = nd == sp.dist[vi] && sp.first_link[vi] != kNoLink &&
                         topo.link(fh).to < topo.link(sp.first_link[vi]).to;
      if (better || tie_smaller) {
        if (better) pq.push({nd, lk.to});
        sp.dist[vi] = nd;
        sp.first_link[vi] = fh;
      }
    }
  }
  return sp;
}

/// All-pairs next-hop table: next[src][dst] is the first link, kNoLink on the diagonal.
inline std::vector<std::vector<LinkId>> all_pairs_next_links(const Topology& topo,
                                                             std::span<const double> link_costs) {
  std::vector<std::vector<LinkId>> next;
  for (NodeId s = 0; s < topo.node_count(); ++s) next.push_back(dijkstra(topo, link_costs, s).first_link);
  return next;
}

// ---------------------------------------------------------------------------
// Distance vector

/// Distance-vector state of one node: the last vector heard from each
/// neighbour and the resulting distance/next-hop per destination.
class DistanceVectorTable {
 public:
  DistanceVectorTable(const Topology& topo, NodeId self)
      : topo_(&topo), self_(self),
        neighbor_vectors_(topo.out_links(self).size(),
                          std::vector<double>(static_cast<std::size_t>(topo.node_count()), kInfinity)),
        dist_(static_cast<std::size_t>(topo.node_count()), kInfinity),
        next_(static_cast<std::size_t>(topo.node_count()), kNoLink) {
    dist_[static_cast<std::size_t>(self)] = 0.0;
  }

  NodeId self() const { return self_; }

  /// Overwrites the stored vector of `neighbor` with the received values.
  void store(NodeId neighbor, std::span<const double> vector) {
    int slot = topo_->neighbor_slot(self_, neighbor);
    if (slot < 0) throw std::invalid_argument("distance vector from a non-neighbour");
    auto& v = neighbor_vectors_[static_cast<std::size_t>(slot)];
    std::copy(vector.begin(), vector.end(), v.begin());
  }

  /// Re-derives every entry as arg min over neighbours j of (d_ij + D_j).
  /// Returns true when any distance or next hop changed.
  bool recompute(std::span<const double> link_costs) {
    bool changed = false;
    auto out = topo_->out_links(self_);
    for (NodeId d = 0; d < topo_->node_count(); ++d) {
      auto di = static_cast<std::size_t>(d);
      if (d == self_) continue;
      double best = kInfinity;
      LinkId best_link = kNoLink;
      for (std::size_t s = 0; s < out.size(); ++s) {
        double via = neighbor_vectors_[s][di];
        if (!std::isfinite(via)) continue;
        double c = link_costs[static_cast<std::size_t>(out[s])] + via;
        if (c < best) {  // out-links are sorted by neighbour id, so ties keep the smaller id
          best = c;
          best_link = out[s];
        }
      }
      if (best != dist_[di] || best_link != next_[di]) changed = true;
      dist_[di] = best;
      next_[di] = best_link;
    }
    return changed;
  }

  /// Stores a neighbour's vector and recomputes (the receive-side rule).
  bool merge(NodeId neighbor, std::span<const double> vector, std::span<const double> link_costs) {
    store(neighbor, vector);
    return recompute(link_costs);
  }

  const std::vector<double>& distances() const { return dist_; }
  double distance(NodeId d) const { return dist_[static_cast<std::size_t>(d)]; }
  LinkId next_link(NodeId d) const { return next_[static_cast<std::size_t>(d)]; }

 private:
  const Topology* topo_;
  NodeId self_;
  std::vector<std::vector<double>> neighbor_vectors_;
  std::vector<double> dist_;
  std::vector<LinkId> next_;
};

/// Synchronous-round distributed Bellman-Ford: every round each node sends
/// its vector to all neighbours, then all nodes merge. Stops at a fixed point.
struct BellmanFordRun {
  std::vector<DistanceVectorTable> tables;
  int rounds = 0;
  bool converged = false;
};

inline BellmanFordRun distributed_bellman_ford(const Topology& topo, std::span<const double> link_costs,
                                               int max_rounds = 1000) {
  BellmanFordRun run;
  for (NodeId n = 0; n < topo.node_count(); ++n) run.tables.emplace_back(topo, n);
  for (auto& t : run.tables) t.recompute(link_costs);
  while (run.rounds < max_rounds) {
    ++run.rounds;
    std::vector<std::vector<double>> sent;
    for (const auto& t : run.tables) sent.push_back(t.distances());
    bool changed = false;
    for (NodeId n = 0; n < topo.node_count(); ++n) {
      auto& t = run.tables[static_cast<std::size_t>(n)];
      for (LinkId l : topo.out_links(n)) t.store(topo.link(l).to, sent[static_cast<std::size_t>(topo.link(l).to)]);
      changed |= t.recompute(link_costs);
    }
    if (!changed) {
      run.converged = true;
      break;
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Flooding

/// Duplicate suppression: an advertisement is new only if its sequence number
/// exceeds the last one seen from the same origin.
class FloodFilter {
 public:
  explicit FloodFilter(int node_count) : last_(static_cast<std::size_t>(node_count), 0) {}

  bool accept(NodeId origin, std::uint64_t seq) {
    auto& last = last_[static_cast<std::size_t>(origin)];
    if (seq <= last) return false;
    last = seq;
    return true;
  }

  std::uint64_t last_seen(NodeId origin) const { return last_[static_cast<std::size_t>(origin)]; }

 private:
  std::vector<std::uint64_t> last_;
};

struct FloodTrace {
  std::vector<int> accepted;  // first-time receptions per node (origin counts its own)
  int transmissions = 0;
  int duplicates = 0;
};

/// Runs one advertisement through the forwarding rule used by the link-state
/// protocols: forward a first-seen advertisement on every link except the one
/// it arrived on.
inline FloodTrace simulate_flood(const Topology& topo, NodeId origin, std::uint64_t seq,
                                 std::vector<FloodFilter>& filters) {
  FloodTrace trace;
  trace.accepted.assign(static_cast<std::size_t>(topo.node_count()), 0);
  std::deque<std::pair<NodeId, LinkId>> inbox;  // (node, arrival link)
  auto forward = [&](NodeId at, LinkId arrived) {
    for (LinkId l : topo.out_links(at)) {
      if (arrived != kNoLink && l == topo.link(arrived).reverse) continue;
      ++trace.transmissions;
      inbox.emplace_back(topo.link(l).to, l);
    }
  };
  if (filters[static_cast<std::size_t>(origin)].accept(origin, seq)) {
    ++trace.accepted[static_cast<std::size_t>(origin)];
    forward(origin, kNoLink);
  }
  while (!inbox.empty()) {
    auto [node, via] = inbox.front();
    inbox.pop_front();
    if (filters[static_cast<std::size_t>(node)].accept(origin, seq)) {
      ++trace.accepted[static_cast<std::size_t>(node)];
      forward(node, via);
    } else {
      ++trace.duplicates;
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Adaptive link cost (hop-normalized delay)

struct LinkCostParams {
  double exp_decay = 0.9;       // weight of the previous exponential mean
  double window_weight = 0.5;   // weight of the window mean in the blend
  double slope = 20.0;
  int min_cost = 1;
  int max_cost = 20;
  int max_step = 1;
};

/// M/M/1 utilisation measure 1 - t/d from mean transmission time and mean
/// queueing-plus-transmission delay.
inline double utilization_measure(double mean_tx_s, double mean_delay_s) {
  if (!(mean_delay_s > 0.0)) return 0.0;
  return std::clamp(1.0 - mean_tx_s / mean_delay_s, 0.0, 1.0);
}

/// Linear map onto the discrete scale, then at most `max_step` away from `previous`.
inline int discretize_cost(double raw, int previous, const LinkCostParams& p = {}) {
  auto target = static_cast<int>(std::lround(1.0 + p.slope * raw));
  target = std::clamp(target, p.min_cost, p.max_cost);
  int step = std::clamp(target - previous, -p.max_step, p.max_step);
  return std::clamp(previous + step, p.min_cost, p.max_cost);
}

class LinkCostEstimator {
 public:
  explicit LinkCostEstimator(LinkCostParams p = {}) : p_(p), cost_(p.min_cost) {}

  void observe(double delay_s, double tx_s) {
    sum_delay_ += delay_s;
    sum_tx_ += tx_s;
    ++samples_;
  }

  /// Ends the observation window and returns the new discrete cost. An empty
  /// window keeps the previous cost.
  int close_window() {
    if (samples_ == 0) return cost_;
    double u = utilization_measure(sum_tx_ / samples_, sum_delay_ / samples_);
    exp_mean_ = has_exp_ ? p_.exp_decay * exp_mean_ + (1.0 - p_.exp_decay) * u : u;
    has_exp_ = true;
    last_raw_ = p_.window_weight * u + (1.0 - p_.window_weight) * exp_mean_;
    cost_ = discretize_cost(last_raw_, cost_, p_);
    sum_delay_ = sum_tx_ = 0.0;
    samples_ = 0;
    return cost_;
  }

  int cost() const { return cost_; }
  double last_raw() const { return last_raw_; }
  std::size_t pending_samples() const { return samples_; }

 private:
  LinkCostParams p_;
  int cost_;
  double sum_delay_ = 0.0;
  double sum_tx_ = 0.0;
  std::size_t samples_ = 0;
  double exp_mean_ = 0.0;
  bool has_exp_ = false;
  double last_raw_ = 0.0;
};

}  // namespace antsim
