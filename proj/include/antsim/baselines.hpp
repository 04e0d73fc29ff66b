#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "engine.hpp"
#include "network.hpp"
#include "packet.hpp"
#include "routing.hpp"
#include "topology.hpp"

namespace antsim {

/// Static cost of a link as seen by a 512-byte packet.
inline double ospf_link_cost(const Link& l, double sample_bits = 4096.0) {
  return l.prop_delay_s + sample_bits / l.bandwidth_bps;
}

inline std::vector<double> ospf_link_costs(const Topology& topo, double sample_bits = 4096.0) {
  std::vector<double> c;
  c.reserve(topo.links().size());
  for (const Link& l : topo.links()) c.push_back(ospf_link_cost(l, sample_bits));
  return c;
}

// ---------------------------------------------------------------------------
// Link state: OSPF (static costs) and SPF (adaptive costs)

struct LinkStateParams {
  bool adaptive = true;           // false: static OSPF costs, LSAs only refresh
  double interval_s = 3.0;
  double elaboration_s = 0.006;
  LinkCostParams cost;
};

inline std::int64_t lsa_size_bits(int degree) { return (64 + 8 * static_cast<std::int64_t>(degree)) * 8; }

class LinkStateRouting : public RoutingAlgorithm {
 public:
  explicit LinkStateRouting(LinkStateParams p) : p_(p) {
    if (!(p_.interval_s > 0.0)) throw std::invalid_argument("link-state interval must be > 0");
  }

  std::string_view name() const override { return p_.adaptive ? "spf" : "ospf"; }
  double elaboration_time_s() const override { return p_.elaboration_s; }

  void start(Network& net) override {
    const Topology& topo = net.topology();
    const int n = topo.node_count();
    const std::vector<double> initial =
        p_.adaptive ? std::vector<double>(topo.links().size(), 1.0) : ospf_link_costs(topo);
    lsdb_.assign(static_cast<std::size_t>(n), initial);
    filters_.assign(static_cast<std::size_t>(n), FloodFilter(n));
    seq_.assign(static_cast<std::size_t>(n), 0);
    estimators_.assign(topo.links().size(), LinkCostEstimator(p_.cost));
    next_.assign(static_cast<std::size_t>(n), {});
    for (NodeId k = 0; k < n; ++k) recompute(topo, k);
    Rng phase = net.streams().make(Stream::kTimerPhase);
    for (NodeId k = 0; k < n; ++k) net.schedule_timer(net.now() + phase.uniform_open() * p_.interval_s, k, 0);
  }

  void on_link_transmitted(LinkId link, double delay_s, double tx_s) override {
    if (p_.adaptive) estimators_[static_cast<std::size_t>(link)].observe(delay_s, tx_s);
  }

  void on_timer(Network& net, NodeId node, int /*tag*/) override {
    const Topology& topo = net.topology();
    auto lsa = std::make_shared<LinkStateAdvert>();
    lsa->origin = node;
    lsa->seq = ++seq_[static_cast<std::size_t>(node)];
    auto& own = lsdb_[static_cast<std::size_t>(node)];
    for (LinkId l : topo.out_links(node)) {
      if (p_.adaptive) own[static_cast<std::size_t>(l)] = estimators_[static_cast<std::size_t>(l)].close_window();
      lsa->costs.emplace_back(l, own[static_cast<std::size_t>(l)]);
    }
    filters_[static_cast<std::size_t>(node)].accept(node, lsa->seq);
    flood(net, node, kNoLink, std::shared_ptr<const LinkStateAdvert>(std::move(lsa)));
    if (p_.adaptive) recompute(topo, node);
    net.schedule_timer(net.now() + p_.interval_s, node, 0);
  }

  void on_routing_packet(Network& net, NodeId node, PacketId pid) override {
    Packet& pk = net.packet(pid);
    const auto* held = std::get_if<std::shared_ptr<const LinkStateAdvert>>(&pk.payload);
    if (held == nullptr) throw std::logic_error("link-state routing received a foreign packet");
    std::shared_ptr<const LinkStateAdvert> lsa = *held;
    const LinkId arrived = pk.arrival_link;
    net.consume(pid);
    if (!filters_[static_cast<std::size_t>(node)].accept(lsa->origin, lsa->seq)) return;
    auto& db = lsdb_[static_cast<std::size_t>(node)];
    for (auto [l, c] : lsa->costs) db[static_cast<std::size_t>(l)] = c;
    flood(net, node, arrived, lsa);
  }

  LinkId select_next_hop(Network& net, NodeId node, PacketId pid) override {
    return next_[static_cast<std::size_t>(node)][static_cast<std::size_t>(net.packet(pid).destination)];
  }

  LinkId next_link(NodeId node, NodeId dst) const {
    return next_[static_cast<std::size_t>(node)][static_cast<std::size_t>(dst)];
  }
  const std::vector<double>& database(NodeId node) const { return lsdb_[static_cast<std::size_t>(node)]; }
  const LinkCostEstimator& estimator(LinkId l) const { return estimators_[static_cast<std::size_t>(l)]; }

 private:
  void recompute(const Topology& topo, NodeId node) {
    next_[static_cast<std::size_t>(node)] = dijkstra(topo, lsdb_[static_cast<std::size_t>(node)], node).first_link;
  }

  void flood(Network& net, NodeId node, LinkId arrived, const std::shared_ptr<const LinkStateAdvert>& lsa) {
    const Topology& topo = net.topology();
    const LinkId back = arrived == kNoLink ? kNoLink : topo.link(arrived).reverse;
    const std::int64_t size = lsa_size_bits(topo.degree(lsa->origin));
    for (LinkId l : topo.out_links(node)) {
      if (l == back) continue;
      Packet p;
      p.kind = PacketKind::kRoutingInfo;
      p.size_bits = size;
      p.source = lsa->origin;
      p.destination = topo.link(l).to;
      p.payload = lsa;
      PacketId id = net.create_routing_packet(std::move(p), node);
      net.enqueue_for_link(node, l, id, Priority::kHigh);
    }
  }

  LinkStateParams p_;
  std::vector<std::vector<double>> lsdb_;
  std::vector<FloodFilter> filters_;
  std::vector<std::uint64_t> seq_;
  std::vector<LinkCostEstimator> estimators_;
  std::vector<std::vector<LinkId>> next_;
};

// ---------------------------------------------------------------------------
// Distance vector: asynchronous Bellman-Ford with adaptive costs

struct DistanceVectorParams {
  double interval_s = 0.8;
  double elaboration_s = 0.002;
  LinkCostParams cost;
};

inline std::int64_t distance_vector_size_bits(int node_count) {
  return (24 + 12 * static_cast<std::int64_t>(node_count)) * 8;
}

class DistanceVectorRouting : public RoutingAlgorithm {
 public:
  explicit DistanceVectorRouting(DistanceVectorParams p) : p_(p) {
    if (!(p_.interval_s > 0.0)) throw std::invalid_argument("distance-vector interval must be > 0");
  }

  std::string_view name() const override { return "bf"; }
  double elaboration_time_s() const override { return p_.elaboration_s; }

  void start(Network& net) override {
    const Topology& topo = net.topology();
    const int n = topo.node_count();
    costs_.assign(topo.links().size(), static_cast<double>(p_.cost.min_cost));
    estimators_.assign(topo.links().size(), LinkCostEstimator(p_.cost));
    tables_.clear();
    for (NodeId k = 0; k < n; ++k) tables_.emplace_back(topo, k);
    Rng phase = net.streams().make(Stream::kTimerPhase);
    for (NodeId k = 0; k < n; ++k) net.schedule_timer(net.now() + phase.uniform_open() * p_.interval_s, k, 0);
  }

  void on_link_transmitted(LinkId link, double delay_s, double tx_s) override {
    estimators_[static_cast<std::size_t>(link)].observe(delay_s, tx_s);
  }

  void on_timer(Network& net, NodeId node, int /*tag*/) override {
    const Topology& topo = net.topology();
    for (LinkId l : topo.out_links(node)) {
      costs_[static_cast<std::size_t>(l)] = estimators_[static_cast<std::size_t>(l)].close_window();
    }
    auto& table = tables_[static_cast<std::size_t>(node)];
    table.recompute(costs_);
    auto msg = std::make_shared<DistanceVectorMsg>();
    msg->origin = node;
    msg->distances = table.distances();
    std::shared_ptr<const DistanceVectorMsg> shared = std::move(msg);
    const std::int64_t size = distance_vector_size_bits(topo.node_count());
    for (LinkId l : topo.out_links(node)) {
      Packet p;
      p.kind = PacketKind::kRoutingInfo;
      p.size_bits = size;
      p.source = node;
      p.destination = topo.link(l).to;
      p.payload = shared;
      PacketId id = net.create_routing_packet(std::move(p), node);
      net.enqueue_for_link(node, l, id, Priority::kHigh);
    }
    net.schedule_timer(net.now() + p_.interval_s, node, 0);
  }

  void on_routing_packet(Network& net, NodeId node, PacketId pid) override {
    Packet& pk = net.packet(pid);
    const auto* held = std::get_if<std::shared_ptr<const DistanceVectorMsg>>(&pk.payload);
    if (held == nullptr) throw std::logic_error("distance-vector routing received a foreign packet");
    std::shared_ptr<const DistanceVectorMsg> msg = *held;
    net.consume(pid);
    tables_[static_cast<std::size_t>(node)].merge(msg->origin, msg->distances, costs_);
  }

  LinkId select_next_hop(Network& net, NodeId node, PacketId pid) override {
    return tables_[static_cast<std::size_t>(node)].next_link(net.packet(pid).destination);
  }

  const DistanceVectorTable& table(NodeId node) const { return tables_[static_cast<std::size_t>(node)]; }
  double link_cost(LinkId l) const { return costs_[static_cast<std::size_t>(l)]; }

 private:
  DistanceVectorParams p_;
  std::vector<double> costs_;
  std::vector<LinkCostEstimator> estimators_;
  std::vector<DistanceVectorTable> tables_;
};

// ---------------------------------------------------------------------------
// Q-routing and predictive Q-routing

struct QRoutingParams {
  bool predictive = false;
  double learning_rate = 0.5;
  double beta = 0.7;   // recovery-rate learning (predictive only)
  double gamma = 0.9;  // recovery-rate decay (predictive only)
  double feedback_bits = 96.0;
  double elaboration_s = 0.003;
  double mean_packet_size_bits = 4096.0;  // for the initial estimates
};

/// One Q entry. B, R and U are only used by the predictive variant.
struct QEntry {
  double q = 0.0;
  double best = 0.0;
  double rate = 0.0;
  double updated_at = 0.0;
};

/// Estimate after idling: Q relaxed along the recovery rate, never below B.
inline double predicted_q(const QEntry& e, double now) {
  return std::max(e.q + (now - e.updated_at) * e.rate, e.best);
}

/// Applies one feedback sample; returns the change in Q.
inline double q_update(QEntry& e, double sample, double now, const QRoutingParams& p) {
  const double dq = p.learning_rate * (sample - e.q);
  e.q += dq;
  if (p.predictive) {
    e.best = std::min(e.best, e.q);
    const double dt = now - e.updated_at;
    if (dq < 0.0) {
      if (dt > 0.0) e.rate += p.beta * dq / dt;
    } else if (dq > 0.0) {
      e.rate *= p.gamma;
    }
    e.updated_at = now;
  }
  return dq;
}

/// Index of the entry with the lowest (predicted) estimate; ties go to the
/// lowest index, i.e. the smallest neighbour id.
inline std::size_t q_argmin(std::span<const QEntry> entries, bool predictive, double now) {
  std::size_t best = 0;
  double best_v = kInfinity;
  for (std::size_t s = 0; s < entries.size(); ++s) {
    const double v = predictive ? predicted_q(entries[s], now) : entries[s].q;
    if (v < best_v) {
      best_v = v;
      best = s;
    }
  }
  return best;
}

class QRouting : public RoutingAlgorithm {
 public:
  explicit QRouting(QRoutingParams p) : p_(p) {
    if (!(p_.learning_rate > 0.0 && p_.learning_rate <= 1.0)) throw std::invalid_argument("qr.learning_rate out of range");
    if (!(p_.feedback_bits > 0.0)) throw std::invalid_argument("qr.feedback_bits must be > 0");
  }

  std::string_view name() const override { return p_.predictive ? "pqr" : "qr"; }
  double elaboration_time_s() const override { return p_.elaboration_s; }

  /// Seeds every entry with the idle-network delay of the route through that
  /// neighbour: link cost plus the neighbour's shortest distance, both for a
  /// mean-size packet.
  void start(Network& net) override {
    const Topology& topo = net.topology();
    const int n = topo.node_count();
    const auto costs = ospf_link_costs(topo, p_.mean_packet_size_bits);
    std::vector<std::vector<double>> dist;
    for (NodeId s = 0; s < n; ++s) dist.push_back(dijkstra(topo, costs, s).dist);
    q_.assign(static_cast<std::size_t>(n), {});
    for (NodeId k = 0; k < n; ++k) {
      auto links = topo.out_links(k);
      auto& rows = q_[static_cast<std::size_t>(k)];
      rows.assign(static_cast<std::size_t>(n) * links.size(), QEntry{});
      for (NodeId d = 0; d < n; ++d) {
        for (std::size_t s = 0; s < links.size(); ++s) {
          const Link& l = topo.link(links[s]);
          const double q = costs[static_cast<std::size_t>(links[s])] +
                           dist[static_cast<std::size_t>(l.to)][static_cast<std::size_t>(d)];
          rows[static_cast<std::size_t>(d) * links.size() + s] = QEntry{q, q, 0.0, net.now()};
        }
      }
    }
  }

  LinkId select_next_hop(Network& net, NodeId node, PacketId pid) override {
    auto links = net.topology().out_links(node);
    const auto d = static_cast<std::size_t>(net.packet(pid).destination);
    const auto& rows = q_[static_cast<std::size_t>(node)];
    std::span<const QEntry> row(rows.data() + d * links.size(), links.size());
    return links[q_argmin(row, p_.predictive, net.now())];
  }

  void on_data_arrival(Network& net, NodeId node, PacketId pid) override {
    const Packet& pk = net.packet(pid);
    const Link& in = net.topology().link(pk.arrival_link);
    QFeedback fb;
    fb.destination = pk.destination;
    fb.neighbor = node;
    fb.estimate_s = node == pk.destination ? 0.0 : min_q(net.topology(), node, pk.destination);
    fb.hop_time_s = pk.node_arrival - pk.prev_node_arrival;
    Packet p;
    p.kind = PacketKind::kRoutingInfo;
    p.size_bits = static_cast<std::int64_t>(std::llround(p_.feedback_bits));
    p.source = node;
    p.destination = in.from;
    p.payload = fb;
    PacketId id = net.create_routing_packet(std::move(p), node);
    net.enqueue_for_link(node, in.reverse, id, Priority::kHigh);
  }

  void on_routing_packet(Network& net, NodeId node, PacketId pid) override {
    const Packet& pk = net.packet(pid);
    const auto* fb = std::get_if<QFeedback>(&pk.payload);
    if (fb == nullptr) throw std::logic_error("Q-routing received a foreign packet");
    const auto deg = static_cast<std::size_t>(net.topology().degree(node));
    const int slot = net.topology().neighbor_slot(node, fb->neighbor);
    QEntry& e = entry(node, fb->destination, static_cast<std::size_t>(slot), deg);
    q_update(e, fb->estimate_s + fb->hop_time_s, net.now(), p_);
    net.consume(pid);
  }

  const QEntry& q(const Topology& topo, NodeId k, NodeId d, int slot) const {
    const auto deg = static_cast<std::size_t>(topo.degree(k));
    return q_[static_cast<std::size_t>(k)][static_cast<std::size_t>(d) * deg + static_cast<std::size_t>(slot)];
  }

  double min_q(const Topology& topo, NodeId k, NodeId d) const {
    double m = kInfinity;
    for (int s = 0; s < topo.degree(k); ++s) m = std::min(m, q(topo, k, d, s).q);
    return m;
  }

 private:
  QEntry& entry(NodeId k, NodeId d, std::size_t slot, std::size_t deg) {
    return q_[static_cast<std::size_t>(k)][static_cast<std::size_t>(d) * deg + slot];
  }

  QRoutingParams p_;
  std::vector<std::vector<QEntry>> q_;
};

// ---------------------------------------------------------------------------
// Daemon: per-packet shortest path over instantaneous global queue state

struct DaemonParams {
  double queue_mix = 0.4;      // weight of the averaged queue in the cost
  double average_decay = 0.9;  // weight of the previous average
};

/// Cost of a link for a packet of `packet_bits` given the instantaneous and
/// averaged queue sizes.
inline double daemon_link_cost(double prop_s, double bandwidth_bps, double packet_bits, double queue_bits,
                               double avg_queue_bits, double mix = 0.4) {
  return prop_s + packet_bits / bandwidth_bps + (1.0 - mix) * queue_bits / bandwidth_bps +
         mix * avg_queue_bits / bandwidth_bps;
}

class DaemonRouting : public RoutingAlgorithm {
 public:
  explicit DaemonRouting(DaemonParams p = {}) : p_(p) {}

  std::string_view name() const override { return "daemon"; }

  void start(Network& net) override {
    avg_.assign(net.topology().links().size(), 0.0);
    costs_.assign(net.topology().links().size(), 0.0);
  }

  LinkId select_next_hop(Network& net, NodeId node, PacketId pid) override {
    const Topology& topo = net.topology();
    const Packet& pk = net.packet(pid);
    const auto bits = static_cast<double>(pk.size_bits);
    for (std::size_t i = 0; i < costs_.size(); ++i) {
      const Link& l = topo.link(static_cast<LinkId>(i));
      const double q = net.queued_bits(static_cast<LinkId>(i));
      costs_[i] = daemon_link_cost(l.prop_delay_s, l.bandwidth_bps, bits, q, avg_[i], p_.queue_mix);
      avg_[i] = p_.average_decay * avg_[i] + (1.0 - p_.average_decay) * q;
    }
    return dijkstra(topo, costs_, node).first_link[static_cast<std::size_t>(pk.destination)];
  }

  void on_routing_packet(Network& /*net*/, NodeId /*node*/, PacketId /*pid*/) override {
    throw std::logic_error("daemon does not use routing packets");
  }

  double average_queue(LinkId l) const { return avg_[static_cast<std::size_t>(l)]; }

 private:
  DaemonParams p_;
  std::vector<double> avg_;
  std::vector<double> costs_;
};

}  // namespace antsim
