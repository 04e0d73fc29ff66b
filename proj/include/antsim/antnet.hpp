#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
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

struct AntNetParams {
  double launch_interval_s = 0.3;
  double alpha = 0.3;          // weight of the queue heuristic in the ant's next-hop choice
  double eta = 0.005;          // traffic model decay
  double window_fraction = 0.3;
  double z = 1.70;
  double c1 = 0.7;
  double c2 = 0.3;
  double squash_gain = 10.0;
  double data_exponent = 1.2;
  double elaboration_s = 0.003;

  int window_max() const { return static_cast<int>(std::lround(5.0 * window_fraction / eta)); }

  void validate() const {
    auto bad = [](const char* key) { throw std::invalid_argument(std::string("antnet.") + key + " out of range"); };
    if (!(launch_interval_s > 0.0)) bad("launch_interval_s");
    if (!(alpha >= 0.0)) bad("alpha");
    if (!(eta > 0.0 && eta <= 1.0)) bad("eta");
    if (!(window_fraction > 0.0 && window_fraction < 1.0)) bad("window_fraction");
    if (!(z >= 0.0)) bad("z");
    if (!(c1 >= 0.0 && c2 >= 0.0) || std::abs(c1 + c2 - 1.0) > 1e-9) bad("c1");
    if (!(squash_gain > 0.0)) bad("squash_gain");
    if (!(data_exponent > 0.0)) bad("data_exponent");
    if (!(elaboration_s >= 0.0)) bad("elaboration_s");
    if (window_max() < 1) bad("window_fraction");
  }
};

/// Per-destination probability rows over one node's neighbours (in
/// out-link order).
class PheromoneTable {
 public:
  PheromoneTable() = default;
  PheromoneTable(int destinations, int degree)
      : degree_(degree), p_(static_cast<std::size_t>(destinations) * static_cast<std::size_t>(degree),
                            degree > 0 ? 1.0 / degree : 0.0) {
    if (degree < 1) throw std::invalid_argument("pheromone table needs at least one neighbour");
  }

  int degree() const { return degree_; }
  int destinations() const { return degree_ == 0 ? 0 : static_cast<int>(p_.size()) / degree_; }

  std::span<const double> row(NodeId d) const {
    return {p_.data() + static_cast<std::size_t>(d) * static_cast<std::size_t>(degree_),
            static_cast<std::size_t>(degree_)};
  }
  double prob(NodeId d, int slot) const { return row(d)[static_cast<std::size_t>(slot)]; }

  /// Positive reinforcement r of `slot`, with the implied decrease of the others.
  void reinforce(NodeId d, int slot, double r) {
    double* row = p_.data() + static_cast<std::size_t>(d) * static_cast<std::size_t>(degree_);
    for (int n = 0; n < degree_; ++n) {
      if (n == slot) {
        row[n] += r * (1.0 - row[n]);
      } else {
        row[n] -= r * row[n];
      }
    }
  }

  /// Overwrites a row; the values must form a distribution.
  void set_row(NodeId d, std::span<const double> values) {
    if (values.size() != static_cast<std::size_t>(degree_)) throw std::invalid_argument("row size mismatch");
    std::copy(values.begin(), values.end(), p_.begin() + static_cast<std::ptrdiff_t>(d) * degree_);
  }

  int argmax(NodeId d) const {
    auto r = row(d);
    return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }

 private:
  int degree_ = 0;
  std::vector<double> p_;
};

/// Running statistics of trip times towards one destination.
struct TripModel {
  double mean = 0.0;
  double var = 0.0;
  double best = 0.0;  // best trip time in the current observation window
  int window_count = 0;
  std::int64_t samples = 0;

  bool empty() const { return samples == 0; }

  double upper_bound(double z) const {
    return mean + z * std::sqrt(std::max(var, 0.0)) / std::sqrt(static_cast<double>(std::max(window_count, 1)));
  }

  void observe(double o, double eta, int window_max) {
    if (samples == 0) {
      mean = o;
      var = 0.0;
      best = o;
      window_count = 1;
    } else {
      mean += eta * (o - mean);
      const double dev = o - mean;
      var += eta * (dev * dev - var);
      if (window_count >= window_max) {
        best = o;
        window_count = 1;
      } else {
        best = std::min(best, o);
        ++window_count;
      }
    }
    ++samples;
  }
};

/// Normalised queue heuristic: l_n = 1 - q_n / sum(q). Every l_n equals
/// (|N|-1)/|N| when all queues are empty.
inline std::vector<double> queue_heuristic(std::span<const double> queue_bits) {
  const auto n = queue_bits.size();
  std::vector<double> l(n);
  double total = 0.0;
  for (double q : queue_bits) total += q;
  for (std::size_t i = 0; i < n; ++i) {
    l[i] = total > 0.0 ? 1.0 - queue_bits[i] / total : static_cast<double>(n - 1) / static_cast<double>(n);
  }
  return l;
}

/// Forward-ant choice probability before restriction to unvisited neighbours.
inline double forward_probability(double p, double l, double alpha, int degree) {
  return (p + alpha * l) / (1.0 + alpha * (degree - 1));
}

/// log s(x) for s(x) = 1 / (1 + exp(k / x)), without overflow.
inline double log_squash(double x, double k) {
  const double y = k / x;
  return y > 30.0 ? -(y + std::log1p(std::exp(-y))) : -std::log1p(std::exp(y));
}

/// s(x)/s(1) with gain k = a/|N|.
inline double squash_ratio(double x, double k) {
  const double r = std::exp(log_squash(x, k) - log_squash(1.0, k));
  return std::clamp(r, std::numeric_limits<double>::min(), 1.0);
}

/// Unsquashed reinforcement from a trip time and the (already updated) model.
inline double raw_reinforcement(double trip, const TripModel& m, const AntNetParams& p) {
  const double inf = m.best;
  const double sup = m.upper_bound(p.z);
  const double width = sup - inf;
  const double t1 = trip > 0.0 ? std::min(1.0, inf / trip) : 1.0;
  double t2;
  if (trip <= inf) {
    t2 = 1.0;
  } else if (width > 0.0) {
    t2 = width / (width + (trip - inf));
  } else {
    t2 = 0.0;
  }
  const double raw = p.c1 * t1 + p.c2 * t2;
  return std::clamp(raw, std::numeric_limits<double>::min(), 1.0);
}

/// Reinforcement r in (0, 1] for a trip time, squashed according to the
/// number of neighbours of the updating node.
inline double score_trip(double trip, const TripModel& m, const AntNetParams& p, int degree) {
  return squash_ratio(raw_reinforcement(trip, m, p), p.squash_gain / degree);
}

/// Probability of each destination for an ant launched at `src`, proportional
/// to the data bits `src` has generated towards it; uniform over the other
/// nodes when nothing has been generated yet.
inline std::vector<double> destination_probabilities(std::span<const double> flow_bits, NodeId src) {
  const auto n = flow_bits.size();
  std::vector<double> p(n, 0.0);
  double total = 0.0;
  for (std::size_t d = 0; d < n; ++d)
    if (static_cast<NodeId>(d) != src) total += flow_bits[d];
  for (std::size_t d = 0; d < n; ++d) {
    if (static_cast<NodeId>(d) == src) continue;
    p[d] = total > 0.0 ? flow_bits[d] / total : 1.0 / static_cast<double>(n - 1);
  }
  return p;
}

enum class CycleOutcome : std::uint8_t { kNoCycle, kRemoved, kKill };

/// Handles an ant reaching `node` `elapsed_s` after launch. A revisit pops the
/// loop off the stack (keeping the first visit and its time) unless the loop
/// lasted longer than half the ant's age. First visits are pushed.
inline CycleOutcome visit_node(std::vector<AntHop>& stack, NodeId node, double elapsed_s) {
  auto it = std::find_if(stack.begin(), stack.end(), [&](const AntHop& h) { return h.node == node; });
  if (it == stack.end()) {
    stack.push_back(AntHop{node, elapsed_s});
    return CycleOutcome::kNoCycle;
  }
  if (elapsed_s - it->elapsed_s > 0.5 * elapsed_s) return CycleOutcome::kKill;
  stack.erase(it + 1, stack.end());
  return CycleOutcome::kRemoved;
}

/// Data-packet forwarding weights: table entries raised to `exponent`, with
/// `excluded` (the way back) left out. Falls back to uniform over the allowed
/// entries when every weight vanishes.
inline std::vector<double> data_forwarding_weights(std::span<const double> row, double exponent, int excluded = -1) {
  std::vector<double> w(row.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (static_cast<int>(i) == excluded) continue;
    w[i] = std::pow(row[i], exponent);
    total += w[i];
  }
  if (total > 0.0) {
    for (double& x : w) x /= total;
    return w;
  }
  const double allowed = static_cast<double>(row.size()) - (excluded >= 0 ? 1.0 : 0.0);
  for (std::size_t i = 0; i < row.size(); ++i) w[i] = static_cast<int>(i) == excluded ? 0.0 : 1.0 / allowed;
  return w;
}

class AntNetRouting : public RoutingAlgorithm {
 public:
  explicit AntNetRouting(AntNetParams params = {}) : p_(params) { p_.validate(); }

  std::string_view name() const override { return "antnet"; }
  double elaboration_time_s() const override { return p_.elaboration_s; }
  const AntNetParams& params() const { return p_; }

  void start(Network& net) override {
    const Topology& topo = net.topology();
    const int n = topo.node_count();
    nodes_.clear();
    for (NodeId k = 0; k < n; ++k) {
      NodeState s;
      s.table = PheromoneTable(n, topo.degree(k));
      s.models.assign(static_cast<std::size_t>(n), TripModel{});
      s.flow_bits.assign(static_cast<std::size_t>(n), 0.0);
      nodes_.push_back(std::move(s));
    }
    ant_rng_ = net.streams().make(Stream::kAntRouting);
    data_rng_ = net.streams().make(Stream::kDataRouting);
    Rng phase = net.streams().make(Stream::kTimerPhase);
    for (NodeId k = 0; k < n; ++k) {
      net.schedule_timer(net.now() + phase.uniform_open() * p_.launch_interval_s, k, 0);
    }
  }

  void on_data_generated(NodeId src, NodeId dst, std::int64_t bits) override {
    nodes_[static_cast<std::size_t>(src)].flow_bits[static_cast<std::size_t>(dst)] += static_cast<double>(bits);
  }

  void on_timer(Network& net, NodeId node, int /*tag*/) override {
    launch_forward_ant(net, node);
    net.schedule_timer(net.now() + p_.launch_interval_s, node, 0);
  }

  LinkId select_next_hop(Network& net, NodeId node, PacketId pid) override {
    const Packet& pk = net.packet(pid);
    const Topology& topo = net.topology();
    auto links = topo.out_links(node);
    int excluded = -1;
    if (pk.arrival_link != kNoLink && links.size() >= 2) {
      const LinkId back = topo.link(pk.arrival_link).reverse;
      excluded = static_cast<int>(std::find(links.begin(), links.end(), back) - links.begin());
    }
    weights_ = data_forwarding_weights(table(node).row(pk.destination), p_.data_exponent, excluded);
    return links[sample_discrete(data_rng_, weights_)];
  }

  void on_routing_packet(Network& net, NodeId node, PacketId pid) override {
    Packet& ant = net.packet(pid);
    if (ant.kind == PacketKind::kForwardAnt) {
      forward_ant_at(net, node, pid);
    } else if (ant.kind == PacketKind::kBackwardAnt) {
      backward_ant_at(net, node, pid);
    } else {
      throw std::logic_error("antnet received a foreign routing packet");
    }
  }

  const PheromoneTable& table(NodeId k) const { return nodes_[static_cast<std::size_t>(k)].table; }
  const TripModel& model(NodeId k, NodeId d) const {
    return nodes_[static_cast<std::size_t>(k)].models[static_cast<std::size_t>(d)];
  }
  double flow_bits(NodeId k, NodeId d) const {
    return nodes_[static_cast<std::size_t>(k)].flow_bits[static_cast<std::size_t>(d)];
  }

  std::int64_t ants_launched() const { return launched_; }
  std::int64_t ants_killed_in_cycles() const { return cycle_kills_; }
  std::int64_t ants_completed() const { return completed_; }

  /// Ant size on the wire after `hops` hops.
  static std::int64_t ant_size_bits(int hops) { return (24 + 8 * static_cast<std::int64_t>(hops)) * 8; }

 private:
  struct NodeState {
    PheromoneTable table;
    std::vector<TripModel> models;
    std::vector<double> flow_bits;
  };

  NodeId pick_destination(NodeId src) {
    const auto p = destination_probabilities(nodes_[static_cast<std::size_t>(src)].flow_bits, src);
    return static_cast<NodeId>(sample_discrete(ant_rng_, p));
  }

  void launch_forward_ant(Network& net, NodeId src) {
    Packet p;
    p.kind = PacketKind::kForwardAnt;
    p.source = src;
    p.destination = pick_destination(src);
    p.ttl_s = net.params().ant_ttl_s;
    p.stack.push_back(AntHop{src, 0.0});
    PacketId pid = net.create_routing_packet(std::move(p), src);
    ++launched_;
    forward(net, src, pid);
  }

  void forward_ant_at(Network& net, NodeId node, PacketId pid) {
    Packet& ant = net.packet(pid);
    const double elapsed = ant.node_arrival - ant.created_at;
    if (visit_node(ant.stack, node, elapsed) == CycleOutcome::kKill) {
      ++cycle_kills_;
      net.drop(pid, DropCause::kCycle);
      return;
    }
    if (node == ant.destination) {
      net.convert(pid, PacketKind::kBackwardAnt);
      ant.back_index = static_cast<int>(ant.stack.size()) - 1;
      send_backward(net, node, pid);
      return;
    }
    forward(net, node, pid);
  }

  /// Chooses the next hop for a forward ant at `node` and queues it.
  void forward(Network& net, NodeId node, PacketId pid) {
    Packet& ant = net.packet(pid);
    const Topology& topo = net.topology();
    auto links = topo.out_links(node);
    const int deg = static_cast<int>(links.size());
    queue_.resize(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) queue_[i] = net.queued_bits(links[i], Priority::kLow);
    const auto l = queue_heuristic(queue_);
    const auto row = table(node).row(ant.destination);

    weights_.assign(links.size(), 0.0);
    bool any_unvisited = false;
    for (std::size_t i = 0; i < links.size(); ++i) {
      NodeId nb = topo.link(links[i]).to;
      bool visited = std::any_of(ant.stack.begin(), ant.stack.end(), [&](const AntHop& h) { return h.node == nb; });
      if (!visited) {
        any_unvisited = true;
        weights_[i] = forward_probability(row[i], l[i], p_.alpha, deg);
      }
    }
    if (!any_unvisited) {
      for (std::size_t i = 0; i < links.size(); ++i) weights_[i] = forward_probability(row[i], l[i], p_.alpha, deg);
    }
    std::size_t pick = sample_discrete(ant_rng_, weights_);
    if (pick == links.size()) pick = ant_rng_.index(links.size());
    ant.size_bits = ant_size_bits(ant.hops);
    ++ant.hops;
    net.enqueue_for_link(node, links[pick], pid, Priority::kLow);
  }

  void backward_ant_at(Network& net, NodeId node, PacketId pid) {
    Packet& ant = net.packet(pid);
    const int i = ant.back_index;
    if (i < 0 || ant.stack[static_cast<std::size_t>(i)].node != node) {
      throw std::logic_error("backward ant off its path");
    }
    update_node(net, node, ant);
    if (i == 0) {
      ++completed_;
      net.consume(pid);
      return;
    }
    send_backward(net, node, pid);
  }

  void send_backward(Network& net, NodeId node, PacketId pid) {
    Packet& ant = net.packet(pid);
    const int i = ant.back_index;
    NodeId prev = ant.stack[static_cast<std::size_t>(i - 1)].node;
    auto link = net.topology().link_between(node, prev);
    if (!link) throw std::logic_error("backward ant: no link to previous stack node");
    ant.back_index = i - 1;
    net.enqueue_for_link(node, *link, pid, Priority::kHigh);
  }

  /// Model and table updates at stack position back_index for every
  /// sub-destination further along the path.
  void update_node(Network& net, NodeId node, const Packet& ant) {
    const auto i = static_cast<std::size_t>(ant.back_index);
    const auto& st = ant.stack;
    if (i + 1 >= st.size()) return;
    NodeState& s = nodes_[static_cast<std::size_t>(node)];
    const int slot = net.topology().neighbor_slot(node, st[i + 1].node);
    const int deg = s.table.degree();
    const int wmax = p_.window_max();
    for (std::size_t j = i + 1; j < st.size(); ++j) {
      const NodeId d = st[j].node;
      const double trip = st[j].elapsed_s - st[i].elapsed_s;
      TripModel& m = s.models[static_cast<std::size_t>(d)];
      const bool final_dest = j + 1 == st.size();
      if (!final_dest && !m.empty() && !(trip < m.upper_bound(p_.z))) continue;
      m.observe(trip, p_.eta, wmax);
      s.table.reinforce(d, slot, score_trip(trip, m, p_, deg));
    }
  }

  AntNetParams p_;
  std::vector<NodeState> nodes_;
  Rng ant_rng_;
  Rng data_rng_;
  std::vector<double> weights_;
  std::vector<double> queue_;
  std::int64_t launched_ = 0;
  std::int64_t cycle_kills_ = 0;
  std::int64_t completed_ = 0;
};

}  // namespace antsim
