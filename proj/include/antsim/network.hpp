#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "engine.hpp"
#include "metrics.hpp"
#include "packet.hpp"
#include "routing.hpp"
#include "topology.hpp"

namespace antsim {

struct NetworkParams {
  double buffer_bits = 1e9;
  double data_ttl_s = 15.0;
  double ant_ttl_s = 15.0;
  double service_time_s = 0.0003;  // data packets, per node
  int window_size = 50;
};

enum class EventType : std::uint8_t {
  kArrival,          // a: node, b: link, packet
  kDataServiced,     // a: node, packet
  kRoutingServiced,  // a: node, packet
  kTxDone,           // b: link, packet
  kTimer,            // a: node, b: tag
  kTraffic,          // a, b: workload-defined
};

struct Event {
  EventType type;
  std::int32_t a = 0;
  std::int32_t b = 0;
  PacketId packet = 0;
};

class Network;

/// Receiver of kTraffic events (the workload generator).
class TrafficDriver {
 public:
  virtual ~TrafficDriver() = default;
  virtual void on_traffic_event(Network& net, int a, int b) = 0;
};

/// Per-kind lifetime counters: created = delivered + dropped + live.
struct PacketCounters {
  std::array<std::int64_t, kPacketKindCount> created{};
  std::array<std::int64_t, kPacketKindCount> delivered{};
  std::array<std::int64_t, kPacketKindCount> dropped{};
};

struct Session {
  NodeId src = 0;
  NodeId dst = 0;
  int window = 1;
  int in_flight = 0;                 // released but not yet sent from src
  std::deque<std::int64_t> pending;  // generated, waiting for a window slot
  bool closed = false;
  std::int64_t released = 0;
};

/// Store-and-forward packet network: shared node buffers, two FIFO priority
/// classes per outgoing link, serial transmission, propagation delay.
class Network {
 public:
  Network(const Topology& topo, NetworkParams params, std::uint64_t master_seed, SimTime measure_start,
          SimTime measure_end, double metrics_bin_s = 1.0)
      : topo_(topo), params_(params), streams_(master_seed),
        metrics_(measure_start, measure_end, metrics_bin_s),
        buffer_used_(static_cast<std::size_t>(topo.node_count()), 0.0),
        links_(topo.links().size()) {
    if (params.window_size < 1) throw std::invalid_argument("window size must be >= 1");
    if (!(params.buffer_bits > 0.0)) throw std::invalid_argument("buffer capacity must be positive");
    if (!(params.service_time_s >= 0.0)) throw std::invalid_argument("service time must be >= 0");
  }

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  void set_routing(RoutingAlgorithm* algo) { algo_ = algo; }
  void set_traffic(TrafficDriver* traffic) { traffic_ = traffic; }
  RoutingAlgorithm* routing() const { return algo_; }

  /// Hands control to the routing protocol at t=0.
  void start() {
    if (algo_ == nullptr) throw std::logic_error("network has no routing algorithm");
    algo_->start(*this);
  }

  std::size_t run_until(SimTime t_end) {
    return events_.run_until(t_end, [this](SimTime, const Event& e) { dispatch(e); });
  }

  // -- accessors ------------------------------------------------------------

  const Topology& topology() const { return topo_; }
  const NetworkParams& params() const { return params_; }
  SimTime now() const { return events_.now(); }
  const RngStreams& streams() const { return streams_; }
  MetricsCollector& metrics() { return metrics_; }
  const MetricsCollector& metrics() const { return metrics_; }
  const PacketCounters& counters() const { return counters_; }
  PacketPool& packets() { return pool_; }
  const PacketPool& packets() const { return pool_; }
  Packet& packet(PacketId id) { return pool_[id]; }
  std::uint64_t events_scheduled() const { return events_.scheduled_count(); }

  double buffer_used(NodeId n) const { return buffer_used_[static_cast<std::size_t>(n)]; }

  /// Bits waiting in a link queue, excluding the packet being transmitted.
  double queued_bits(LinkId l, Priority p) const {
    const auto& ls = links_[static_cast<std::size_t>(l)];
    return p == Priority::kHigh ? ls.bits_high : ls.bits_low;
  }
  double queued_bits(LinkId l) const { return queued_bits(l, Priority::kHigh) + queued_bits(l, Priority::kLow); }
  std::size_t queued_packets(LinkId l) const {
    const auto& ls = links_[static_cast<std::size_t>(l)];
    return ls.high.size() + ls.low.size();
  }
  bool link_busy(LinkId l) const { return links_[static_cast<std::size_t>(l)].busy; }

  /// Sum of packet sizes queued on or being sent over `node`'s links.
  double charged_bits(NodeId node) const {
    double sum = 0.0;
    for (LinkId l : topo_.out_links(node)) {
      const auto& ls = links_[static_cast<std::size_t>(l)];
      sum += ls.bits_high + ls.bits_low;
      if (ls.busy) sum += static_cast<double>(pool_[ls.in_service].size_bits);
    }
    return sum;
  }

  // -- scheduling -----------------------------------------------------------

  void schedule_timer(SimTime at, NodeId node, int tag) {
    events_.schedule(at, Event{EventType::kTimer, node, tag, 0});
  }
  void schedule_traffic(SimTime at, int a, int b) {
    events_.schedule(at, Event{EventType::kTraffic, a, b, 0});
  }

  // -- packets ----------------------------------------------------------------

  /// Registers a routing packet created at `node` (ants, advertisements, feedback).
  PacketId create_routing_packet(Packet p, NodeId node) {
    p.created_at = now();
    p.node_arrival = now();
    p.arrival_link = kNoLink;
    ++counters_.created[static_cast<std::size_t>(p.kind)];
    (void)node;
    return pool_.acquire(std::move(p));
  }

  /// Queues a packet on an outgoing link of `node`. Drops it (and returns
  /// false) when the node buffer cannot hold it.
  bool enqueue_for_link(NodeId node, LinkId link, PacketId pid, Priority prio) {
    const Link& lk = topo_.link(link);
    if (lk.from != node) throw std::logic_error("enqueue on a link not leaving the node");
    Packet& p = pool_[pid];
    if (p.size_bits <= 0) throw std::logic_error("packet size must be positive");
    auto& used = buffer_used_[static_cast<std::size_t>(node)];
    const auto size = static_cast<double>(p.size_bits);
    if (used + size > params_.buffer_bits) {
      drop(pid, DropCause::kBuffer);
      return false;
    }
    used += size;
    p.enqueued_at = now();
    auto& ls = links_[static_cast<std::size_t>(link)];
    if (prio == Priority::kHigh) {
      ls.high.push_back(pid);
      ls.bits_high += size;
    } else {
      ls.low.push_back(pid);
      ls.bits_low += size;
    }
    if (!ls.busy) transmit_next(link);
    return true;
  }

  /// Routing packet reached the end of its life normally.
  void consume(PacketId pid) {
    ++counters_.delivered[static_cast<std::size_t>(pool_[pid].kind)];
    pool_.release(pid);
  }

  void drop(PacketId pid, DropCause cause) {
    Packet& p = pool_[pid];
    ++counters_.dropped[static_cast<std::size_t>(p.kind)];
    if (p.kind == PacketKind::kData) {
      metrics_.record_drop(now(), cause);
      if (!p.window_released) release_window_slot(p);
    }
    pool_.release(pid);
  }

  /// Turns a packet into another kind (forward ant -> backward ant): the old
  /// kind counts as delivered, the new one as created.
  void convert(PacketId pid, PacketKind kind) {
    ++counters_.delivered[static_cast<std::size_t>(pool_[pid].kind)];
    ++counters_.created[static_cast<std::size_t>(kind)];
    pool_.retag(pid, kind);
  }

  // -- sessions -------------------------------------------------------------

  int open_session(NodeId src, NodeId dst) {
    if (src == dst) throw std::invalid_argument("session endpoints must differ");
    Session s;
    s.src = src;
    s.dst = dst;
    s.window = params_.window_size;
    sessions_.push_back(std::move(s));
    return static_cast<int>(sessions_.size() - 1);
  }

  /// Stops generation; packets already generated still drain.
  void close_session(int id) { sessions_[static_cast<std::size_t>(id)].closed = true; }

  const Session& session(int id) const { return sessions_[static_cast<std::size_t>(id)]; }
  std::size_t session_count() const { return sessions_.size(); }

  /// The application produced a packet; it enters the network once the
  /// production window allows.
  void session_generate(int id, std::int64_t bits) {
    auto& s = sessions_[static_cast<std::size_t>(id)];
    if (s.closed) return;
    metrics_.record_generated(now(), bits);
    s.pending.push_back(bits);
    session_try_send(id);
  }

  /// Releases pending packets while the window has room. A packet frees its
  /// slot as soon as its last bit has left the source node.
  int session_try_send(int id) {
    int released = 0;
    for (;;) {
      auto& s = sessions_[static_cast<std::size_t>(id)];
      if (s.pending.empty() || s.in_flight >= s.window) break;
      std::int64_t bits = s.pending.front();
      s.pending.pop_front();
      ++s.in_flight;
      ++s.released;
      ++released;
      Packet p;
      p.kind = PacketKind::kData;
      p.size_bits = bits;
      p.source = s.src;
      p.destination = s.dst;
      p.created_at = now();
      p.node_arrival = now();
      p.ttl_s = params_.data_ttl_s;
      p.session = id;
      ++counters_.created[static_cast<std::size_t>(PacketKind::kData)];
      PacketId pid = pool_.acquire(std::move(p));
      if (algo_ != nullptr) algo_->on_data_generated(s.src, s.dst, bits);
      events_.schedule(now() + params_.service_time_s, Event{EventType::kDataServiced, s.src, 0, pid});
    }
    return released;
  }

 private:
  struct LinkState {
    std::deque<PacketId> high;
    std::deque<PacketId> low;
    double bits_high = 0.0;
    double bits_low = 0.0;
    bool busy = false;
    PacketId in_service = 0;
  };

  void dispatch(const Event& e) {
    switch (e.type) {
      case EventType::kArrival: on_arrival(e.a, e.b, e.packet); break;
      case EventType::kDataServiced: on_data_serviced(e.a, e.packet); break;
      case EventType::kRoutingServiced: algo_->on_routing_packet(*this, e.a, e.packet); break;
      case EventType::kTxDone: on_tx_done(e.b, e.packet); break;
      case EventType::kTimer: algo_->on_timer(*this, e.a, e.b); break;
      case EventType::kTraffic:
        if (traffic_ != nullptr) traffic_->on_traffic_event(*this, e.a, e.b);
        break;
    }
  }

  void transmit_next(LinkId link) {
    auto& ls = links_[static_cast<std::size_t>(link)];
    if (ls.busy) return;
    PacketId pid;
    if (!ls.high.empty()) {
      pid = ls.high.front();
      ls.high.pop_front();
      ls.bits_high -= static_cast<double>(pool_[pid].size_bits);
    } else if (!ls.low.empty()) {
      pid = ls.low.front();
      ls.low.pop_front();
      ls.bits_low -= static_cast<double>(pool_[pid].size_bits);
    } else {
      return;
    }
    ls.busy = true;
    ls.in_service = pid;
    const double tx = static_cast<double>(pool_[pid].size_bits) / topo_.link(link).bandwidth_bps;
    events_.schedule(now() + tx, Event{EventType::kTxDone, 0, link, pid});
  }

  void on_tx_done(LinkId link, PacketId pid) {
    auto& ls = links_[static_cast<std::size_t>(link)];
    const Link& lk = topo_.link(link);
    Packet& p = pool_[pid];
    ls.busy = false;
    const auto size = static_cast<double>(p.size_bits);
    buffer_used_[static_cast<std::size_t>(lk.from)] -= size;
    const double tx = size / lk.bandwidth_bps;
    if (algo_ != nullptr) algo_->on_link_transmitted(link, now() - p.enqueued_at, tx);
    if (is_routing(p.kind)) {
      metrics_.record_routing_bits(now(), p.size_bits);
    } else if (!p.window_released && lk.from == p.source) {
      release_window_slot(p);
    }
    events_.schedule(now() + lk.prop_delay_s, Event{EventType::kArrival, lk.to, link, pid});
    transmit_next(link);
  }

  void release_window_slot(Packet& p) {
    p.window_released = true;
    if (p.session < 0) return;
    auto& s = sessions_[static_cast<std::size_t>(p.session)];
    --s.in_flight;
    session_try_send(p.session);
  }

  void on_arrival(NodeId node, LinkId link, PacketId pid) {
    Packet& p = pool_[pid];
    p.prev_node_arrival = p.node_arrival;
    p.node_arrival = now();
    p.arrival_link = link;
    if (p.kind == PacketKind::kData) {
      if (algo_ != nullptr) algo_->on_data_arrival(*this, node, pid);
      if (node == p.destination) {
        deliver(pid);
        return;
      }
      if (now() - p.created_at > p.ttl_s) {
        drop(pid, DropCause::kTtl);
        return;
      }
      events_.schedule(now() + params_.service_time_s, Event{EventType::kDataServiced, node, 0, pid});
      return;
    }
    if ((p.kind == PacketKind::kForwardAnt || p.kind == PacketKind::kBackwardAnt) &&
        now() - p.created_at > params_.ant_ttl_s) {
      drop(pid, DropCause::kTtl);
      return;
    }
    events_.schedule(now() + algo_->elaboration_time_s(), Event{EventType::kRoutingServiced, node, 0, pid});
  }

  void on_data_serviced(NodeId node, PacketId pid) {
    LinkId l = algo_->select_next_hop(*this, node, pid);
    if (l == kNoLink) {
      drop(pid, DropCause::kNoRoute);
      return;
    }
    enqueue_for_link(node, l, pid, Priority::kLow);
  }

  void deliver(PacketId pid) {
    Packet& p = pool_[pid];
    ++counters_.delivered[static_cast<std::size_t>(PacketKind::kData)];
    metrics_.record_delivered(now(), p.size_bits, now() - p.created_at);
    pool_.release(pid);
  }

  const Topology& topo_;
  NetworkParams params_;
  RngStreams streams_;
  MetricsCollector metrics_;
  EventQueue<Event> events_;
  PacketPool pool_;
  PacketCounters counters_;
  std::vector<double> buffer_used_;
  std::vector<LinkState> links_;
  std::vector<Session> sessions_;
  RoutingAlgorithm* algo_ = nullptr;
  TrafficDriver* traffic_ = nullptr;
};

}  // namespace antsim
