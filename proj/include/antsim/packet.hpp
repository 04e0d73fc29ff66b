#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "engine.hpp"
#include "topology.hpp"

namespace antsim {

enum class PacketKind : std::uint8_t { kData = 0, kForwardAnt, kBackwardAnt, kRoutingInfo };
inline constexpr std::size_t kPacketKindCount = 4;

inline std::string_view to_string(PacketKind k) {
  switch (k) {
    case PacketKind::kData: return "data";
    case PacketKind::kForwardAnt: return "forward_ant";
    case PacketKind::kBackwardAnt: return "backward_ant";
    case PacketKind::kRoutingInfo: return "routing_info";
  }
  return "?";
}

/// Routing packets (including backward ants) use the high-priority queue;
/// data packets and forward ants share the low-priority one.
enum class Priority : std::uint8_t { kHigh = 0, kLow = 1 };

inline bool is_routing(PacketKind k) { return k != PacketKind::kData; }

/// Ant memory: node visited and time elapsed since launch on arrival there.
struct AntHop {
  NodeId node;
  double elapsed_s;
};

struct DistanceVectorMsg {
  NodeId origin = 0;
  std::vector<double> distances;
};

struct LinkStateAdvert {
  NodeId origin = 0;
  std::uint64_t seq = 0;
  /// (outgoing link of origin, cost)
  std::vector<std::pair<LinkId, double>> costs;
};

/// Back packet of Q-routing: sent by n to k after a data packet hopped k->n.
struct QFeedback {
  NodeId destination = 0;
  NodeId neighbor = 0;        // n, the node that sent the feedback
  double estimate_s = 0.0;    // n's current time-to-go estimate for destination
  double hop_time_s = 0.0;    // time the data packet spent from arrival at k to arrival at n
};

using RoutingPayload = std::variant<std::monostate, std::shared_ptr<const DistanceVectorMsg>,
                                    std::shared_ptr<const LinkStateAdvert>, QFeedback>;

struct Packet {
  PacketKind kind = PacketKind::kData;
  std::int64_t size_bits = 0;
  NodeId source = 0;
  NodeId destination = 0;
  SimTime created_at = 0.0;
  double ttl_s = 15.0;

  int session = -1;
  bool window_released = false;

  SimTime node_arrival = 0.0;       // arrival time at the node currently holding it
  SimTime prev_node_arrival = 0.0;  // arrival time at the previous node
  LinkId arrival_link = kNoLink;  // link it arrived over, kNoLink at its origin
  SimTime enqueued_at = 0.0;

  // Ant state.
  std::vector<AntHop> stack;
  int hops = 0;
  int back_index = -1;  // backward ants: stack position of the current node

  RoutingPayload payload;
};

using PacketId = std::uint32_t;

/// Slab of live packets addressed by stable ids. References stay valid while
/// other packets are acquired.
class PacketPool {
 public:
  PacketId acquire(Packet p) {
    ++live_[static_cast<std::size_t>(p.kind)];
    if (!free_.empty()) {
      PacketId id = free_.back();
      free_.pop_back();
      slots_[id] = std::move(p);
      return id;
    }
    slots_.push_back(std::move(p));
    return static_cast<PacketId>(slots_.size() - 1);
  }

  void release(PacketId id) {
    Packet& p = slots_[id];
    --live_[static_cast<std::size_t>(p.kind)];
    p.stack.clear();
    p.payload = std::monostate{};
    free_.push_back(id);
  }

  /// Changes a live packet's kind, keeping the per-kind live counts straight.
  void retag(PacketId id, PacketKind kind) {
    Packet& p = slots_[id];
    --live_[static_cast<std::size_t>(p.kind)];
    p.kind = kind;
    ++live_[static_cast<std::size_t>(kind)];
  }

  Packet& operator[](PacketId id) { return slots_[id]; }
  const Packet& operator[](PacketId id) const { return slots_[id]; }

  std::int64_t live(PacketKind k) const { return live_[static_cast<std::size_t>(k)]; }

 private:
  std::deque<Packet> slots_;
  std::vector<PacketId> free_;
  std::array<std::int64_t, kPacketKindCount> live_{};
};

}  // namespace antsim
