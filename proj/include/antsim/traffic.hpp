#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "engine.hpp"
#include "network.hpp"
#include "topology.hpp"

namespace antsim {

enum class Temporal : std::uint8_t { kPoisson, kFixed, kTemporaryHotSpots };
enum class Spatial : std::uint8_t { kUniform, kRandom };
enum class StreamShape : std::uint8_t { kCbr, kGvbr };

inline std::string_view to_string(Temporal t) {
  switch (t) {
    case Temporal::kPoisson: return "P";
    case Temporal::kFixed: return "F";
    case Temporal::kTemporaryHotSpots: return "TMPHS";
  }
  return "?";
}
inline std::string_view to_string(Spatial s) { return s == Spatial::kUniform ? "U" : "R"; }
inline std::string_view to_string(StreamShape s) { return s == StreamShape::kCbr ? "CBR" : "GVBR"; }

struct TrafficSpec {
  Temporal temporal = Temporal::kPoisson;
  Spatial spatial = Spatial::kUniform;
  StreamShape stream = StreamShape::kGvbr;
  double msia_s = 2.4;
  double mpia_s = 0.005;
  double mean_packet_size_bits = 4096.0;
  /// Mean (exponential) lifetime of a Poisson-born session.
  double session_duration_mean_s = 1.1;

  int hs_count = 0;
  double mpia_hs_s = 0.04;
  double hot_spot_on_s = 0.0;   // relative to the start of data traffic
  double hot_spot_off_s = 0.0;
  std::vector<int> hot_spots;   // 1-based; drawn at random when empty

  /// Fixed temporal pattern: (src, dst) pairs, 1-based. Empty means all ordered pairs.
  std::vector<std::pair<int, int>> fixed_pairs;

  /// Per-node MSIA multiplier range for the random spatial pattern.
  double random_spread_lo = 0.5;
  double random_spread_hi = 1.5;

  void validate(int node_count) const {
    auto positive = [](double v, const char* key) {
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("traffic.") + key + " must be > 0");
    };
    if (temporal != Temporal::kFixed) positive(msia_s, "msia_s");
    positive(mpia_s, "mpia_s");
    positive(mean_packet_size_bits, "mean_packet_size_bits");
    if (temporal == Temporal::kPoisson || temporal == Temporal::kTemporaryHotSpots) {
      positive(session_duration_mean_s, "session_duration_mean_s");
    }
    if (hs_count < 0 || hs_count >= node_count) throw std::invalid_argument("traffic.hs_count must be in [0, N)");
    if (hs_count > 0) positive(mpia_hs_s, "mpia_hs_s");
    if (temporal == Temporal::kTemporaryHotSpots) {
      if (hs_count == 0) throw std::invalid_argument("traffic.hs_count must be > 0 for TMPHS");
      if (hot_spot_on_s < 0.0 || hot_spot_off_s < hot_spot_on_s) {
        throw std::invalid_argument("traffic.hot_spot_off_s must not precede hot_spot_on_s");
      }
    }
    if (!hot_spots.empty() && static_cast<int>(hot_spots.size()) != hs_count) {
      throw std::invalid_argument("traffic.hot_spots must list exactly hs_count nodes");
    }
    for (int h : hot_spots) {
      if (h < 1 || h > node_count) throw std::invalid_argument("traffic.hot_spots: node out of range");
    }
    for (auto [s, d] : fixed_pairs) {
      if (s < 1 || s > node_count || d < 1 || d > node_count || s == d) {
        throw std::invalid_argument("traffic.fixed_pairs: invalid pair");
      }
    }
    if (!(random_spread_lo > 0.0) || random_spread_hi < random_spread_lo) {
      throw std::invalid_argument("traffic: invalid random spread");
    }
  }
};

/// Size of a variable-bit-rate packet: exponential with the given mean,
/// rounded up to whole bits.
inline std::int64_t gvbr_packet_bits(Rng& rng, double mean_bits) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(sample_exponential(rng, mean_bits))));
}

/// Generates sessions and packets over [start, end) and feeds them into the
/// network. All draws come from traffic-only substreams, so the offered load
/// does not depend on the routing algorithm.
class Workload : public TrafficDriver {
 public:
  Workload(Network& net, TrafficSpec spec, SimTime start, SimTime end)
      : spec_(std::move(spec)), start_(start), end_(end) {
    const int n = net.topology().node_count();
    spec_.validate(n);
    const RngStreams& rs = net.streams();
    Rng setup = rs.make(Stream::kWorkloadSetup);

    node_msia_.assign(static_cast<std::size_t>(n), spec_.msia_s);
    if (spec_.spatial == Spatial::kRandom) {
      for (auto& m : node_msia_) m = spec_.msia_s * setup.uniform(spec_.random_spread_lo, spec_.random_spread_hi);
    }

    if (spec_.hs_count > 0) {
      if (!spec_.hot_spots.empty()) {
        for (int h : spec_.hot_spots) hot_spots_.push_back(h - 1);
      } else {
        std::vector<NodeId> all(static_cast<std::size_t>(n));
        for (NodeId i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < spec_.hs_count; ++i) {  // partial Fisher-Yates
          auto j = static_cast<std::size_t>(i) + setup.index(all.size() - static_cast<std::size_t>(i));
          std::swap(all[static_cast<std::size_t>(i)], all[j]);
          hot_spots_.push_back(all[static_cast<std::size_t>(i)]);
        }
      }
    }

    for (NodeId i = 0; i < n; ++i) {
      arrival_rng_.push_back(rs.make(Stream::kSessionArrival, static_cast<std::uint64_t>(i)));
      endpoint_rng_.push_back(rs.make(Stream::kSessionEndpoints, static_cast<std::uint64_t>(i)));
      size_rng_.push_back(rs.make(Stream::kPacketSize, static_cast<std::uint64_t>(i)));
      gap_rng_.push_back(rs.make(Stream::kPacketGap, static_cast<std::uint64_t>(i)));
    }
  }

  /// Schedules the first traffic events. Call once, before running past `start`.
  void install(Network& net) {
    net.set_traffic(this);
    const int n = net.topology().node_count();
    switch (spec_.temporal) {
      case Temporal::kFixed:
        if (spec_.fixed_pairs.empty()) {
          for (NodeId s = 0; s < n; ++s)
            for (NodeId d = 0; d < n; ++d)
              if (s != d) open(net, s, d, spec_.mpia_s, kForever, start_);
        } else {
          for (auto [s, d] : spec_.fixed_pairs) open(net, s - 1, d - 1, spec_.mpia_s, kForever, start_);
        }
        break;
      case Temporal::kPoisson:
      case Temporal::kTemporaryHotSpots:
        for (NodeId s = 0; s < n; ++s) schedule_arrival(net, s, start_);
        break;
    }
    if (spec_.hs_count > 0) {
      if (spec_.temporal == Temporal::kTemporaryHotSpots) {
        if (spec_.hot_spot_off_s > spec_.hot_spot_on_s) {
          net.schedule_traffic(start_ + spec_.hot_spot_on_s, kHotSpotOn, 0);
          net.schedule_traffic(start_ + spec_.hot_spot_off_s, kHotSpotOff, 0);
        }
      } else {
        net.schedule_traffic(start_, kHotSpotOn, 0);
      }
    }
  }

  void on_traffic_event(Network& net, int kind, int index) override {
    switch (kind) {
      case kSessionArrival: on_session_arrival(net, index); break;
      case kPacket: on_packet(net, index); break;
      case kHotSpotOn: on_hot_spot_on(net); break;
      case kHotSpotOff: on_hot_spot_off(net); break;
      default: throw std::logic_error("unknown traffic event");
    }
  }

  const TrafficSpec& spec() const { return spec_; }
  const std::vector<NodeId>& hot_spots() const { return hot_spots_; }
  const std::vector<double>& node_msia() const { return node_msia_; }
  std::size_t sessions_opened() const { return sources_.size(); }
  std::size_t hot_spot_sessions_opened() const { return hs_opened_; }

 private:
  static constexpr int kSessionArrival = 0;
  static constexpr int kPacket = 1;
  static constexpr int kHotSpotOn = 2;
  static constexpr int kHotSpotOff = 3;
  static constexpr double kForever = -1.0;

  struct Source {
    int net_session = 0;
    double mpia_s = 0.0;
    SimTime stop_at = 0.0;  // no packets at or after this time
    bool hot_spot = false;
    bool active = true;
  };

  void schedule_arrival(Network& net, NodeId node, SimTime from) {
    auto& rng = arrival_rng_[static_cast<std::size_t>(node)];
    SimTime t = from + sample_exponential(rng, node_msia_[static_cast<std::size_t>(node)]);
    if (t < end_) net.schedule_traffic(t, kSessionArrival, node);
  }

  void on_session_arrival(Network& net, NodeId src) {
    const auto n = static_cast<std::size_t>(net.topology().node_count());
    auto& rng = endpoint_rng_[static_cast<std::size_t>(src)];
    auto pick = static_cast<NodeId>(rng.index(n - 1));
    NodeId dst = pick >= src ? pick + 1 : pick;
    double duration = sample_exponential(arrival_rng_[static_cast<std::size_t>(src)], spec_.session_duration_mean_s);
    open(net, src, dst, spec_.mpia_s, duration, net.now());
    schedule_arrival(net, src, net.now());
  }

  void open(Network& net, NodeId src, NodeId dst, double mpia, double duration, SimTime at, bool hot = false) {
    Source s;
    s.net_session = net.open_session(src, dst);
    s.mpia_s = mpia;
    s.stop_at = duration < 0.0 ? end_ : std::min(end_, at + duration);
    s.hot_spot = hot;
    sources_.push_back(s);
    const int id = static_cast<int>(sources_.size() - 1);
    if (at == net.now()) {
      on_packet(net, id);
    } else {
      net.schedule_traffic(at, kPacket, id);
    }
  }

  void on_packet(Network& net, int id) {
    Source& s = sources_[static_cast<std::size_t>(id)];
    if (!s.active || net.now() >= s.stop_at) return;
    std::int64_t bits;
    double gap;
    if (spec_.stream == StreamShape::kCbr) {
      bits = std::llround(spec_.mean_packet_size_bits);
      gap = s.mpia_s;
    } else {
      const auto src = static_cast<std::size_t>(net.session(s.net_session).src);
      bits = gvbr_packet_bits(size_rng_[src], spec_.mean_packet_size_bits);
      gap = sample_exponential(gap_rng_[src], s.mpia_s);
    }
    net.session_generate(s.net_session, bits);
    SimTime next = net.now() + gap;
    if (next < s.stop_at) net.schedule_traffic(next, kPacket, id);
  }

  void on_hot_spot_on(Network& net) {
    const int n = net.topology().node_count();
    for (NodeId h : hot_spots_) {
      for (NodeId d = 0; d < n; ++d) {
        if (d == h) continue;
        open(net, h, d, spec_.mpia_hs_s, kForever, net.now(), true);
        hs_sources_.push_back(static_cast<int>(sources_.size() - 1));
        ++hs_opened_;
      }
    }
  }

  void on_hot_spot_off(Network& net) {
    for (int id : hs_sources_) {
      auto& s = sources_[static_cast<std::size_t>(id)];
      s.active = false;
      net.close_session(s.net_session);
    }
    hs_sources_.clear();
  }

  TrafficSpec spec_;
  SimTime start_;
  SimTime end_;
  std::vector<double> node_msia_;
  std::vector<NodeId> hot_spots_;
  std::vector<Rng> arrival_rng_;
  std::vector<Rng> endpoint_rng_;
  std::vector<Rng> size_rng_;
  std::vector<Rng> gap_rng_;
  std::vector<Source> sources_;
  std::vector<int> hs_sources_;
  std::size_t hs_opened_ = 0;
};

}  // namespace antsim
