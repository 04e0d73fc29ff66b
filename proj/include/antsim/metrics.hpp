#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "engine.hpp"
#include "json.hpp"

namespace antsim {

enum class DropCause : std::uint8_t { kBuffer = 0, kTtl, kNoRoute, kCycle };
inline constexpr std::size_t kDropCauseCount = 4;

/// Nearest-rank percentile of an ascending sample: the value at 1-based rank
/// ceil(p/100 * n). Empty samples have no percentile.
inline std::optional<double> percentile_nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::nullopt;
  if (!(p > 0.0)) return sorted.front();
  if (p >= 100.0) return sorted.back();
  // Guard against p/100*n landing a hair above an integer.
  double exact = p / 100.0 * static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

struct DelayHistogram {
  std::vector<double> edges;           // bin i covers [edges[i], edges[i+1])
  std::vector<std::uint64_t> counts;   // size edges.size() + 1; first/last are under/overflow
};

/// Log-spaced bins from 0.1 ms to 100 s, ten per decade.
inline DelayHistogram make_delay_histogram(std::span<const double> delays) {
  DelayHistogram h;
  for (int i = 0; i <= 60; ++i) h.edges.push_back(std::pow(10.0, -4.0 + i / 10.0));
  h.counts.assign(h.edges.size() + 1, 0);
  for (double d : delays) {
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), d);
    ++h.counts[static_cast<std::size_t>(it - h.edges.begin())];
  }
  return h;
}

struct Summary {
  double measured_s = 0.0;
  double throughput_bps = 0.0;
  double offered_bps = 0.0;
  std::uint64_t generated_packets = 0;
  std::uint64_t delivered_packets = 0;
  std::optional<double> delay_mean_s;
  std::optional<double> delay_p50_s;
  std::optional<double> delay_p90_s;
  std::optional<double> delay_p99_s;
  double routing_bits = 0.0;
  double overhead = 0.0;
  std::uint64_t drops_buffer = 0;
  std::uint64_t drops_ttl = 0;
  std::uint64_t drops_no_route = 0;
  std::optional<double> power;
  DelayHistogram histogram;
};

/// Throughput over 90th-percentile delay; absent without a delay value.
inline std::optional<double> power(double throughput_bps, std::optional<double> delay_p90_s) {
  if (!delay_p90_s || !(*delay_p90_s > 0.0)) return std::nullopt;
  return throughput_bps / *delay_p90_s;
}

inline std::optional<double> power(const Summary& s) { return power(s.throughput_bps, s.delay_p90_s); }

struct WindowPoint {
  double t_start_s = 0.0;  // relative to measurement start
  double throughput_bps = 0.0;
  double offered_bps = 0.0;
  std::optional<double> mean_delay_s;
};

/// Collects data-plane measurements over [start, end]; samples outside that
/// interval are ignored.
class MetricsCollector {
 public:
  MetricsCollector(SimTime start, SimTime end, double bin_width_s = 1.0)
      : start_(start), end_(end), bin_width_(bin_width_s) {
    if (!(end >= start)) throw std::invalid_argument("measurement end precedes start");
    if (!(bin_width_s > 0.0)) throw std::invalid_argument("bin width must be positive");
    auto bins = static_cast<std::size_t>(std::ceil((end - start) / bin_width_s - 1e-9));
    bins = std::max<std::size_t>(bins, 1);
    bins_.assign(bins, Bin{});
  }

  SimTime start() const { return start_; }
  SimTime end() const { return end_; }
  double bin_width() const { return bin_width_; }
  bool measuring(SimTime t) const { return t >= start_ && t <= end_; }

  void record_generated(SimTime t, std::int64_t bits) {
    if (!measuring(t)) return;
    ++generated_packets_;
    bin(t).offered_bits += static_cast<double>(bits);
    offered_bits_ += static_cast<double>(bits);
  }

  void record_delivered(SimTime t, std::int64_t bits, double delay_s) {
    if (!measuring(t)) return;
    Bin& b = bin(t);
    b.delivered_bits += static_cast<double>(bits);
    b.delay_sum += delay_s;
    ++b.delivered;
    delivered_bits_ += static_cast<double>(bits);
    delays_.push_back(delay_s);
  }

  void record_routing_bits(SimTime t, std::int64_t bits) {
    if (!measuring(t)) return;
    routing_bits_ += static_cast<double>(bits);
  }

  void record_drop(SimTime t, DropCause cause) {
    if (!measuring(t)) return;
    ++drops_[static_cast<std::size_t>(cause)];
  }

  double delivered_bits() const { return delivered_bits_; }
  double routing_bits() const { return routing_bits_; }
  std::span<const double> delays() const { return delays_; }
  std::uint64_t drops(DropCause c) const { return drops_[static_cast<std::size_t>(c)]; }

  Summary summarize(double total_link_bandwidth_bps) const {
    Summary s;
    s.measured_s = end_ - start_;
    const double secs = s.measured_s > 0.0 ? s.measured_s : 1.0;
    s.throughput_bps = delivered_bits_ / secs;
    s.offered_bps = offered_bits_ / secs;
    s.generated_packets = generated_packets_;
    s.delivered_packets = delays_.size();
    std::vector<double> sorted(delays_.begin(), delays_.end());
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty()) {
      double sum = 0.0;
      for (double d : sorted) sum += d;
      s.delay_mean_s = sum / static_cast<double>(sorted.size());
    }
    s.delay_p50_s = percentile_nearest_rank(sorted, 50.0);
    s.delay_p90_s = percentile_nearest_rank(sorted, 90.0);
    s.delay_p99_s = percentile_nearest_rank(sorted, 99.0);
    s.routing_bits = routing_bits_;
    s.overhead = total_link_bandwidth_bps > 0.0 ? routing_bits_ / (total_link_bandwidth_bps * secs) : 0.0;
    s.drops_buffer = drops(DropCause::kBuffer);
    s.drops_ttl = drops(DropCause::kTtl);
    s.drops_no_route = drops(DropCause::kNoRoute);
    s.power = power(s.throughput_bps, s.delay_p90_s);
    s.histogram = make_delay_histogram(sorted);
    return s;
  }

  /// Non-overlapping windows; `window_s` must be a whole number of bins.
  std::vector<WindowPoint> windowed_series(double window_s) const {
    double ratio = window_s / bin_width_;
    auto per = static_cast<std::size_t>(std::llround(ratio));
    if (per == 0 || std::abs(ratio - static_cast<double>(per)) > 1e-9) {
      throw std::invalid_argument("window must be a positive multiple of the bin width");
    }
    std::vector<WindowPoint> out;
    for (std::size_t i = 0; i < bins_.size(); i += per) {
      Bin acc;
      std::size_t n = 0;
      for (std::size_t k = i; k < std::min(bins_.size(), i + per); ++k, ++n) {
        acc.delivered_bits += bins_[k].delivered_bits;
        acc.offered_bits += bins_[k].offered_bits;
        acc.delay_sum += bins_[k].delay_sum;
        acc.delivered += bins_[k].delivered;
      }
      double span = std::min(window_s, (end_ - start_) - static_cast<double>(i) * bin_width_);
      if (!(span > 0.0)) span = window_s;
      WindowPoint p;
      p.t_start_s = static_cast<double>(i) * bin_width_;
      p.throughput_bps = acc.delivered_bits / span;
      p.offered_bps = acc.offered_bits / span;
      if (acc.delivered > 0) p.mean_delay_s = acc.delay_sum / static_cast<double>(acc.delivered);
      out.push_back(p);
    }
    return out;
  }

 private:
  struct Bin {
    double delivered_bits = 0.0;
    double offered_bits = 0.0;
    double delay_sum = 0.0;
    std::uint64_t delivered = 0;
  };

  Bin& bin(SimTime t) {
    auto i = static_cast<std::size_t>((t - start_) / bin_width_);
    return bins_[std::min(i, bins_.size() - 1)];
  }

  SimTime start_;
  SimTime end_;
  double bin_width_;
  std::vector<Bin> bins_;
  std::vector<double> delays_;
  double delivered_bits_ = 0.0;
  double offered_bits_ = 0.0;
  double routing_bits_ = 0.0;
  std::uint64_t generated_packets_ = 0;
  std::array<std::uint64_t, kDropCauseCount> drops_{};
};

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json summary_to_json(const Summary& s) {
  nlohmann::json j;
  j["measured_s"] = s.measured_s;
  j["throughput_bps"] = s.throughput_bps;
  j["offered_bps"] = s.offered_bps;
  j["generated_packets"] = s.generated_packets;
  j["delivered_packets"] = s.delivered_packets;
  j["delay_mean_s"] = optional_json(s.delay_mean_s);
  j["delay_p50_s"] = optional_json(s.delay_p50_s);
  j["delay_p90_s"] = optional_json(s.delay_p90_s);
  j["delay_p99_s"] = optional_json(s.delay_p99_s);
  j["routing_bits"] = s.routing_bits;
  j["overhead"] = s.overhead;
  j["drops"] = {{"buffer", s.drops_buffer}, {"ttl", s.drops_ttl}, {"no_route", s.drops_no_route}};
  j["power"] = optional_json(s.power);
  j["delay_histogram"] = {{"edges_s", s.histogram.edges}, {"counts", s.histogram.counts}};
  return j;
}

}  // namespace antsim
