#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "antnet.hpp"
#include "baselines.hpp"
#include "json.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "routing.hpp"
#include "topology.hpp"
#include "traffic.hpp"

namespace antsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {"antnet", "ospf", "spf", "bf", "qr", "pqr", "daemon"};
  return names;
}

struct ExperimentConfig {
  std::string name = "experiment";
  std::string topology = "simplenet";
  std::string algorithm = "antnet";
  double run_length_s = 1000.0;
  double warmup_s = 500.0;
  int trials = 10;
  std::uint64_t master_seed = 1;
  double series_window_s = 5.0;
  std::string output_dir;

  NetworkParams network;
  TrafficSpec traffic;
  AntNetParams antnet;
  LinkStateParams ospf{false, 30.0, 0.006, {}};
  LinkStateParams spf{true, 3.0, 0.006, {}};
  DistanceVectorParams bf{0.8, 0.002, {}};
  QRoutingParams qr{false};
  QRoutingParams pqr{true};
  DaemonParams daemon;

  std::vector<double> sweep_msia_s;  // empty: single load point
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

/// Reads keys out of a JSON object and reports any key left unread.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where("") + "must be an object");
  }

  std::string where(const std::string& key) const {
    if (path_.empty()) return key.empty() ? "config: " : key + ": ";
    return key.empty() ? path_ + ": " : path_ + "." + key + ": ";
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const nlohmann::json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (auto* v = get(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (auto* v = get(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + "expected an integer");
      out = v->get<int>();
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (auto* v = get(key)) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
        throw ConfigError(where(key) + "expected a nonnegative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (auto* v = get(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + "expected a string");
      out = v->get<std::string>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (auto* v = get(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + "expected true or false");
      out = v->get<bool>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (auto* v = get(key)) {
      if (!v->is_array()) throw ConfigError(where(key) + "expected an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) throw ConfigError(where(key) + "expected an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + "unknown key");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_cost_params(ObjectReader& r, LinkCostParams& c) {
  r.number("cost_exp_decay", c.exp_decay);
  r.number("cost_window_weight", c.window_weight);
  r.number("cost_slope", c.slope);
}

inline void read_link_state(const nlohmann::json& j, const std::string& path, LinkStateParams& p) {
  ObjectReader r(j, path);
  r.number("interval_s", p.interval_s);
  r.number("elaboration_s", p.elaboration_s);
  read_cost_params(r, p.cost);
  r.finish();
  if (!(p.interval_s > 0.0)) throw ConfigError(path + ".interval_s: must be > 0");
  if (!(p.elaboration_s >= 0.0)) throw ConfigError(path + ".elaboration_s: must be >= 0");
}

inline void read_q(const nlohmann::json& j, const std::string& path, QRoutingParams& p) {
  ObjectReader r(j, path);
  r.number("learning_rate", p.learning_rate);
  r.number("elaboration_s", p.elaboration_s);
  r.number("feedback_bits", p.feedback_bits);
  if (p.predictive) {
    r.number("beta", p.beta);
    r.number("gamma", p.gamma);
  }
  r.finish();
  if (!(p.learning_rate > 0.0 && p.learning_rate <= 1.0)) throw ConfigError(path + ".learning_rate: must be in (0, 1]");
  if (!(p.elaboration_s >= 0.0)) throw ConfigError(path + ".elaboration_s: must be >= 0");
}

inline Temporal parse_temporal(const std::string& s, const std::string& where) {
  if (s == "P") return Temporal::kPoisson;
  if (s == "F") return Temporal::kFixed;
  if (s == "TMPHS") return Temporal::kTemporaryHotSpots;
  throw ConfigError(where + "expected one of P, F, TMPHS");
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::ObjectReader;
  ExperimentConfig c;
  ObjectReader r(j, "");
  r.string("name", c.name);
  r.string("topology", c.topology);
  r.string("algorithm", c.algorithm);
  r.number("run_length_s", c.run_length_s);
  r.number("warmup_s", c.warmup_s);
  r.integer("trials", c.trials);
  r.seed("master_seed", c.master_seed);
  r.number("series_window_s", c.series_window_s);
  r.string("output_dir", c.output_dir);

  if (std::find(algorithm_names().begin(), algorithm_names().end(), c.algorithm) == algorithm_names().end()) {
    throw ConfigError("algorithm: unknown algorithm '" + c.algorithm + "'");
  }
  if (!(c.run_length_s > 0.0)) throw ConfigError("run_length_s: must be > 0");
  if (!(c.warmup_s >= 0.0)) throw ConfigError("warmup_s: must be >= 0");
  if (c.trials < 1) throw ConfigError("trials: must be >= 1");
  if (!(c.series_window_s > 0.0) || std::abs(c.series_window_s - std::round(c.series_window_s)) > 1e-9) {
    throw ConfigError("series_window_s: must be a positive whole number of seconds");
  }

  if (auto* n = r.get("network")) {
    ObjectReader nr(*n, "network");
    nr.number("buffer_bits", c.network.buffer_bits);
    nr.number("data_ttl_s", c.network.data_ttl_s);
    nr.number("ant_ttl_s", c.network.ant_ttl_s);
    nr.number("service_time_s", c.network.service_time_s);
    nr.integer("window_size", c.network.window_size);
    nr.finish();
    if (!(c.network.buffer_bits > 0.0)) throw ConfigError("network.buffer_bits: must be > 0");
    if (!(c.network.data_ttl_s > 0.0)) throw ConfigError("network.data_ttl_s: must be > 0");
    if (!(c.network.ant_ttl_s > 0.0)) throw ConfigError("network.ant_ttl_s: must be > 0");
    if (!(c.network.service_time_s >= 0.0)) throw ConfigError("network.service_time_s: must be >= 0");
    if (c.network.window_size < 1) throw ConfigError("network.window_size: must be >= 1");
  }

  if (auto* t = r.get("traffic")) {
    ObjectReader tr(*t, "traffic");
    TrafficSpec& s = c.traffic;
    std::string temporal = std::string(to_string(s.temporal));
    tr.string("temporal", temporal);
    s.temporal = detail::parse_temporal(temporal, tr.where("temporal"));
    std::string spatial = std::string(to_string(s.spatial));
    tr.string("spatial", spatial);
    if (spatial == "U") {
      s.spatial = Spatial::kUniform;
    } else if (spatial == "R") {
      s.spatial = Spatial::kRandom;
    } else {
      throw ConfigError("traffic.spatial: expected U or R");
    }
    std::string stream = std::string(to_string(s.stream));
    tr.string("stream", stream);
    if (stream == "CBR") {
      s.stream = StreamShape::kCbr;
    } else if (stream == "GVBR") {
      s.stream = StreamShape::kGvbr;
    } else {
      throw ConfigError("traffic.stream: expected CBR or GVBR");
    }
    tr.number("msia_s", s.msia_s);
    tr.number("mpia_s", s.mpia_s);
    tr.number("mean_packet_size_bits", s.mean_packet_size_bits);
    tr.number("session_duration_mean_s", s.session_duration_mean_s);
    tr.integer("hs_count", s.hs_count);
    tr.number("mpia_hs_s", s.mpia_hs_s);
    tr.number("hot_spot_on_s", s.hot_spot_on_s);
    tr.number("hot_spot_off_s", s.hot_spot_off_s);
    if (auto* hs = tr.get("hot_spots")) {
      if (!hs->is_array()) throw ConfigError("traffic.hot_spots: expected an array of node ids");
      for (const auto& v : *hs) {
        if (!v.is_number_integer()) throw ConfigError("traffic.hot_spots: expected an array of node ids");
        s.hot_spots.push_back(v.get<int>());
      }
    }
    if (auto* fp = tr.get("fixed_pairs")) {
      if (!fp->is_array()) throw ConfigError("traffic.fixed_pairs: expected an array of [src, dst] pairs");
      for (const auto& v : *fp) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
          throw ConfigError("traffic.fixed_pairs: expected an array of [src, dst] pairs");
        }
        s.fixed_pairs.emplace_back(v[0].get<int>(), v[1].get<int>());
      }
    }
    std::vector<double> spread;
    tr.numbers("random_spread", spread);
    if (!spread.empty()) {
      if (spread.size() != 2) throw ConfigError("traffic.random_spread: expected [lo, hi]");
      s.random_spread_lo = spread[0];
      s.random_spread_hi = spread[1];
    }
    tr.finish();
  }

  if (auto* a = r.get("antnet")) {
    ObjectReader ar(*a, "antnet");
    AntNetParams& p = c.antnet;
    ar.number("launch_interval_s", p.launch_interval_s);
    ar.number("alpha", p.alpha);
    ar.number("eta", p.eta);
    ar.number("window_fraction", p.window_fraction);
    ar.number("z", p.z);
    ar.number("c1", p.c1);
    ar.number("c2", p.c2);
    ar.number("squash_gain", p.squash_gain);
    ar.number("data_exponent", p.data_exponent);
    ar.number("elaboration_s", p.elaboration_s);
    ar.finish();
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto* o = r.get("ospf")) detail::read_link_state(*o, "ospf", c.ospf);
  if (auto* o = r.get("spf")) detail::read_link_state(*o, "spf", c.spf);
  if (auto* o = r.get("bf")) {
    ObjectReader br(*o, "bf");
    br.number("interval_s", c.bf.interval_s);
    br.number("elaboration_s", c.bf.elaboration_s);
    detail::read_cost_params(br, c.bf.cost);
    br.finish();
    if (!(c.bf.interval_s > 0.0)) throw ConfigError("bf.interval_s: must be > 0");
  }
  if (auto* o = r.get("qr")) detail::read_q(*o, "qr", c.qr);
  if (auto* o = r.get("pqr")) detail::read_q(*o, "pqr", c.pqr);
  if (auto* o = r.get("daemon")) {
    ObjectReader dr(*o, "daemon");
    dr.number("queue_mix", c.daemon.queue_mix);
    dr.number("average_decay", c.daemon.average_decay);
    dr.finish();
  }
  if (auto* s = r.get("sweep")) {
    ObjectReader sr(*s, "sweep");
    sr.numbers("msia_s", c.sweep_msia_s);
    sr.finish();
    for (double m : c.sweep_msia_s) {
      if (!(m > 0.0)) throw ConfigError("sweep.msia_s: values must be > 0");
    }
  }
  r.finish();
  c.qr.mean_packet_size_bits = c.traffic.mean_packet_size_bits;
  c.pqr.mean_packet_size_bits = c.traffic.mean_packet_size_bits;
  return c;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Trials

inline std::unique_ptr<RoutingAlgorithm> make_algorithm(const ExperimentConfig& c) {
  if (c.algorithm == "antnet") return std::make_unique<AntNetRouting>(c.antnet);
  if (c.algorithm == "ospf") return std::make_unique<LinkStateRouting>(c.ospf);
  if (c.algorithm == "spf") return std::make_unique<LinkStateRouting>(c.spf);
  if (c.algorithm == "bf") return std::make_unique<DistanceVectorRouting>(c.bf);
  if (c.algorithm == "qr") return std::make_unique<QRouting>(c.qr);
  if (c.algorithm == "pqr") return std::make_unique<QRouting>(c.pqr);
  if (c.algorithm == "daemon") return std::make_unique<DaemonRouting>(c.daemon);
  throw ConfigError("algorithm: unknown algorithm '" + c.algorithm + "'");
}

/// One fully wired trial: topology, network, routing protocol and workload.
/// Data traffic starts at the end of the warmup.
class Simulation {
 public:
  Simulation(const ExperimentConfig& c, std::uint64_t seed)
      : topo_(resolve_topology(c.topology)), algo_(make_algorithm(c)),
        net_(std::make_unique<Network>(topo_, c.network, seed, c.warmup_s, c.warmup_s + c.run_length_s)),
        warmup_(c.warmup_s), end_(c.warmup_s + c.run_length_s) {
    net_->set_routing(algo_.get());
    net_->start();
    workload_ = std::make_unique<Workload>(*net_, c.traffic, warmup_, end_);
    workload_->install(*net_);
  }

  /// Advances to `t`, signalling the end of the warmup on the way.
  void run_until(SimTime t) {
    if (!warmup_signalled_ && t >= warmup_) {
      net_->run_until(warmup_);
      algo_->on_warmup_end(*net_);
      warmup_signalled_ = true;
    }
    net_->run_until(t);
  }

  void run_to_end() { run_until(end_); }

  const Topology& topology() const { return topo_; }
  Network& network() { return *net_; }
  RoutingAlgorithm& algorithm() { return *algo_; }
  Workload& workload() { return *workload_; }
  SimTime warmup_end() const { return warmup_; }
  SimTime end() const { return end_; }

 private:
  Topology topo_;
  std::unique_ptr<RoutingAlgorithm> algo_;
  std::unique_ptr<Network> net_;
  std::unique_ptr<Workload> workload_;
  SimTime warmup_;
  SimTime end_;
  bool warmup_signalled_ = false;
};

struct TrialResult {
  int index = 0;
  std::uint64_t seed = 0;
  Summary summary;
  std::vector<WindowPoint> series;
  PacketCounters counters;
  std::array<std::int64_t, kPacketKindCount> live{};
  std::uint64_t events = 0;
};

inline TrialResult run_trial(const ExperimentConfig& c, int index) {
  TrialResult r;
  r.index = index;
  r.seed = c.master_seed + static_cast<std::uint64_t>(index);
  Simulation sim(c, r.seed);
  sim.run_to_end();
  Network& net = sim.network();
  r.summary = net.metrics().summarize(sim.topology().total_bandwidth_bps());
  r.series = net.metrics().windowed_series(c.series_window_s);
  r.counters = net.counters();
  for (std::size_t k = 0; k < kPacketKindCount; ++k) r.live[k] = net.packets().live(static_cast<PacketKind>(k));
  r.events = net.events_scheduled();
  return r;
}

inline nlohmann::json trial_to_json(const ExperimentConfig& c, const TrialResult& r) {
  nlohmann::json j;
  j["experiment"] = c.name;
  j["algorithm"] = c.algorithm;
  j["topology"] = c.topology;
  j["trial"] = r.index;
  j["seed"] = r.seed;
  j["msia_s"] = c.traffic.msia_s;
  j["summary"] = summary_to_json(r.summary);
  nlohmann::json packets;
  for (std::size_t k = 0; k < kPacketKindCount; ++k) {
    packets[std::string(to_string(static_cast<PacketKind>(k)))] = {
        {"created", r.counters.created[k]},
        {"delivered", r.counters.delivered[k]},
        {"dropped", r.counters.dropped[k]},
        {"in_flight", r.live[k]}};
  }
  j["packets"] = packets;
  j["events"] = r.events;
  return j;
}

struct Aggregate {
  int trials = 0;
  double throughput_bps = 0.0;
  double offered_bps = 0.0;
  double overhead = 0.0;
  std::optional<double> delay_mean_s;
  std::optional<double> delay_p90_s;
  std::optional<double> delay_p99_s;
  std::optional<double> power;
  double drops_buffer = 0.0;
  double drops_ttl = 0.0;
  double drops_no_route = 0.0;
};

/// Cross-trial means; optional values average over the trials that have them.
inline Aggregate aggregate(const std::vector<TrialResult>& trials) {
  Aggregate a;
  a.trials = static_cast<int>(trials.size());
  if (trials.empty()) return a;
  auto mean_opt = [&](auto get) -> std::optional<double> {
    double s = 0.0;
    int n = 0;
    for (const auto& t : trials) {
      if (auto v = get(t.summary)) {
        s += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return s / n;
  };
  const double n = static_cast<double>(trials.size());
  for (const auto& t : trials) {
    a.throughput_bps += t.summary.throughput_bps / n;
    a.offered_bps += t.summary.offered_bps / n;
    a.overhead += t.summary.overhead / n;
    a.drops_buffer += static_cast<double>(t.summary.drops_buffer) / n;
    a.drops_ttl += static_cast<double>(t.summary.drops_ttl) / n;
    a.drops_no_route += static_cast<double>(t.summary.drops_no_route) / n;
  }
  a.delay_mean_s = mean_opt([](const Summary& s) { return s.delay_mean_s; });
  a.delay_p90_s = mean_opt([](const Summary& s) { return s.delay_p90_s; });
  a.delay_p99_s = mean_opt([](const Summary& s) { return s.delay_p99_s; });
  a.power = mean_opt([](const Summary& s) { return s.power; });
  return a;
}

inline nlohmann::json aggregate_to_json(const ExperimentConfig& c, const std::vector<TrialResult>& trials) {
  const Aggregate a = aggregate(trials);
  nlohmann::json j;
  j["experiment"] = c.name;
  j["algorithm"] = c.algorithm;
  j["topology"] = c.topology;
  j["msia_s"] = c.traffic.msia_s;
  j["trials"] = a.trials;
  j["master_seed"] = c.master_seed;
  j["throughput_bps"] = a.throughput_bps;
  j["offered_bps"] = a.offered_bps;
  j["overhead"] = a.overhead;
  j["delay_mean_s"] = optional_json(a.delay_mean_s);
  j["delay_p90_s"] = optional_json(a.delay_p90_s);
  j["delay_p99_s"] = optional_json(a.delay_p99_s);
  j["power"] = optional_json(a.power);
  j["drops"] = {{"buffer", a.drops_buffer}, {"ttl", a.drops_ttl}, {"no_route", a.drops_no_route}};
  nlohmann::json per = nlohmann::json::array();
  for (const auto& t : trials) per.push_back(t.summary.throughput_bps);
  j["per_trial_throughput_bps"] = per;
  return j;
}

/// Windowed series with a cumulative-average throughput column.
inline std::string series_csv(const std::vector<WindowPoint>& series, double window_s) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "time_s,throughput_bps,mean_delay_s,offered_bps,cumulative_throughput_bps\n";
  double delivered = 0.0;
  double elapsed = 0.0;
  for (const auto& p : series) {
    delivered += p.throughput_bps * window_s;
    elapsed += window_s;
    out << p.t_start_s << ',' << p.throughput_bps << ',';
    if (p.mean_delay_s) out << *p.mean_delay_s;
    out << ',' << p.offered_bps << ',' << delivered / elapsed << '\n';
  }
  return out.str();
}

/// Point-wise mean of equally long series; delay averages over the trials
/// that delivered something in that window.
inline std::vector<WindowPoint> mean_series(const std::vector<TrialResult>& trials) {
  std::vector<WindowPoint> out;
  if (trials.empty()) return out;
  out = trials.front().series;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double thr = 0.0;
    double off = 0.0;
    double dsum = 0.0;
    int dn = 0;
    for (const auto& t : trials) {
      thr += t.series[i].throughput_bps;
      off += t.series[i].offered_bps;
      if (t.series[i].mean_delay_s) {
        dsum += *t.series[i].mean_delay_s;
        ++dn;
      }
    }
    out[i].throughput_bps = thr / static_cast<double>(trials.size());
    out[i].offered_bps = off / static_cast<double>(trials.size());
    out[i].mean_delay_s = dn > 0 ? std::optional<double>(dsum / dn) : std::nullopt;
  }
  return out;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

/// Runs every trial of one load point and writes its result files into `dir`.
inline std::vector<TrialResult> run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir,
                                               std::ostream* log = nullptr) {
  std::filesystem::create_directories(dir);
  std::vector<TrialResult> results;
  for (int i = 0; i < c.trials; ++i) {
    results.push_back(run_trial(c, i));
    const TrialResult& r = results.back();
    write_text(dir / ("trial_" + std::to_string(i) + ".json"), trial_to_json(c, r).dump(2) + "\n");
    write_text(dir / ("series_trial_" + std::to_string(i) + ".csv"), series_csv(r.series, c.series_window_s));
    if (log != nullptr) {
      *log << c.algorithm << " trial " << i << " seed " << r.seed << ": throughput "
           << r.summary.throughput_bps << " bit/s, p90 delay "
           << (r.summary.delay_p90_s ? std::to_string(*r.summary.delay_p90_s) : std::string("n/a"))
           << " s, overhead " << r.summary.overhead << '\n';
    }
  }
  write_text(dir / "aggregate.json", aggregate_to_json(c, results).dump(2) + "\n");
  write_text(dir / "series_mean.csv", series_csv(mean_series(results), c.series_window_s));
  return results;
}

inline std::string format_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

/// Runs the configured experiment, once per entry of the MSIA sweep if any.
inline void run_configured(const ExperimentConfig& c, const std::filesystem::path& dir, std::ostream* log = nullptr) {
  if (c.sweep_msia_s.empty()) {
    run_experiment(c, dir, log);
    return;
  }
  std::ostringstream table;
  table << std::setprecision(10) << "msia_s,throughput_bps,offered_bps,delay_p90_s,overhead\n";
  for (double m : c.sweep_msia_s) {
    ExperimentConfig point = c;
    point.traffic.msia_s = m;
    auto results = run_experiment(point, dir / ("msia_" + format_number(m)), log);
    const Aggregate a = aggregate(results);
    table << m << ',' << a.throughput_bps << ',' << a.offered_bps << ',';
    if (a.delay_p90_s) table << *a.delay_p90_s;
    table << ',' << a.overhead << '\n';
  }
  write_text(dir / "sweep.csv", table.str());
}

// ---------------------------------------------------------------------------
// Ant launch-rate sweep

struct RateRow {
  double interval_s = 0.0;
  double overhead = 0.0;
  std::optional<double> power;
  double normalized_power = 0.0;
  double throughput_bps = 0.0;
  std::optional<double> delay_p90_s;
};

/// Normalises each row's power by the sweep maximum (rows without power get 0).
inline void normalize_power(std::vector<RateRow>& rows) {
  double best = 0.0;
  for (const auto& r : rows)
    if (r.power) best = std::max(best, *r.power);
  for (auto& r : rows) r.normalized_power = (r.power && best > 0.0) ? *r.power / best : 0.0;
}

inline std::vector<RateRow> sweep_ant_rate(const ExperimentConfig& base, const std::vector<double>& intervals,
                                           const std::filesystem::path* dir = nullptr, std::ostream* log = nullptr) {
  if (base.algorithm != "antnet") throw ConfigError("algorithm: the rate sweep requires antnet");
  std::vector<RateRow> rows;
  for (double dt : intervals) {
    if (!(dt > 0.0)) throw ConfigError("rates: launch intervals must be > 0");
    ExperimentConfig c = base;
    c.antnet.launch_interval_s = dt;
    std::vector<TrialResult> results;
    if (dir != nullptr) {
      results = run_experiment(c, *dir / ("interval_" + format_number(dt)), log);
    } else {
      for (int i = 0; i < c.trials; ++i) results.push_back(run_trial(c, i));
    }
    const Aggregate a = aggregate(results);
    RateRow row;
    row.interval_s = dt;
    row.overhead = a.overhead;
    row.power = a.power;
    row.throughput_bps = a.throughput_bps;
    row.delay_p90_s = a.delay_p90_s;
    rows.push_back(row);
  }
  normalize_power(rows);
  return rows;
}

inline std::string rate_rows_csv(const std::vector<RateRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(10) << "interval_s,overhead,normalized_power,power,throughput_bps,delay_p90_s\n";
  for (const auto& r : rows) {
    out << r.interval_s << ',' << r.overhead << ',' << r.normalized_power << ',';
    if (r.power) out << *r.power;
    out << ',' << r.throughput_bps << ',';
    if (r.delay_p90_s) out << *r.delay_p90_s;
    out << '\n';
  }
  return out.str();
}

}  // namespace antsim
