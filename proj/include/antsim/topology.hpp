#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace antsim {

/// Zero-based node index. Files and user-facing output number nodes from 1.
using NodeId = int;
/// Index into Topology::links().
using LinkId = int;

inline constexpr LinkId kNoLink = -1;

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An undirected link as written in topology files (1-based endpoints).
struct LinkSpec {
  int a = 0;
  int b = 0;
  double bandwidth_bps = 0.0;
  double prop_delay_s = 0.0;
};

struct Link {
  NodeId from = 0;
  NodeId to = 0;
  double bandwidth_bps = 0.0;
  double prop_delay_s = 0.0;
  LinkId reverse = kNoLink;
};

/// Directed graph in which every link has a mirrored reverse link.
class Topology {
 public:
  Topology() = default;

  Topology(std::string name, int node_count, const std::vector<LinkSpec>& specs)
      : name_(std::move(name)), node_count_(node_count) {
    if (node_count < 1) throw TopologyError("topology needs at least one node");
    out_.assign(static_cast<std::size_t>(node_count), {});
    for (const auto& s : specs) {
      if (s.a < 1 || s.a > node_count || s.b < 1 || s.b > node_count) {
        throw TopologyError("link endpoint out of range: " + std::to_string(s.a) + "-" +
                            std::to_string(s.b));
      }
      if (s.a == s.b) throw TopologyError("self-loop at node " + std::to_string(s.a));
      if (!(s.bandwidth_bps > 0.0)) throw TopologyError("link bandwidth must be positive");
      if (!(s.prop_delay_s >= 0.0)) throw TopologyError("propagation delay must be >= 0");
      NodeId a = s.a - 1;
      NodeId b = s.b - 1;
      if (link_between(a, b)) {
        throw TopologyError("duplicate link " + std::to_string(s.a) + "-" + std::to_string(s.b));
      }
      auto forward = static_cast<LinkId>(links_.size());
      links_.push_back(Link{a, b, s.bandwidth_bps, s.prop_delay_s, forward + 1});
      links_.push_back(Link{b, a, s.bandwidth_bps, s.prop_delay_s, forward});
      out_[static_cast<std::size_t>(a)].push_back(forward);
      out_[static_cast<std::size_t>(b)].push_back(forward + 1);
    }
    // Neighbour order is by neighbour id, which fixes tie-breaking everywhere.
    for (auto& v : out_) {
      std::sort(v.begin(), v.end(), [&](LinkId x, LinkId y) { return link(x).to < link(y).to; });
    }
    if (!is_connected()) throw TopologyError("topology '" + name_ + "' is not connected");
  }

  const std::string& name() const { return name_; }
  int node_count() const { return node_count_; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(LinkId id) const { return links_[static_cast<std::size_t>(id)]; }
  std::span<const LinkId> out_links(NodeId n) const { return out_[static_cast<std::size_t>(n)]; }
  int degree(NodeId n) const { return static_cast<int>(out_links(n).size()); }

  std::optional<LinkId> link_between(NodeId a, NodeId b) const {
    for (LinkId l : out_[static_cast<std::size_t>(a)]) {
      if (links_[static_cast<std::size_t>(l)].to == b) return l;
    }
    return std::nullopt;
  }

  /// Position of neighbour `n` in out_links(node), or -1.
  int neighbor_slot(NodeId node, NodeId n) const {
    auto ls = out_links(node);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (link(ls[i]).to == n) return static_cast<int>(i);
    }
    return -1;
  }

  double total_bandwidth_bps() const {
    double sum = 0.0;
    for (const auto& l : links_) sum += l.bandwidth_bps;
    return sum;
  }

  std::vector<LinkSpec> undirected_specs() const {
    std::vector<LinkSpec> out;
    for (std::size_t i = 0; i < links_.size(); i += 2) {
      const Link& l = links_[i];
      out.push_back(LinkSpec{l.from + 1, l.to + 1, l.bandwidth_bps, l.prop_delay_s});
    }
    return out;
  }

  /// Breadth-first hop distances from `src`; -1 when unreachable.
  std::vector<int> hop_distances(NodeId src) const {
    std::vector<int> dist(static_cast<std::size_t>(node_count_), -1);
    std::queue<NodeId> q;
    dist[static_cast<std::size_t>(src)] = 0;
    q.push(src);
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (LinkId l : out_links(u)) {
        NodeId v = link(l).to;
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          q.push(v);
        }
      }
    }
    return dist;
  }

  bool is_connected() const {
    auto d = hop_distances(0);
    return std::all_of(d.begin(), d.end(), [](int x) { return x >= 0; });
  }

 private:
  std::string name_;
  int node_count_ = 0;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
};

struct TopologyStats {
  double mean_hops = 0.0;
  double stddev_hops = 0.0;
  int node_count = 0;
};

/// Mean and population standard deviation of hop distances over all ordered
/// pairs of distinct nodes.
inline TopologyStats topology_stats(const Topology& topo) {
  const int n = topo.node_count();
  if (n < 2) return TopologyStats{0.0, 0.0, n};
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t pairs = 0;
  for (NodeId s = 0; s < n; ++s) {
    auto d = topo.hop_distances(s);
    for (NodeId t = 0; t < n; ++t) {
      if (t == s) continue;
      if (d[static_cast<std::size_t>(t)] < 0) throw TopologyError("disconnected topology");
      double h = d[static_cast<std::size_t>(t)];
      sum += h;
      sum_sq += h * h;
      ++pairs;
    }
  }
  double mean = sum / static_cast<double>(pairs);
  double var = sum_sq / static_cast<double>(pairs) - mean * mean;
  return TopologyStats{mean, std::sqrt(std::max(0.0, var)), n};
}

// ---------------------------------------------------------------------------
// File format: {"nodes": N, "links": [{"a":1,"b":2,"bandwidth_bps":..,"prop_delay_s":..}]}

inline Topology parse_topology(const nlohmann::json& j, std::string fallback_name = "custom") {
  if (!j.is_object()) throw TopologyError("topology document must be a JSON object");
  if (!j.contains("nodes") || !j["nodes"].is_number_integer()) {
    throw TopologyError("topology: 'nodes' must be an integer node count");
  }
  if (!j.contains("links") || !j["links"].is_array()) {
    throw TopologyError("topology: 'links' must be an array");
  }
  std::vector<LinkSpec> specs;
  for (const auto& l : j["links"]) {
    for (const char* key : {"a", "b", "bandwidth_bps", "prop_delay_s"}) {
      if (!l.contains(key) || !l[key].is_number()) {
        throw TopologyError(std::string("topology link: missing numeric '") + key + "'");
      }
    }
    specs.push_back(LinkSpec{l["a"].get<int>(), l["b"].get<int>(), l["bandwidth_bps"].get<double>(),
                             l["prop_delay_s"].get<double>()});
  }
  std::string name = j.value("name", fallback_name);
  return Topology(name, j["nodes"].get<int>(), specs);
}

inline Topology load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw TopologyError("topology file " + path + ": " + e.what());
  }
  return parse_topology(j, path);
}

inline nlohmann::json topology_to_json(const Topology& topo) {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& s : topo.undirected_specs()) {
    links.push_back({{"a", s.a}, {"b", s.b}, {"bandwidth_bps", s.bandwidth_bps},
                     {"prop_delay_s", s.prop_delay_s}});
  }
  return {{"name", topo.name()}, {"nodes", topo.node_count()}, {"links", links}};
}

// ---------------------------------------------------------------------------
// Built-in testbeds. The same graphs ship as data/topologies/*.json.

namespace detail {

struct Edge {
  int a;
  int b;
  double delay_s;
};

inline std::vector<LinkSpec> with_bandwidth(std::span<const Edge> edges, double bw) {
  std::vector<LinkSpec> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back(LinkSpec{e.a, e.b, bw, e.delay_s});
  return out;
}

inline constexpr Edge kSimpleNet[] = {
    {1, 2, 0.001}, {1, 3, 0.001}, {1, 8, 0.001}, {2, 4, 0.001}, {4, 5, 0.001},
    {3, 5, 0.001}, {5, 6, 0.001}, {6, 7, 0.001}, {7, 8, 0.001},
};

// Delays map the usual NSFNET route lengths (300-4800 km) onto 4-20 ms.
inline constexpr Edge kNsfNet[] = {
    {1, 2, 0.0104},  {1, 3, 0.0136},  {1, 8, 0.02},    {2, 3, 0.0072},  {2, 4, 0.0083},
    {3, 6, 0.0157},  {4, 5, 0.0072},  {4, 11, 0.0168}, {5, 6, 0.0115},  {5, 7, 0.0072},
    {6, 10, 0.0104}, {6, 14, 0.0157}, {7, 8, 0.0083},  {8, 9, 0.0083},  {9, 10, 0.0083},
    {9, 12, 0.0051}, {9, 13, 0.0051}, {11, 12, 0.0072}, {11, 13, 0.0083}, {12, 14, 0.0051},
    {13, 14, 0.004},
};

// 81 bidirectional links (162 directed), hop mean near 6.5 and standard
// deviation near 3.8; see data/topologies/nttnet.json.
inline constexpr Edge kNttNet[] = {
    {1, 2, 0.0012},   {2, 4, 0.0034},   {3, 4, 0.0011},   {3, 8, 0.0031},   {5, 6, 0.0049},
    {5, 8, 0.0022},   {6, 7, 0.0049},   {6, 8, 0.0035},   {6, 17, 0.0045},  {7, 9, 0.0011},
    {8, 9, 0.0039},   {9, 10, 0.0031},  {9, 16, 0.0034},  {10, 15, 0.0025}, {10, 24, 0.0049},
    {11, 12, 0.0036}, {11, 15, 0.0039}, {12, 13, 0.0037}, {12, 14, 0.0032}, {13, 17, 0.0043},
    {13, 20, 0.0035}, {14, 17, 0.0033}, {16, 19, 0.0016}, {16, 20, 0.0032}, {16, 21, 0.0016},
    {17, 21, 0.0033}, {18, 19, 0.0027}, {18, 23, 0.004},  {21, 22, 0.0034}, {21, 23, 0.0025},
    {21, 25, 0.0031}, {22, 24, 0.0019}, {22, 25, 0.0049}, {23, 25, 0.0044}, {24, 25, 0.0026},
    {24, 26, 0.0019}, {24, 27, 0.0028}, {25, 26, 0.0036}, {26, 34, 0.0028}, {27, 28, 0.0048},
    {28, 29, 0.0012}, {28, 30, 0.0024}, {29, 30, 0.0031}, {29, 33, 0.0012}, {29, 35, 0.0029},
    {31, 32, 0.0033}, {31, 33, 0.0022}, {31, 36, 0.005},  {32, 34, 0.0024}, {32, 44, 0.0025},
    {33, 37, 0.0034}, {34, 37, 0.0021}, {35, 36, 0.0029}, {35, 40, 0.0016}, {36, 37, 0.0012},
    {38, 39, 0.0037}, {38, 40, 0.0021}, {38, 42, 0.0016}, {38, 43, 0.002},  {38, 44, 0.0027},
    {38, 45, 0.0016}, {39, 44, 0.0038}, {40, 49, 0.0039}, {41, 43, 0.0049}, {41, 44, 0.0012},
    {41, 45, 0.0023}, {42, 43, 0.0037}, {42, 47, 0.0044}, {44, 45, 0.002},  {46, 47, 0.0045},
    {46, 49, 0.0012}, {48, 49, 0.0032}, {48, 51, 0.0011}, {50, 52, 0.0016}, {50, 57, 0.0039},
    {51, 52, 0.0028}, {52, 55, 0.0046}, {53, 54, 0.0048}, {53, 57, 0.0028}, {54, 56, 0.0031},
    {55, 56, 0.0025},
};

}  // namespace detail

inline Topology builtin_topology(std::string_view name) {
  if (name == "simplenet") {
    return Topology("simplenet", 8, detail::with_bandwidth(detail::kSimpleNet, 10e6));
  }
  if (name == "nsfnet") {
    return Topology("nsfnet", 14, detail::with_bandwidth(detail::kNsfNet, 1.5e6));
  }
  if (name == "nttnet") {
    return Topology("nttnet", 57, detail::with_bandwidth(detail::kNttNet, 6e6));
  }
  throw TopologyError("unknown built-in topology '" + std::string(name) + "'");
}

inline bool is_builtin_topology(std::string_view name) {
  return name == "simplenet" || name == "nsfnet" || name == "nttnet";
}

/// Built-in name or path to a topology file.
inline Topology resolve_topology(const std::string& name_or_path) {
  if (is_builtin_topology(name_or_path)) return builtin_topology(name_or_path);
  return load_topology_file(name_or_path);
}

}  // namespace antsim
