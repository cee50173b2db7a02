#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lclab {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using PortId = std::uint16_t;

inline constexpr NodeId kNoNode = 0xffffffffu;
inline constexpr std::uint8_t kNoLabel = 0xff;

struct PortEntry {
  NodeId to;
  PortId rev;   // port of this edge at the other endpoint
  EdgeId edge;
};

struct HalfEdge {
  NodeId node;
  PortId port;
};

// Port-numbered bounded-degree graph. Ports are assigned in edge insertion
// order; node ids are dense in [0, n). Half-edge input labels are optional
// small integers whose meaning (alphabet) is owned by the problem layer.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : adj_(n) {}

  NodeId add_node() {
    adj_.emplace_back();
    if (!half_in_.empty()) half_in_.emplace_back();
    return static_cast<NodeId>(adj_.size() - 1);
  }

  EdgeId add_edge(NodeId u, NodeId v);

  std::size_t node_count() const { return adj_.size(); }
  std::size_t edge_count() const { return ends_.size(); }
  int degree(NodeId u) const { return static_cast<int>(adj_[u].size()); }
  const std::vector<PortEntry>& ports(NodeId u) const { return adj_[u]; }
  const PortEntry& port(NodeId u, PortId p) const { return adj_[u][p]; }

  struct EdgeEnds {
    HalfEdge a, b;
  };
  const EdgeEnds& edge(EdgeId e) const { return ends_[e]; }

  // Port leading from u to v, if any (degrees are small, linear scan).
  std::optional<PortId> port_to(NodeId u, NodeId v) const;
  std::optional<EdgeId> edge_between(NodeId u, NodeId v) const;

  int max_degree() const;

  // ---- half-edge inputs -------------------------------------------------
  bool has_inputs() const { return !half_in_.empty(); }
  void enable_inputs();
  void set_input(NodeId u, PortId p, std::uint8_t label);
  std::uint8_t input(NodeId u, PortId p) const {
    return half_in_.empty() ? kNoLabel : half_in_[u][p];
  }
  // Inputs of both half-edges of e, ordered as (ends.a, ends.b).
  std::pair<std::uint8_t, std::uint8_t> edge_inputs(EdgeId e) const;

  // ---- structural checks (test oracles, small-graph use) ----------------
  bool port_symmetric() const;
  bool connected() const;
  bool is_tree() const { return edge_count() + 1 == node_count() && connected(); }
  std::vector<int> bfs_depths(NodeId root) const;
  int diameter() const;  // O(n * m); meant for test-sized graphs

 private:
  std::vector<std::vector<PortEntry>> adj_;
  std::vector<EdgeEnds> ends_;
  std::vector<std::vector<std::uint8_t>> half_in_;
};

// Per-half-edge label map, parallel to the adjacency shape of a Graph.
using HalfEdgeLabelMap = std::vector<std::vector<std::uint8_t>>;

HalfEdgeLabelMap make_half_edge_map(const Graph& g, std::uint8_t fill = kNoLabel);

// Walks the label-directed path from u: at each step moves along the unique
// half-edge of the current node carrying the requested label. Returns the
// final node, or nullopt when some step has no match or several matches.
std::optional<NodeId> follow(const Graph& g, const HalfEdgeLabelMap& labels,
                             NodeId u, std::span<const std::uint8_t> seq);

}  // namespace lclab
