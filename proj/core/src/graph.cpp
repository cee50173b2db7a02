#include "lclab/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace lclab {

EdgeId Graph::add_edge(NodeId u, NodeId v) {
  if (u >= adj_.size() || v >= adj_.size()) throw std::out_of_range("add_edge: bad node id");
  if (u == v) throw std::invalid_argument("add_edge: self loops not supported");
  if (port_to(u, v)) throw std::invalid_argument("add_edge: parallel edge");
  EdgeId e = static_cast<EdgeId>(ends_.size());
  PortId pu = static_cast<PortId>(adj_[u].size());
  PortId pv = static_cast<PortId>(adj_[v].size());
  adj_[u].push_back({v, pv, e});
  adj_[v].push_back({u, pu, e});
  ends_.push_back({{u, pu}, {v, pv}});
  if (!half_in_.empty()) {
    half_in_[u].push_back(kNoLabel);
    half_in_[v].push_back(kNoLabel);
  }
  return e;
}

std::optional<PortId> Graph::port_to(NodeId u, NodeId v) const {
  const auto& ps = adj_[u];
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps[i].to == v) return static_cast<PortId>(i);
  return std::nullopt;
}

std::optional<EdgeId> Graph::edge_between(NodeId u, NodeId v) const {
  auto p = port_to(u, v);
  if (!p) return std::nullopt;
  return adj_[u][*p].edge;
}

int Graph::max_degree() const {
  int d = 0;
  for (const auto& ps : adj_) d = std::max<int>(d, static_cast<int>(ps.size()));
  return d;
}

void Graph::enable_inputs() {
  if (!half_in_.empty()) return;
  half_in_.resize(adj_.size());
  for (std::size_t u = 0; u < adj_.size(); ++u)
    half_in_[u].assign(adj_[u].size(), kNoLabel);
}

void Graph::set_input(NodeId u, PortId p, std::uint8_t label) {
  enable_inputs();
  half_in_[u][p] = label;
}

std::pair<std::uint8_t, std::uint8_t> Graph::edge_inputs(EdgeId e) const {
  const auto& ee = ends_[e];
  return {input(ee.a.node, ee.a.port), input(ee.b.node, ee.b.port)};
}

bool Graph::port_symmetric() const {
  for (NodeId u = 0; u < adj_.size(); ++u) {
    for (std::size_t p = 0; p < adj_[u].size(); ++p) {
      const PortEntry& pe = adj_[u][p];
      if (pe.to >= adj_.size()) return false;
      if (pe.rev >= adj_[pe.to].size()) return false;
      const PortEntry& back = adj_[pe.to][pe.rev];
      if (back.to != u || back.rev != p || back.edge != pe.edge) return false;
    }
  }
  return true;
}

std::vector<int> Graph::bfs_depths(NodeId root) const {
  std::vector<int> depth(adj_.size(), -1);
  std::vector<NodeId> queue{root};
  depth[root] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    NodeId u = queue[head];
    for (const auto& pe : adj_[u]) {
      if (depth[pe.to] < 0) {
        depth[pe.to] = depth[u] + 1;
        queue.push_back(pe.to);
      }
    }
  }
  return depth;
}

bool Graph::connected() const {
  if (adj_.empty()) return true;
  auto d = bfs_depths(0);
  return std::all_of(d.begin(), d.end(), [](int x) { return x >= 0; });
}

int Graph::diameter() const {
  int best = 0;
  for (NodeId u = 0; u < adj_.size(); ++u) {
    auto d = bfs_depths(u);
    for (int x : d) {
      if (x < 0) return -1;  // disconnected
      best = std::max(best, x);
    }
  }
  return best;
}

HalfEdgeLabelMap make_half_edge_map(const Graph& g, std::uint8_t fill) {
  HalfEdgeLabelMap m(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) m[u].assign(g.ports(u).size(), fill);
  return m;
}

std::optional<NodeId> follow(const Graph& g, const HalfEdgeLabelMap& labels,
                             NodeId u, std::span<const std::uint8_t> seq) {
  NodeId cur = u;
  for (std::uint8_t want : seq) {
    const auto& ps = g.ports(cur);
    NodeId nxt = kNoNode;
    for (std::size_t p = 0; p < ps.size(); ++p) {
      if (labels[cur][p] == want) {
        if (nxt != kNoNode) return std::nullopt;  // ambiguous
        nxt = ps[p].to;
      }
    }
    if (nxt == kNoNode) return std::nullopt;
    cur = nxt;
  }
  return cur;
}

}  // namespace lclab
