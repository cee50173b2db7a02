#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "decomp_internal.hpp"
#include "lclab/decomp.hpp"
#include "nlohmann/json.hpp"

namespace lclab {

std::uint64_t sublayer_key(const NodeLayer& a) {
  // rake sublayers of iteration i < compress of iteration i < iteration i+1
  std::uint64_t kind = a.kind == LayerKind::Compress ? 1u : 0u;
  std::uint64_t sub = a.kind == LayerKind::Compress ? 0u : std::uint64_t(a.sub);
  return (std::uint64_t(a.iter) << 33) | (kind << 32) | sub;
}

int Decomposition::layer_count() const { return rake_layer_count() + compress_layer_count(); }

int Decomposition::rake_layer_count() const {
  std::set<int> iters;
  for (const auto& a : node)
    if (a.kind == LayerKind::Rake) iters.insert(a.iter);
  return int(iters.size());
}

int Decomposition::compress_layer_count() const {
  std::set<int> iters;
  for (const auto& a : node)
    if (a.kind == LayerKind::Compress) iters.insert(a.iter);
  return int(iters.size());
}

int Decomposition::max_rake_sublayers() const {
  int best = 0;
  for (const auto& a : node)
    if (a.kind == LayerKind::Rake) best = std::max(best, a.sub);
  return best;
}

namespace {

void validate_params(int gamma, int l) {
  if (gamma < 1) throw std::invalid_argument("gamma must be at least 1");
  if (l < 1) throw std::invalid_argument("l must be at least 1");
}

}  // namespace

Decomposition rake_compress(const Graph& tree, int gamma, int l,
                            const std::vector<std::uint64_t>* ids) {
  validate_params(gamma, l);
  std::size_t n = tree.node_count();
  if (n > 0 && (!tree.is_tree() || !tree.connected()))
    throw std::invalid_argument("rake_compress requires a connected acyclic graph");
  if (ids && ids->size() != n) throw std::invalid_argument("id vector size mismatch");

  auto id_of = [&](NodeId v) { return ids ? (*ids)[v] : std::uint64_t(v); };

  Decomposition d;
  d.gamma = gamma;
  d.l = l;
  d.node.assign(n, NodeLayer{});

  std::vector<char> alive(n, 1);
  std::vector<int> deg(n, 0);
  for (NodeId v = 0; v < n; ++v) deg[v] = tree.degree(v);
  std::size_t remaining = n;

  auto alive_neighbor = [&](NodeId v) -> NodeId {
    for (const auto& pe : tree.ports(v))
      if (alive[pe.to]) return pe.to;
    return kNoNode;
  };

  for (int iter = 1; remaining > 0; ++iter) {
    d.iterations = iter;
    for (int j = 1; j <= gamma && remaining > 0; ++j) {
      // simultaneous rake: decisions read the degree snapshot of this op
      std::vector<NodeId> removed;
      for (NodeId v = 0; v < n; ++v) {
        if (!alive[v] || deg[v] > 1) continue;
        if (deg[v] == 0) {
          removed.push_back(v);
          continue;
        }
        NodeId u = alive_neighbor(v);
        if (deg[u] >= 2 || id_of(v) < id_of(u)) removed.push_back(v);
      }
      for (NodeId v : removed) {
        d.node[v] = NodeLayer{LayerKind::Rake, iter, j, false};
        alive[v] = 0;
        --remaining;
      }
      for (NodeId v : removed)
        for (const auto& pe : tree.ports(v))
          if (alive[pe.to]) --deg[pe.to];
    }
    if (remaining == 0) break;

    // compress: every maximal run of degree-2 nodes with >= l nodes, measured
    // against the post-rake degree snapshot (removals below must not grow runs)
    std::vector<char> deg2(n, 0);
    for (NodeId v = 0; v < n; ++v) deg2[v] = alive[v] && deg[v] == 2;
    std::vector<char> seen(n, 0);
    std::vector<std::vector<NodeId>> runs;
    for (NodeId v = 0; v < n; ++v) {
      if (!deg2[v] || seen[v]) continue;
      // walk to one end of the run, then collect it in order
      NodeId start = v, prev = kNoNode;
      for (;;) {
        NodeId next = kNoNode;
        for (const auto& pe : tree.ports(start))
          if (deg2[pe.to] && pe.to != prev) next = pe.to;
        if (next == kNoNode) break;
        prev = start;
        std::swap(start, next);
        if (start == v) throw std::invalid_argument("cycle detected during compress");
      }
      std::vector<NodeId> run;
      prev = kNoNode;
      NodeId cur = start;
      while (cur != kNoNode) {
        run.push_back(cur);
        seen[cur] = 1;
        NodeId next = kNoNode;
        for (const auto& pe : tree.ports(cur))
          if (deg2[pe.to] && pe.to != prev && !seen[pe.to]) next = pe.to;
        prev = cur;
        cur = next;
      }
      if (int(run.size()) >= l) runs.push_back(std::move(run));
    }
    for (const auto& run : runs) {
      int x = int(run.size());
      for (NodeId u : run) {
        d.node[u] = NodeLayer{LayerKind::Compress, iter, 0, false};
        alive[u] = 0;
        --remaining;
      }
      for (NodeId u : run)
        for (const auto& pe : tree.ports(u))
          if (alive[pe.to]) --deg[pe.to];
      if (x > 2 * l) {
        // promote interior nodes so residual segments have l..2l nodes
        auto spacings = detail::span_spacings(x + 1, l);
        int pos = -1;
        for (std::size_t t = 0; t + 1 < spacings.size(); ++t) {
          pos += spacings[t];
          d.node[run[pos]] = NodeLayer{LayerKind::Rake, iter + 1, 1, true};
        }
      }
    }
  }
  return d;
}

namespace {

struct Grouped {
  // nodes by (kind, iter); rake additionally by sublayer
  std::map<int, std::vector<NodeId>> compress_layers;
  std::map<int, std::vector<NodeId>> rake_layers;
  std::map<std::pair<int, int>, std::vector<NodeId>> rake_sublayers;
};

}  // namespace

DecompositionCheck check_decomposition(const Graph& g, const Decomposition& d) {
  DecompositionCheck res;
  auto fail = [&](std::string msg) {
    res.ok = false;
    res.problems.push_back(std::move(msg));
  };
  std::size_t n = g.node_count();
  if (d.node.size() != n) {
    fail("assignment count does not match node count");
    return res;
  }

  Grouped gr;
  for (NodeId v = 0; v < n; ++v) {
    const NodeLayer& a = d.node[v];
    if (a.iter < 1) fail("node " + std::to_string(v) + " has no layer");
    if (a.kind == LayerKind::Rake) {
      if (a.sub < 1 || a.sub > std::max(1, d.gamma))
        fail("node " + std::to_string(v) + " has an out-of-range rake sublayer");
      if (a.promoted && (a.sub != 1 || a.iter < 2))
        fail("node " + std::to_string(v) + " promoted into a sublayer other than (i+1, 1)");
      gr.rake_layers[a.iter].push_back(v);
      gr.rake_sublayers[{a.iter, a.sub}].push_back(v);
    } else {
      if (a.sub != 0) fail("compress node " + std::to_string(v) + " carries a sublayer");
      if (a.promoted) fail("compress node " + std::to_string(v) + " marked promoted");
      gr.compress_layers[a.iter].push_back(v);
    }
  }
  if (!res.ok) return res;

  // "above" means a strictly later layer: R_i < C_i < R_{i+1}; sublayers of
  // one rake layer count as the same layer here
  std::vector<int> rank(n);
  for (NodeId v = 0; v < n; ++v)
    rank[v] = 2 * d.node[v].iter - (d.node[v].kind == LayerKind::Rake ? 1 : 0);

  auto has_higher_neighbor = [&](NodeId v) {
    for (const auto& pe : g.ports(v))
      if (rank[pe.to] > rank[v]) return true;
    return false;
  };

  // compress layers: paths of l..2l nodes, endpoints exactly the nodes with a
  // neighbor above
  for (const auto& [iter, nodes] : gr.compress_layers) {
    std::set<NodeId> in_layer(nodes.begin(), nodes.end());
    std::set<NodeId> visited;
    for (NodeId v : nodes) {
      if (visited.count(v)) continue;
      // collect the component within the layer
      std::vector<NodeId> comp{v};
      visited.insert(v);
      for (std::size_t i = 0; i < comp.size(); ++i)
        for (const auto& pe : g.ports(comp[i]))
          if (in_layer.count(pe.to) && !visited.count(pe.to)) {
            visited.insert(pe.to);
            comp.push_back(pe.to);
          }
      int x = int(comp.size());
      if (x < d.l || x > 2 * d.l)
        fail("compress component of " + std::to_string(x) + " nodes in layer " +
             std::to_string(iter));
      int ends = 0;
      for (NodeId u : comp) {
        int internal = 0;
        for (const auto& pe : g.ports(u)) internal += in_layer.count(pe.to) ? 1 : 0;
        if (internal > 2) fail("compress component is not a path");
        bool endpoint = internal <= 1 && x > 1;
        if (x == 1) endpoint = true;
        if (endpoint) ++ends;
        if (endpoint && !has_higher_neighbor(u))
          fail("compress path endpoint " + std::to_string(u) + " has no neighbor above");
        if (!endpoint && has_higher_neighbor(u))
          fail("interior compress node " + std::to_string(u) + " has a neighbor above");
      }
      if (x > 1 && ends != 2) fail("compress component is not a path");
    }
  }

  // rake sublayers are independent sets
  for (const auto& [ij, nodes] : gr.rake_sublayers) {
    std::set<NodeId> in_sub(nodes.begin(), nodes.end());
    for (NodeId v : nodes)
      for (const auto& pe : g.ports(v))
        if (pe.to > v && in_sub.count(pe.to))
          fail("rake sublayer (" + std::to_string(ij.first) + "," + std::to_string(ij.second) +
               ") contains adjacent nodes " + std::to_string(v) + "," + std::to_string(pe.to));
  }

  // rake layer components: at most one node with a neighbor above
  for (const auto& [iter, nodes] : gr.rake_layers) {
    std::set<NodeId> in_layer(nodes.begin(), nodes.end());
    std::set<NodeId> visited;
    for (NodeId v : nodes) {
      if (visited.count(v)) continue;
      std::vector<NodeId> comp{v};
      visited.insert(v);
      for (std::size_t i = 0; i < comp.size(); ++i)
        for (const auto& pe : g.ports(comp[i]))
          if (in_layer.count(pe.to) && !visited.count(pe.to)) {
            visited.insert(pe.to);
            comp.push_back(pe.to);
          }
      int up = 0;
      for (NodeId u : comp) up += has_higher_neighbor(u) ? 1 : 0;
      if (up > 1)
        fail("rake layer " + std::to_string(iter) + " component with " + std::to_string(up) +
             " nodes pointing above");
    }
  }
  return res;
}

LayerReport layer_counts(const Decomposition& d, std::size_t n) {
  LayerReport r;
  r.n = n;
  r.gamma = d.gamma;
  r.l = d.l;
  r.iterations = d.iterations;
  r.rake_layers = d.rake_layer_count();
  r.compress_layers = d.compress_layer_count();
  r.layers = r.rake_layers + r.compress_layers;
  r.max_rake_sublayers = d.max_rake_sublayers();
  if (n >= 2) r.layers_per_log2_n = double(r.layers) / std::log2(double(n));
  return r;
}

std::string decomposition_to_json(const Decomposition& d) {
  nlohmann::json j;
  j["gamma"] = d.gamma;
  j["l"] = d.l;
  j["iterations"] = d.iterations;
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& a : d.node) {
    nlohmann::json e;
    e["kind"] = a.kind == LayerKind::Rake ? "rake" : "compress";
    e["iter"] = a.iter;
    e["sub"] = a.sub;
    if (a.promoted) e["promoted"] = true;
    nodes.push_back(std::move(e));
  }
  j["nodes"] = std::move(nodes);
  return j.dump();
}

std::string layer_report_to_json(const LayerReport& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["gamma"] = r.gamma;
  j["l"] = r.l;
  j["iterations"] = r.iterations;
  j["layers"] = r.layers;
  j["rake_layers"] = r.rake_layers;
  j["compress_layers"] = r.compress_layers;
  j["max_rake_sublayers"] = r.max_rake_sublayers;
  j["layers_per_log2_n"] = r.layers_per_log2_n;
  return j.dump();
}

}  // namespace lclab
