#include "lclab/graph_gen.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "lclab/rng.hpp"

namespace lclab {

Graph random_tree(int n, int max_degree, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_tree: n must be >= 1");
  if (max_degree < 2 && n > 2) throw std::invalid_argument("random_tree: max_degree < 2 needs n <= 2");
  if (max_degree < 1 && n == 2) throw std::invalid_argument("random_tree: max_degree < 1 needs n <= 1");
  Graph g(static_cast<std::size_t>(n));
  Rng rng(Rng::mix(seed, 0x7472656573ULL));
  // nodes still below the degree cap, in insertion order
  std::vector<NodeId> open;
  std::vector<int> deg(n, 0);
  if (n > 1) open.push_back(0);
  for (NodeId v = 1; v < static_cast<NodeId>(n); ++v) {
    std::size_t i = rng.below(open.size());
    NodeId u = open[i];
    g.add_edge(u, v);
    if (++deg[u] >= max_degree) {
      open[i] = open.back();
      open.pop_back();
    }
    deg[v] = 1;
    if (deg[v] < max_degree) open.push_back(v);
  }
  return g;
}

Graph path_graph(int n) {
  Graph g(static_cast<std::size_t>(n));
  for (NodeId v = 1; v < static_cast<NodeId>(n); ++v) g.add_edge(v - 1, v);
  return g;
}

Graph star_graph(int leaves) {
  Graph g(static_cast<std::size_t>(leaves + 1));
  for (NodeId v = 1; v <= static_cast<NodeId>(leaves); ++v) g.add_edge(0, v);
  return g;
}

Graph binary_tree(int levels) {
  int n = (1 << levels) - 1;
  Graph g(static_cast<std::size_t>(n));
  for (NodeId v = 1; v < static_cast<NodeId>(n); ++v) g.add_edge((v - 1) / 2, v);
  return g;
}

Graph caterpillar(int spine, int legs) {
  Graph g(static_cast<std::size_t>(spine));
  for (NodeId v = 1; v < static_cast<NodeId>(spine); ++v) g.add_edge(v - 1, v);
  for (NodeId s = 0; s < static_cast<NodeId>(spine); ++s)
    for (int i = 0; i < legs; ++i) g.add_edge(s, g.add_node());
  return g;
}

static Graph tree_from_pruefer(const std::vector<int>& code, int n) {
  std::vector<int> deg(n, 1);
  for (int x : code) deg[x]++;
  Graph g(static_cast<std::size_t>(n));
  // smallest-leaf elimination
  std::vector<bool> used(n, false);
  int ptr = 0;
  while (deg[ptr] != 1) ptr++;
  int leaf = ptr;
  for (int x : code) {
    g.add_edge(static_cast<NodeId>(leaf), static_cast<NodeId>(x));
    if (--deg[x] == 1 && x < ptr) {
      leaf = x;
    } else {
      ptr++;
      while (deg[ptr] != 1) ptr++;
      leaf = ptr;
    }
  }
  g.add_edge(static_cast<NodeId>(leaf), static_cast<NodeId>(n - 1));
  return g;
}

void for_each_labeled_tree(int n, const std::function<void(const Graph&)>& fn) {
  if (n == 1) {
    fn(Graph(1));
    return;
  }
  if (n == 2) {
    fn(path_graph(2));
    return;
  }
  std::vector<int> code(n - 2, 0);
  for (;;) {
    fn(tree_from_pruefer(code, n));
    int i = n - 3;
    while (i >= 0 && code[i] == n - 1) code[i--] = 0;
    if (i < 0) break;
    code[i]++;
  }
}

static std::string ahu(const Graph& g, NodeId v, NodeId parent) {
  std::vector<std::string> kids;
  for (const auto& pe : g.ports(v))
    if (pe.to != parent) kids.push_back(ahu(g, pe.to, v));
  std::sort(kids.begin(), kids.end());
  std::string out = "(";
  for (const auto& k : kids) out += k;
  out += ")";
  return out;
}

std::string tree_canonical_form(const Graph& g) {
  // root at the 1- or 2-element center for a rooted canonical form
  int n = static_cast<int>(g.node_count());
  if (n == 0) return "";
  std::vector<int> deg(n), order;
  std::vector<bool> gone(n, false);
  for (int v = 0; v < n; ++v) deg[v] = g.degree(static_cast<NodeId>(v));
  std::vector<NodeId> layer;
  for (int v = 0; v < n; ++v)
    if (deg[v] <= 1) layer.push_back(static_cast<NodeId>(v));
  int remaining = n;
  while (remaining > 2) {
    std::vector<NodeId> next;
    for (NodeId v : layer) {
      gone[v] = true;
      --remaining;
      for (const auto& pe : g.ports(v))
        if (!gone[pe.to] && --deg[pe.to] == 1) next.push_back(pe.to);
    }
    layer = std::move(next);
  }
  std::vector<NodeId> center;
  for (int v = 0; v < n; ++v)
    if (!gone[v]) center.push_back(static_cast<NodeId>(v));
  if (center.size() == 1) return ahu(g, center[0], kNoNode);
  std::string a = ahu(g, center[0], center[1]);
  std::string b = ahu(g, center[1], center[0]);
  return a < b ? "[" + a + b + "]" : "[" + b + a + "]";
}

std::vector<Graph> nonisomorphic_trees(int n) {
  std::map<std::string, Graph> reps;
  for_each_labeled_tree(n, [&](const Graph& g) {
    std::string key = tree_canonical_form(g);
    reps.try_emplace(std::move(key), g);
  });
  std::vector<Graph> out;
  out.reserve(reps.size());
  for (auto& [k, g] : reps) out.push_back(std::move(g));
  return out;
}

}  // namespace lclab
