#include "lclab/standard_lcl.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace lclab {

namespace {

// Labels on both halves of the edge behind port p of u, near side first.
struct Quad {
  Label in_near, out_near, in_far, out_far;
  bool operator==(const Quad&) const = default;
};

Quad quad_at(const Ball& b, NodeId u, std::size_t p) {
  const PortEntry& pe = b.g.ports(u)[p];
  return {b.in[u][p], b.out[u][p], b.in[pe.to][pe.rev], b.out[pe.to][pe.rev]};
}

Quad swapped(const Quad& q) { return {q.in_far, q.out_far, q.in_near, q.out_near}; }

void append_quad(std::string& s, const Quad& q) {
  s += std::to_string(q.in_near);
  s += ',';
  s += std::to_string(q.out_near);
  s += ',';
  s += std::to_string(q.in_far);
  s += ',';
  s += std::to_string(q.out_far);
  s += ';';
}

std::string canon_rec(const Ball& b, NodeId u, int excl_port) {
  std::vector<std::string> parts;
  const auto& ports = b.g.ports(u);
  for (std::size_t p = 0; p < ports.size(); ++p) {
    if (static_cast<int>(p) == excl_port) continue;
    std::string part;
    append_quad(part, quad_at(b, u, p));
    part += canon_rec(b, ports[p].to, static_cast<int>(ports[p].rev));
    parts.push_back(std::move(part));
  }
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (auto& s : parts) out += s;
  out += ")";
  return out;
}

struct Child {
  std::size_t port;
  NodeId node;
  PortId back;
  Quad quad;
};

std::vector<Child> children_of(const Ball& b, NodeId u, int excl_port) {
  std::vector<Child> out;
  const auto& ports = b.g.ports(u);
  for (std::size_t p = 0; p < ports.size(); ++p) {
    if (static_cast<int>(p) == excl_port) continue;
    out.push_back({p, ports[p].to, ports[p].rev, quad_at(b, u, p)});
  }
  return out;
}

// Full (unbounded-depth) isomorphism of the subtrees hanging off a and b.
bool iso_sub(const Ball& A, NodeId a, int excl_a, const Ball& B, NodeId b, int excl_b) {
  auto ca = children_of(A, a, excl_a);
  auto cb = children_of(B, b, excl_b);
  if (ca.size() != cb.size()) return false;
  std::vector<bool> used(cb.size(), false);
  auto place = [&](auto&& self, std::size_t i) -> bool {
    if (i == ca.size()) return true;
    for (std::size_t j = 0; j < cb.size(); ++j) {
      if (used[j] || !(ca[i].quad == cb[j].quad)) continue;
      if (!iso_sub(A, ca[i].node, ca[i].back, B, cb[j].node, cb[j].back)) continue;
      used[j] = true;
      if (self(self, i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return place(place, 0);
}

// Matches the glued subtrees below the pair (a, b); a sits at distance da from
// A's center, b at distance db from B's center. A child is constrained only
// while both balls can still see it.
bool glue_sub(const Ball& A, NodeId a, int excl_a, int da, const Ball& B, NodeId b, int excl_b,
              int db, int r) {
  const bool need_a = db + 1 <= r;  // A's children are visible in B
  const bool need_b = da + 1 <= r;  // B's children are visible in A
  if (!need_a && !need_b) return true;
  auto ca = children_of(A, a, excl_a);
  auto cb = children_of(B, b, excl_b);
  if (need_a && need_b && ca.size() != cb.size()) return false;
  const auto& from = need_a ? ca : cb;
  const auto& to = need_a ? cb : ca;
  const Ball& fb = need_a ? A : B;
  const Ball& tb = need_a ? B : A;
  const int dfrom = need_a ? da : db;
  const int dto = need_a ? db : da;
  std::vector<bool> used(to.size(), false);
  auto place = [&](auto&& self, std::size_t i) -> bool {
    if (i == from.size()) return true;
    for (std::size_t j = 0; j < to.size(); ++j) {
      if (used[j] || !(from[i].quad == to[j].quad)) continue;
      if (!glue_sub(fb, from[i].node, from[i].back, dfrom + 1, tb, to[j].node, to[j].back, dto + 1,
                    r))
        continue;
      used[j] = true;
      if (self(self, i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return place(place, 0);
}

// True when balls A and B can be the views of two adjacent nodes that share
// the edge behind A's center port j and B's center port j2.
bool glue_compatible(const Ball& A, std::size_t j, const Ball& B, std::size_t j2, int r) {
  if (!(quad_at(A, 0, j) == swapped(quad_at(B, 0, j2)))) return false;
  const PortEntry& pa = A.g.ports(0)[j];
  const PortEntry& pb = B.g.ports(0)[j2];
  return glue_sub(A, 0, static_cast<int>(j), 0, B, pb.to, pb.rev, 1, r) &&
         glue_sub(A, pa.to, pa.rev, 1, B, 0, static_cast<int>(j2), 0, r);
}

// Finds a library ball isomorphic to k; perm[p] is the library ball's center
// port matched to k's center port p.
std::optional<std::pair<int, std::vector<std::size_t>>> match_ball(const StandardLcl& p,
                                                                   const Ball& k) {
  const std::size_t d = k.g.ports(0).size();
  for (std::size_t bi = 0; bi < p.balls.size(); ++bi) {
    const Ball& ref = p.balls[bi];
    if (ref.g.ports(0).size() != d) continue;
    std::vector<std::size_t> perm(d);
    for (std::size_t i = 0; i < d; ++i) perm[i] = i;
    do {
      bool ok = true;
      for (std::size_t i = 0; i < d && ok; ++i) {
        if (!(quad_at(k, 0, i) == quad_at(ref, 0, perm[i]))) {
          ok = false;
          break;
        }
        const PortEntry& pk = k.g.ports(0)[i];
        const PortEntry& pr = ref.g.ports(0)[perm[i]];
        ok = iso_sub(k, pk.to, pk.rev, ref, pr.to, pr.rev);
      }
      if (ok) return std::make_pair(static_cast<int>(bi), perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return std::nullopt;
}

}  // namespace

int Ball::radius() const {
  auto depth = g.bfs_depths(0);
  int r = 0;
  for (int d : depth) r = std::max(r, d);
  return r;
}

std::string ball_canon(const Ball& b) { return canon_rec(b, 0, -1); }

void StandardLcl::add_ball(Ball b) {
  std::string c = ball_canon(b);
  for (const Ball& have : balls)
    if (ball_canon(have) == c) return;
  balls.push_back(std::move(b));
}

Ball extract_ball(const Graph& g, const HalfEdgeLabeling& out, NodeId v, int r) {
  if (out.size() != g.node_count()) throw std::invalid_argument("labeling does not match graph");
  std::vector<int> depth(g.node_count(), -1);
  std::vector<NodeId> order;
  std::deque<NodeId> q{v};
  depth[v] = 0;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    order.push_back(u);
    if (depth[u] == r) continue;
    for (const PortEntry& pe : g.ports(u))
      if (depth[pe.to] < 0) {
        depth[pe.to] = depth[u] + 1;
        q.push_back(pe.to);
      }
  }
  std::vector<NodeId> to_new(g.node_count(), kNoNode);
  Ball b;
  for (NodeId u : order) to_new[u] = b.g.add_node();
  // Old half-edge coordinates per new half-edge, filled as edges are added.
  std::vector<std::vector<HalfEdge>> src(order.size());
  std::vector<bool> edge_done(g.edge_count(), false);
  for (NodeId u : order) {
    const auto& ports = g.ports(u);
    for (std::size_t p = 0; p < ports.size(); ++p) {
      const PortEntry& pe = ports[p];
      if (to_new[pe.to] == kNoNode || edge_done[pe.edge]) continue;
      edge_done[pe.edge] = true;
      b.g.add_edge(to_new[u], to_new[pe.to]);
      src[to_new[u]].push_back({u, static_cast<PortId>(p)});
      src[to_new[pe.to]].push_back({pe.to, pe.rev});
    }
  }
  if (b.g.edge_count() + 1 != b.g.node_count())
    throw std::invalid_argument("ball is not a tree");
  b.in = make_half_edge_map(b.g, 0);
  b.out = make_half_edge_map(b.g, 0);
  for (NodeId nu = 0; nu < b.g.node_count(); ++nu)
    for (std::size_t p = 0; p < src[nu].size(); ++p) {
      const HalfEdge& h = src[nu][p];
      if (g.has_inputs()) {
        Label li = g.input(h.node, h.port);
        b.in[nu][p] = li == kNoLabel ? 0 : li;
      }
      b.out[nu][p] = out[h.node][h.port];
    }
  return b;
}

CheckResult check_standard(const StandardLcl& p, const Graph& g, const HalfEdgeLabeling& out) {
  if (out.size() != g.node_count()) throw std::invalid_argument("labeling does not match graph");
  std::set<std::string> accepted;
  for (const Ball& b : p.balls) accepted.insert(ball_canon(b));
  CheckResult res;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    Ball b = extract_ball(g, out, v, p.radius);
    if (!accepted.count(ball_canon(b))) res.failures.push_back({v, "ball not recognized"});
  }
  return res;
}

std::optional<HalfEdgeLabeling> brute_force_standard(const StandardLcl& p, const Graph& g,
                                                     std::size_t max_nodes) {
  if (g.node_count() > max_nodes) throw std::length_error("graph too large for exhaustive search");
  std::set<std::string> accepted;
  for (const Ball& b : p.balls) accepted.insert(ball_canon(b));

  // Half-edges in BFS order from node 0; each node watches the halves inside
  // its ball and is checked the moment the last one is assigned.
  std::vector<HalfEdge> halves;
  {
    std::vector<bool> seen(g.node_count(), false);
    std::deque<NodeId> q;
    for (NodeId s = 0; s < g.node_count(); ++s) {
      if (seen[s]) continue;
      seen[s] = true;
      q.push_back(s);
      while (!q.empty()) {
        NodeId u = q.front();
        q.pop_front();
        for (std::size_t pp = 0; pp < g.ports(u).size(); ++pp) {
          halves.push_back({u, static_cast<PortId>(pp)});
          NodeId w = g.ports(u)[pp].to;
          if (!seen[w]) {
            seen[w] = true;
            q.push_back(w);
          }
        }
      }
    }
  }
  std::vector<std::vector<std::size_t>> half_index(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) half_index[u].resize(g.ports(u).size());
  for (std::size_t i = 0; i < halves.size(); ++i)
    half_index[halves[i].node][halves[i].port] = i;

  std::vector<std::vector<NodeId>> watchers(halves.size());
  std::vector<int> pending(g.node_count(), 0);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    auto depth = g.bfs_depths(v);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      const Graph::EdgeEnds& ends = g.edge(e);
      if (depth[ends.a.node] < 0 || depth[ends.a.node] > p.radius) continue;
      if (depth[ends.b.node] < 0 || depth[ends.b.node] > p.radius) continue;
      watchers[half_index[ends.a.node][ends.a.port]].push_back(v);
      watchers[half_index[ends.b.node][ends.b.port]].push_back(v);
      pending[v] += 2;
    }
  }
  HalfEdgeLabeling out = make_half_edge_map(g, 0);
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (pending[v] == 0 && !accepted.count(ball_canon(extract_ball(g, out, v, p.radius))))
      return std::nullopt;

  auto place = [&](auto&& self, std::size_t i) -> bool {
    if (i == halves.size()) return true;
    const HalfEdge& h = halves[i];
    for (Label l = 0; l < static_cast<Label>(p.out_alpha.size()); ++l) {
      out[h.node][h.port] = l;
      bool ok = true;
      for (NodeId v : watchers[i]) --pending[v];
      for (NodeId v : watchers[i])
        if (pending[v] == 0 &&
            !accepted.count(ball_canon(extract_ball(g, out, v, p.radius)))) {
          ok = false;
          break;
        }
      if (ok && self(self, i + 1)) return true;
      for (NodeId v : watchers[i]) ++pending[v];
    }
    out[h.node][h.port] = 0;
    return false;
  };
  if (place(place, 0)) return out;
  return std::nullopt;
}

NodeEdgeConversion to_node_edge(const StandardLcl& p) {
  NodeEdgeConversion conv;
  conv.radius = p.radius;
  conv.bw.name = p.name + "-ne";
  conv.bw.in_alpha = p.in_alpha;
  conv.label_of_ball_port.resize(p.balls.size());
  for (std::size_t bi = 0; bi < p.balls.size(); ++bi) {
    const std::size_t d = p.balls[bi].g.ports(0).size();
    conv.label_of_ball_port[bi].resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      Label l = conv.bw.out_alpha.add("b" + std::to_string(bi) + "p" + std::to_string(j));
      conv.triple_of_label.emplace_back(static_cast<int>(bi), static_cast<int>(j));
      conv.label_of_ball_port[bi][j] = l;
    }
  }
  for (std::size_t bi = 0; bi < p.balls.size(); ++bi) {
    PairMultiset m;
    for (std::size_t j = 0; j < p.balls[bi].g.ports(0).size(); ++j)
      m.emplace_back(p.balls[bi].in[0][j], conv.label_of_ball_port[bi][j]);
    conv.bw.white.insert(canon_multiset(m));
  }
  const std::size_t t = conv.triple_of_label.size();
  for (std::size_t x = 0; x < t; ++x)
    for (std::size_t y = x; y < t; ++y) {
      auto [bx, jx] = conv.triple_of_label[x];
      auto [by, jy] = conv.triple_of_label[y];
      if (!glue_compatible(p.balls[bx], jx, p.balls[by], jy, p.radius)) continue;
      PairMultiset m;
      m.emplace_back(p.balls[bx].in[0][jx], static_cast<Label>(x));
      m.emplace_back(p.balls[by].in[0][jy], static_cast<Label>(y));
      conv.bw.black.insert(canon_multiset(m));
    }
  return conv;
}

LiftResult lift_solution(LiftDirection dir, const StandardLcl& p, const NodeEdgeConversion& conv,
                         const Graph& g, const HalfEdgeLabeling& std_out,
                         const EdgeLabeling& ne_out) {
  LiftResult res;
  if (dir == LiftDirection::Identity) {
    if (!check_standard(p, g, std_out).ok())
      throw std::invalid_argument("labeling invalid for source problem");
    res.standard = std_out;
    return res;
  }
  if (dir == LiftDirection::ToNodeEdge) {
    if (!check_standard(p, g, std_out).ok())
      throw std::invalid_argument("labeling invalid for source problem");
    res.node_edge.assign(2 * g.edge_count(), 0);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      Ball k = extract_ball(g, std_out, v, p.radius);
      auto m = match_ball(p, k);
      if (!m) throw std::logic_error("valid node has no matching ball");
      const auto& [bi, perm] = *m;
      for (std::size_t pp = 0; pp < g.ports(v).size(); ++pp) {
        EdgeId e = g.ports(v)[pp].edge;
        int side = g.edge(e).a.node == v ? 0 : 1;
        res.node_edge[2 * e + side] = conv.label_of_ball_port[bi][perm[pp]];
      }
    }
    return res;
  }
  NodeEdgeInstance inst = node_edge_instance(g);
  if (!check_bw(conv.bw, inst.bw, ne_out).ok())
    throw std::invalid_argument("labeling invalid for source problem");
  res.standard = make_half_edge_map(g, 0);
  for (NodeId v = 0; v < g.node_count(); ++v)
    for (std::size_t pp = 0; pp < g.ports(v).size(); ++pp) {
      EdgeId e = g.ports(v)[pp].edge;
      int side = g.edge(e).a.node == v ? 0 : 1;
      auto [bi, j] = conv.triple_of_label[ne_out[2 * e + side]];
      res.standard[v][pp] = p.balls[bi].out[0][j];
    }
  return res;
}

namespace {

Ball star_ball(int d, Label in0, Label center_out, const std::vector<Label>& leaf_out) {
  Ball b;
  NodeId c = b.g.add_node();
  for (int i = 0; i < d; ++i) {
    NodeId leaf = b.g.add_node();
    b.g.add_edge(c, leaf);
  }
  b.in = make_half_edge_map(b.g, in0);
  b.out = make_half_edge_map(b.g, 0);
  for (int i = 0; i < d; ++i) {
    b.out[c][i] = center_out;
    b.out[i + 1][0] = leaf_out[i];
  }
  return b;
}

}  // namespace

StandardLcl always_valid_standard(int max_degree) {
  StandardLcl p;
  p.name = "always-valid-std";
  p.radius = 1;
  p.in_alpha.add("-");
  Label x = p.out_alpha.add("X");
  for (int d = 0; d <= max_degree; ++d)
    p.add_ball(star_ball(d, 0, x, std::vector<Label>(d, x)));
  return p;
}

StandardLcl three_coloring_standard(int max_degree) {
  StandardLcl p;
  p.name = "3-coloring-std";
  p.radius = 1;
  p.in_alpha.add("-");
  Label c1 = p.out_alpha.add("1");
  Label c2 = p.out_alpha.add("2");
  Label c3 = p.out_alpha.add("3");
  const Label colors[3] = {c1, c2, c3};
  for (Label c : colors) {
    std::vector<Label> others;
    for (Label o : colors)
      if (o != c) others.push_back(o);
    for (int d = 0; d <= max_degree; ++d) {
      // All multisets of size d over the two non-center colors.
      for (int k = 0; k <= d; ++k) {
        std::vector<Label> leafs;
        for (int i = 0; i < k; ++i) leafs.push_back(others[0]);
        for (int i = k; i < d; ++i) leafs.push_back(others[1]);
        p.add_ball(star_ball(d, 0, c, leafs));
      }
    }
  }
  return p;
}

}  // namespace lclab
