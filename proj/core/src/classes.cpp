#include "lclab/classes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lclab/graph_gen.hpp"

namespace lclab {

namespace {

constexpr std::size_t kEnumGuard = std::size_t(1) << 22;
constexpr EdgeId kNoEdge = 0xffffffffu;

// Every combination of one label per slot, in odometer order.
struct Odometer {
  const std::vector<std::vector<Label>>& dom;
  std::vector<std::size_t> at;
  bool live;

  explicit Odometer(const std::vector<std::vector<Label>>& d) : dom(d), at(d.size(), 0) {
    live = std::all_of(d.begin(), d.end(), [](const auto& v) { return !v.empty(); });
  }
  Label value(std::size_t i) const { return dom[i][at[i]]; }
  bool advance() {
    std::size_t i = 0;
    while (i < at.size() && ++at[i] == dom[i].size()) at[i++] = 0;
    return i < at.size();
  }
};

void guard_product(const std::vector<std::vector<Label>>& dom, std::size_t extra) {
  std::size_t prod = std::max<std::size_t>(extra, 1);
  for (const auto& d : dom) {
    if (d.empty()) return;  // no assignments at all, nothing to enumerate
    prod *= d.size();
    if (prod > kEnumGuard) throw std::length_error("class enumeration too large");
  }
}

std::vector<std::vector<Label>> incoming_domains(const std::vector<IncomingEdge>& in) {
  std::vector<std::vector<Label>> dom;
  dom.reserve(in.size());
  for (const auto& e : in) dom.push_back(e.options.labels());
  return dom;
}

}  // namespace

// ---- label-sets -------------------------------------------------------------

LabelSet LabelSet::all(std::size_t alphabet_size) {
  if (alphabet_size > 64) throw std::length_error("alphabet exceeds label-set width");
  LabelSet s;
  s.bits = alphabet_size == 64 ? ~std::uint64_t(0)
                               : (std::uint64_t(1) << alphabet_size) - 1;
  return s;
}

LabelSet LabelSet::of(std::initializer_list<Label> labels) {
  LabelSet s;
  for (Label l : labels) s.add(l);
  return s;
}

int LabelSet::size() const { return std::popcount(bits); }

std::vector<Label> LabelSet::labels() const {
  std::vector<Label> out;
  for (int l = 0; l < 64; ++l)
    if (contains(Label(l))) out.push_back(Label(l));
  return out;
}

std::string label_set_to_string(const LabelSet& s, const Alphabet& alpha) {
  std::string out = "{";
  bool first = true;
  for (Label l : s.labels()) {
    if (!first) out += ",";
    out += alpha.name(l);
    first = false;
  }
  return out + "}";
}

// ---- single-node propagation ------------------------------------------------

LabelSet rake_g(const BwProblem& p, bool black_node,
                const std::vector<IncomingEdge>& incoming, Label out_input) {
  const std::size_t k = p.out_alpha.size();
  auto dom = incoming_domains(incoming);
  guard_product(dom, k);
  LabelSet res;
  Odometer od(dom);
  if (!od.live) return res;
  do {
    PairMultiset base;
    base.reserve(incoming.size() + 1);
    for (std::size_t i = 0; i < incoming.size(); ++i)
      base.emplace_back(incoming[i].input, od.value(i));
    for (std::size_t l = 0; l < k; ++l) {
      if (res.contains(Label(l))) continue;
      PairMultiset m = base;
      m.emplace_back(out_input, Label(l));
      if (p.allows(black_node, canon_multiset(std::move(m)))) res.add(Label(l));
    }
    if (std::size_t(res.size()) == k) break;
  } while (od.advance());
  return res;
}

bool rake_feasible(const BwProblem& p, bool black_node,
                   const std::vector<IncomingEdge>& incoming) {
  auto dom = incoming_domains(incoming);
  guard_product(dom, 1);
  Odometer od(dom);
  if (!od.live) return false;
  do {
    PairMultiset m;
    m.reserve(incoming.size());
    for (std::size_t i = 0; i < incoming.size(); ++i)
      m.emplace_back(incoming[i].input, od.value(i));
    if (p.allows(black_node, canon_multiset(std::move(m)))) return true;
  } while (od.advance());
  return false;
}

std::optional<std::vector<Label>> rake_pick(
    const BwProblem& p, bool black_node, const std::vector<IncomingEdge>& incoming,
    const std::optional<std::pair<Label, Label>>& outgoing) {
  auto dom = incoming_domains(incoming);
  guard_product(dom, 1);
  Odometer od(dom);
  if (!od.live) return std::nullopt;
  do {
    PairMultiset m;
    m.reserve(incoming.size() + 1);
    std::vector<Label> chosen(incoming.size());
    for (std::size_t i = 0; i < incoming.size(); ++i) {
      chosen[i] = od.value(i);
      m.emplace_back(incoming[i].input, chosen[i]);
    }
    if (outgoing) m.emplace_back(outgoing->first, outgoing->second);
    if (p.allows(black_node, canon_multiset(std::move(m)))) return chosen;
  } while (od.advance());
  return std::nullopt;
}

// ---- materialized classes ---------------------------------------------------

std::vector<int> Patch::outgoing_edges() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].role == Edge::Outgoing) out.push_back(int(i));
  return out;
}

std::vector<std::vector<Label>> Class::outgoing_projections() const {
  std::set<std::vector<Label>> proj;
  for (const auto& m : members) {
    std::vector<Label> pr;
    pr.reserve(outgoing.size());
    for (int e : outgoing) pr.push_back(m[std::size_t(e)]);
    proj.insert(std::move(pr));
  }
  return {proj.begin(), proj.end()};
}

LabelSet Class::outgoing_set(int which) const {
  LabelSet s;
  int e = outgoing.at(std::size_t(which));
  for (const auto& m : members) s.add(m[std::size_t(e)]);
  return s;
}

Class maximal_class(const BwProblem& p, const Patch& h) {
  const int nn = int(h.nodes.size());
  for (const auto& e : h.edges) {
    bool boundary = e.role != Patch::Edge::Internal;
    if (e.u < 0 || e.u >= nn || (boundary ? e.v != -1 : (e.v < 0 || e.v >= nn)))
      throw std::invalid_argument("maximal_class: malformed patch edge");
  }
  Class out;
  out.outgoing = h.outgoing_edges();
  std::vector<std::vector<Label>> dom;
  dom.reserve(h.edges.size());
  for (const auto& e : h.edges) {
    if (e.role == Patch::Edge::Incoming)
      dom.push_back(e.options.labels());
    else
      dom.push_back(LabelSet::all(p.out_alpha.size()).labels());
  }
  guard_product(dom, 1);
  std::vector<std::vector<int>> inc(h.nodes.size());
  for (std::size_t i = 0; i < h.edges.size(); ++i) {
    inc[std::size_t(h.edges[i].u)].push_back(int(i));
    if (h.edges[i].v >= 0) inc[std::size_t(h.edges[i].v)].push_back(int(i));
  }
  Odometer od(dom);
  if (!od.live) return out;
  do {
    bool ok = true;
    for (std::size_t v = 0; v < h.nodes.size() && ok; ++v) {
      PairMultiset m;
      m.reserve(inc[v].size());
      for (int e : inc[v]) m.emplace_back(h.edges[std::size_t(e)].input, od.value(std::size_t(e)));
      ok = p.allows(h.nodes[v].black, canon_multiset(std::move(m)));
    }
    if (!ok) continue;
    std::vector<Label> member(h.edges.size());
    for (std::size_t i = 0; i < h.edges.size(); ++i) member[i] = od.value(i);
    out.members.push_back(std::move(member));
  } while (od.advance());
  return out;
}

bool is_independent(const Class& c) {
  if (c.members.empty()) return true;
  auto proj = c.outgoing_projections();
  std::size_t prod = 1;
  for (std::size_t i = 0; i < c.outgoing.size(); ++i)
    prod *= std::size_t(c.outgoing_set(int(i)).size());
  return proj.size() == prod;
}

// ---- compress paths ---------------------------------------------------------

namespace {

std::string shape_string(const CompressPath& path, bool rev) {
  const int x = int(path.length());
  std::ostringstream os;
  os << "x" << x << ";";
  for (int idx = 0; idx < x; ++idx) {
    int i = rev ? x - 1 - idx : idx;
    os << (path.black[std::size_t(i)] ? 'b' : 'w');
    auto ex = path.incoming[std::size_t(i)];
    std::sort(ex.begin(), ex.end(), [](const IncomingEdge& a, const IncomingEdge& b) {
      return std::tie(a.input, a.options.bits) < std::tie(b.input, b.options.bits);
    });
    for (const auto& e : ex) os << "(" << int(e.input) << ":" << std::hex << e.options.bits << std::dec << ")";
    os << ";";
  }
  os << "e";
  for (int j = 0; j + 1 < x; ++j) {
    int jj = rev ? x - 2 - j : j;
    os << int(path.edge_input[std::size_t(jj)]) << ",";
  }
  os << ";o" << int(path.end_input[rev ? 1 : 0]) << "," << int(path.end_input[rev ? 0 : 1]);
  return os.str();
}

// Label-sets induced on every path edge by pinning the designated edge.
// edge_set[i] for i < middle holds labels completable toward the middle over
// nodes i+1.., for i > middle over nodes ..i-1; the middle entry is the pin.
struct PathProp {
  std::vector<LabelSet> edge_set;
  LabelSet first, last;
  Label middle = 0;
  int middle_edge = -1;
  int fixed_end = -1;
};

PathProp propagate_path(const BwProblem& p, const CompressPath& path, Label middle,
                        const ShapeKey& sk) {
  const bool rev = sk.reversed;
  const int x = int(path.length());
  if (x < 1) throw std::invalid_argument("compress path must have at least one node");
  if (path.edge_input.size() + 1 != path.length() || path.incoming.size() != path.length())
    throw std::invalid_argument("compress path fields disagree on length");
  PathProp pr;
  pr.middle = middle;
  LabelSet pin;
  pin.add(middle);
  if (x == 1) {
    pr.fixed_end = rev ? 1 : 0;
    auto in = path.incoming[0];
    in.push_back({path.end_input[std::size_t(pr.fixed_end)], pin});
    LabelSet other = rake_g(p, path.black[0], in, path.end_input[std::size_t(1 - pr.fixed_end)]);
    pr.first = pr.fixed_end == 0 ? pin : other;
    pr.last = pr.fixed_end == 0 ? other : pin;
    return pr;
  }
  int mc = std::min(x / 2, x - 2);
  int m = rev ? (x - 2) - mc : mc;
  pr.middle_edge = m;
  pr.edge_set.assign(std::size_t(x - 1), LabelSet{});
  pr.edge_set[std::size_t(m)] = pin;
  for (int i = m; i >= 1; --i) {
    auto in = path.incoming[std::size_t(i)];
    in.push_back({path.edge_input[std::size_t(i)], pr.edge_set[std::size_t(i)]});
    pr.edge_set[std::size_t(i - 1)] =
        rake_g(p, path.black[std::size_t(i)], in, path.edge_input[std::size_t(i - 1)]);
  }
  {
    auto in = path.incoming[0];
    in.push_back({path.edge_input[0], pr.edge_set[0]});
    pr.first = rake_g(p, path.black[0], in, path.end_input[0]);
  }
  for (int i = m + 1; i + 1 < x; ++i) {
    auto in = path.incoming[std::size_t(i)];
    in.push_back({path.edge_input[std::size_t(i - 1)], pr.edge_set[std::size_t(i - 1)]});
    pr.edge_set[std::size_t(i)] =
        rake_g(p, path.black[std::size_t(i)], in, path.edge_input[std::size_t(i)]);
  }
  {
    auto in = path.incoming[std::size_t(x - 1)];
    in.push_back({path.edge_input[std::size_t(x - 2)], pr.edge_set[std::size_t(x - 2)]});
    pr.last = rake_g(p, path.black[std::size_t(x - 1)], in, path.end_input[1]);
  }
  return pr;
}

CompressOutcome outcome_from(const PathProp& pr, const ShapeKey& sk, bool tabled) {
  CompressOutcome out;
  out.first = pr.first;
  out.last = pr.last;
  out.middle = pr.middle;
  out.middle_edge = pr.middle_edge;
  out.fixed_end = pr.fixed_end;
  out.shape = sk.key;
  out.tabled = tabled;
  out.edge_sets = pr.edge_set;
  return out;
}

// Table hit, else the first preference whose propagated ends are both
// nonempty, else the first preference. compress_g and compress_lookup must
// agree on misses, so both route through here.
Label preferred_middle(const BwProblem& p, const CompressPath& path, const FFunction& f,
                       const ShapeKey& sk, bool* tabled) {
  if (f.preference.empty()) throw std::invalid_argument("compress: empty preference order");
  auto it = f.table.find(sk.key);
  *tabled = it != f.table.end();
  if (*tabled) return it->second;
  for (Label cand : f.preference) {
    PathProp pr = propagate_path(p, path, cand, sk);
    if (!pr.first.empty() && !pr.last.empty()) return cand;
  }
  return f.preference.front();
}

}  // namespace

ShapeKey canonical_shape(const CompressPath& path) {
  if (path.length() < 1 || path.edge_input.size() + 1 != path.length() ||
      path.incoming.size() != path.length())
    throw std::invalid_argument("compress path fields disagree on length");
  std::string fwd = shape_string(path, false);
  std::string bwd = shape_string(path, true);
  if (bwd < fwd) return ShapeKey{bwd, true, false};
  return ShapeKey{fwd, false, fwd == bwd};
}

FFunction FFunction::with_alphabet_order(const BwProblem& p, int l) {
  FFunction f;
  f.l = l;
  f.preference.resize(p.out_alpha.size());
  for (std::size_t i = 0; i < f.preference.size(); ++i) f.preference[i] = Label(i);
  return f;
}

CompressOutcome compress_with_middle(const BwProblem& p, const CompressPath& path,
                                     Label middle) {
  ShapeKey sk = canonical_shape(path);
  return outcome_from(propagate_path(p, path, middle, sk), sk, false);
}

CompressOutcome compress_g(const BwProblem& p, const CompressPath& path, FFunction& f) {
  ShapeKey sk = canonical_shape(path);
  bool tabled = false;
  Label chosen = preferred_middle(p, path, f, sk, &tabled);
  if (!tabled) f.table.emplace(sk.key, chosen);
  return outcome_from(propagate_path(p, path, chosen, sk), sk, tabled);
}

CompressOutcome compress_lookup(const BwProblem& p, const CompressPath& path,
                                const FFunction& f) {
  ShapeKey sk = canonical_shape(path);
  bool tabled = false;
  Label chosen = preferred_middle(p, path, f, sk, &tabled);
  return outcome_from(propagate_path(p, path, chosen, sk), sk, tabled);
}

// ---- layered solving --------------------------------------------------------

namespace {

struct PathRec {
  std::vector<NodeId> nodes;
  std::vector<EdgeId> internal_e;
  std::array<EdgeId, 2> out_e = {kNoEdge, kNoEdge};
  std::vector<std::vector<EdgeId>> extra_e;  // per node, parallel to path.incoming
  CompressPath path;
  Label middle = 0;
};

}  // namespace

LayerSolveResult solve_by_layers(const BwProblem& p, const BwInstance& inst,
                                 const Decomposition& d, FFunction& f) {
  const Graph& g = inst.g;
  const std::size_t n = g.node_count();
  if (d.node.size() != n)
    throw std::invalid_argument("solve_by_layers: decomposition does not match the graph");
  LayerSolveResult res;
  std::vector<std::uint64_t> key(n);
  for (NodeId v = 0; v < n; ++v) {
    if (d.node[v].iter <= 0)
      throw std::invalid_argument("solve_by_layers: node without a layer assignment");
    key[v] = sublayer_key(d.node[v]);
  }
  // Edges between distinct sublayers are oriented upward; edges inside one
  // sublayer must sit inside a compress layer (path interiors).
  std::vector<std::vector<EdgeId>> ups(n);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    NodeId a = g.edge(e).a.node, b = g.edge(e).b.node;
    if (key[a] == key[b]) {
      if (d.node[a].kind != LayerKind::Compress)
        throw std::invalid_argument("solve_by_layers: adjacent nodes share a rake sublayer");
      continue;
    }
    ups[key[a] < key[b] ? a : b].push_back(e);
  }
  std::map<std::uint64_t, std::vector<NodeId>> buckets;
  for (NodeId v = 0; v < n; ++v) buckets[key[v]].push_back(v);

  auto lower_edges = [&](NodeId v) {
    std::vector<EdgeId> out;
    for (const auto& pe : g.ports(v))
      if (key[pe.to] < key[v]) out.push_back(pe.edge);
    return out;
  };

  std::vector<LabelSet> eset(g.edge_count());
  std::vector<char> ready(g.edge_count(), 0);
  auto extras_of = [&](const std::vector<EdgeId>& lower) {
    std::vector<IncomingEdge> in;
    in.reserve(lower.size());
    for (EdgeId e : lower) {
      if (!ready[e]) throw std::logic_error("solve_by_layers: set consumed before computed");
      in.push_back({inst.input[e], eset[e]});
    }
    return in;
  };

  std::map<std::uint64_t, std::vector<PathRec>> path_recs;

  // Up phase: label-sets per sublayer, lowest first.
  for (const auto& [bkey, members] : buckets) {
    if (d.node[members.front()].kind == LayerKind::Rake) {
      for (NodeId v : members) {
        auto extras = extras_of(lower_edges(v));
        if (ups[v].size() > 1)
          throw std::invalid_argument("solve_by_layers: rake node with two upward edges");
        if (ups[v].empty()) {
          if (!rake_feasible(p, inst.color[v] == NodeColor::Black, extras)) {
            res.empty_class = true;
            res.first_empty = v;
            return res;
          }
        } else {
          EdgeId e = ups[v].front();
          LabelSet s = rake_g(p, inst.color[v] == NodeColor::Black, extras, inst.input[e]);
          eset[e] = s;
          ready[e] = 1;
          if (s.empty()) {
            res.empty_class = true;
            res.first_empty = v;
            return res;
          }
        }
      }
      continue;
    }
    // Compress sublayer: rebuild each run in path order.
    std::set<NodeId> in_bucket(members.begin(), members.end());
    std::set<NodeId> done;
    auto bucket_nbrs = [&](NodeId v) {
      std::vector<NodeId> out;
      for (const auto& pe : g.ports(v))
        if (in_bucket.count(pe.to)) out.push_back(pe.to);
      return out;
    };
    for (NodeId seed : members) {
      if (done.count(seed)) continue;
      // gather the component
      std::vector<NodeId> comp{seed};
      done.insert(seed);
      for (std::size_t h = 0; h < comp.size(); ++h)
        for (NodeId w : bucket_nbrs(comp[h]))
          if (done.insert(w).second) comp.push_back(w);
      NodeId start = kNoNode;
      for (NodeId v : comp)
        if (bucket_nbrs(v).size() <= 1 && (start == kNoNode || v < start)) start = v;
      if (start == kNoNode)
        throw std::invalid_argument("solve_by_layers: compress layer contains a cycle");
      PathRec rec;
      NodeId prev = kNoNode, cur = start;
      while (true) {
        rec.nodes.push_back(cur);
        NodeId nxt = kNoNode;
        for (NodeId w : bucket_nbrs(cur))
          if (w != prev) nxt = w;
        if (nxt == kNoNode) break;
        prev = cur;
        cur = nxt;
      }
      if (rec.nodes.size() != comp.size())
        throw std::invalid_argument("solve_by_layers: compress component is not a path");
      const int x = int(rec.nodes.size());
      rec.path.black.resize(std::size_t(x));
      rec.path.incoming.resize(std::size_t(x));
      rec.extra_e.resize(std::size_t(x));
      for (int i = 0; i < x; ++i) {
        NodeId v = rec.nodes[std::size_t(i)];
        rec.path.black[std::size_t(i)] = inst.color[v] == NodeColor::Black;
        rec.extra_e[std::size_t(i)] = lower_edges(v);
        rec.path.incoming[std::size_t(i)] = extras_of(rec.extra_e[std::size_t(i)]);
        bool endpoint = i == 0 || i + 1 == x;
        if (!endpoint && !ups[v].empty())
          throw std::invalid_argument("solve_by_layers: path interior with an upward edge");
      }
      for (int i = 0; i + 1 < x; ++i) {
        auto e = g.edge_between(rec.nodes[std::size_t(i)], rec.nodes[std::size_t(i + 1)]);
        if (!e) throw std::logic_error("solve_by_layers: path order lost an edge");
        rec.internal_e.push_back(*e);
        rec.path.edge_input.push_back(inst.input[*e]);
      }
      if (x == 1) {
        if (ups[rec.nodes[0]].size() != 2)
          throw std::invalid_argument("solve_by_layers: lone compress node needs two upward edges");
        rec.out_e = {ups[rec.nodes[0]][0], ups[rec.nodes[0]][1]};
      } else {
        if (ups[rec.nodes.front()].size() != 1 || ups[rec.nodes.back()].size() != 1)
          throw std::invalid_argument("solve_by_layers: path endpoint without one upward edge");
        rec.out_e = {ups[rec.nodes.front()].front(), ups[rec.nodes.back()].front()};
      }
      rec.path.end_input = {inst.input[rec.out_e[0]], inst.input[rec.out_e[1]]};
      CompressOutcome oc = compress_g(p, rec.path, f);
      ++res.paths;
      if (!oc.tabled) res.added.push_back(oc.shape);
      rec.middle = oc.middle;
      eset[rec.out_e[0]] = oc.first;
      eset[rec.out_e[1]] = oc.last;
      ready[rec.out_e[0]] = ready[rec.out_e[1]] = 1;
      if (oc.first.empty() || oc.last.empty()) {
        res.empty_class = true;
        res.first_empty = oc.first.empty() ? rec.nodes.front() : rec.nodes.back();
        return res;
      }
      path_recs[bkey].push_back(std::move(rec));
    }
  }

  // Down phase: concrete labels per sublayer, highest first.
  EdgeLabeling elab(g.edge_count(), kNoLabel);
  auto fixed_label = [&](EdgeId e) {
    if (elab[e] == kNoLabel) throw std::logic_error("solve_by_layers: label read before assignment");
    return elab[e];
  };
  for (auto bit = buckets.rbegin(); bit != buckets.rend(); ++bit) {
    const auto& members = bit->second;
    if (d.node[members.front()].kind == LayerKind::Rake) {
      for (NodeId v : members) {
        auto lower = lower_edges(v);
        auto extras = extras_of(lower);
        std::optional<std::pair<Label, Label>> out;
        if (!ups[v].empty()) {
          EdgeId e = ups[v].front();
          out = {inst.input[e], fixed_label(e)};
        }
        auto pick = rake_pick(p, inst.color[v] == NodeColor::Black, extras, out);
        if (!pick) throw std::logic_error("solve_by_layers: rake completion vanished");
        for (std::size_t i = 0; i < lower.size(); ++i) elab[lower[i]] = (*pick)[i];
      }
      continue;
    }
    for (const PathRec& rec : path_recs[bit->first]) {
      const int x = int(rec.nodes.size());
      PathProp pr = propagate_path(p, rec.path, rec.middle, canonical_shape(rec.path));
      Label l0 = fixed_label(rec.out_e[0]);
      Label l1 = fixed_label(rec.out_e[1]);
      auto assign_extras = [&](int i, const std::vector<Label>& pick) {
        for (std::size_t j = 0; j < rec.extra_e[std::size_t(i)].size(); ++j)
          elab[rec.extra_e[std::size_t(i)][j]] = pick[j];
      };
      if (x == 1) {
        auto in = rec.path.incoming[0];
        in.push_back({rec.path.end_input[0], LabelSet::of({l0})});
        in.push_back({rec.path.end_input[1], LabelSet::of({l1})});
        auto pick = rake_pick(p, rec.path.black[0], in, std::nullopt);
        if (!pick) throw std::logic_error("solve_by_layers: path completion vanished");
        assign_extras(0, *pick);
        continue;
      }
      const int m = pr.middle_edge;
      Label left_label = l0;
      Label left_input = rec.path.end_input[0];
      for (int i = 0; i <= m; ++i) {
        auto in = rec.path.incoming[std::size_t(i)];
        in.push_back({rec.path.edge_input[std::size_t(i)], pr.edge_set[std::size_t(i)]});
        auto pick = rake_pick(p, rec.path.black[std::size_t(i)], in,
                              std::make_pair(left_input, left_label));
        if (!pick) throw std::logic_error("solve_by_layers: path completion vanished");
        assign_extras(i, *pick);
        Label mu = pick->back();
        elab[rec.internal_e[std::size_t(i)]] = mu;
        left_label = mu;
        left_input = rec.path.edge_input[std::size_t(i)];
      }
      Label right_label = l1;
      Label right_input = rec.path.end_input[1];
      for (int i = x - 1; i > m; --i) {
        auto in = rec.path.incoming[std::size_t(i)];
        in.push_back({rec.path.edge_input[std::size_t(i - 1)], pr.edge_set[std::size_t(i - 1)]});
        auto pick = rake_pick(p, rec.path.black[std::size_t(i)], in,
                              std::make_pair(right_input, right_label));
        if (!pick) throw std::logic_error("solve_by_layers: path completion vanished");
        assign_extras(i, *pick);
        Label mu = pick->back();
        elab[rec.internal_e[std::size_t(i - 1)]] = mu;
        right_label = mu;
        right_input = rec.path.edge_input[std::size_t(i - 1)];
      }
    }
  }
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    if (elab[e] == kNoLabel) throw std::logic_error("solve_by_layers: edge left unlabeled");
  res.labeling = std::move(elab);
  return res;
}

std::optional<EdgeLabeling> solve_rooted(const BwProblem& p, const BwInstance& inst,
                                         std::vector<LabelSet>* sets) {
  const Graph& g = inst.g;
  const std::size_t n = g.node_count();
  std::vector<NodeId> parent(n, kNoNode);
  std::vector<EdgeId> pedge(n, kNoEdge);
  std::vector<NodeId> order;
  order.reserve(n);
  std::vector<char> vis(n, 0);
  std::size_t components = 0;
  for (NodeId r = 0; r < n; ++r) {
    if (vis[r]) continue;
    ++components;
    vis[r] = 1;
    order.push_back(r);
    for (std::size_t h = order.size() - 1; h < order.size(); ++h) {
      NodeId u = order[h];
      for (const auto& pe : g.ports(u)) {
        if (vis[pe.to]) continue;
        vis[pe.to] = 1;
        parent[pe.to] = u;
        pedge[pe.to] = pe.edge;
        order.push_back(pe.to);
      }
    }
  }
  if (g.edge_count() + components != n)
    throw std::invalid_argument("solve_rooted: instance has a cycle");

  auto child_edges = [&](NodeId v) {
    std::vector<EdgeId> out;
    for (const auto& pe : g.ports(v))
      if (parent[pe.to] == v && pedge[pe.to] == pe.edge) out.push_back(pe.edge);
    return out;
  };

  std::vector<LabelSet> eset(g.edge_count());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId v = *it;
    std::vector<IncomingEdge> in;
    for (EdgeId e : child_edges(v)) in.push_back({inst.input[e], eset[e]});
    bool black = inst.color[v] == NodeColor::Black;
    if (parent[v] == kNoNode) {
      if (!rake_feasible(p, black, in)) return std::nullopt;
    } else {
      eset[pedge[v]] = rake_g(p, black, in, inst.input[pedge[v]]);
      if (eset[pedge[v]].empty()) return std::nullopt;
    }
  }
  EdgeLabeling elab(g.edge_count(), kNoLabel);
  for (NodeId v : order) {
    auto kids = child_edges(v);
    std::vector<IncomingEdge> in;
    for (EdgeId e : kids) in.push_back({inst.input[e], eset[e]});
    std::optional<std::pair<Label, Label>> out;
    if (parent[v] != kNoNode) out = {inst.input[pedge[v]], elab[pedge[v]]};
    auto pick = rake_pick(p, inst.color[v] == NodeColor::Black, in, out);
    if (!pick) throw std::logic_error("solve_rooted: completion vanished");
    for (std::size_t i = 0; i < kids.size(); ++i) elab[kids[i]] = (*pick)[i];
  }
  if (sets) *sets = std::move(eset);
  return elab;
}

// ---- f derivation -----------------------------------------------------------

DeriveReport derive_f(const BwProblem& p, int gamma, int l,
                      const std::vector<Graph>& validation_trees, int budget) {
  if (l < 1) throw std::invalid_argument("derive_f: l must be at least 1");
  if (gamma < 0) throw std::invalid_argument("derive_f: gamma must be nonnegative");
  if (p.out_alpha.size() == 0) throw std::invalid_argument("derive_f: empty output alphabet");
  DeriveReport rep;
  rep.trees = validation_trees.size();

  struct Case {
    BwInstance inst;
    Decomposition d;
    bool solvable;
  };
  std::vector<Case> cases;
  cases.reserve(validation_trees.size());
  for (const Graph& t : validation_trees) {
    auto ne = node_edge_instance(t);
    int gm = gamma > 0
                 ? gamma
                 : std::max(1, int(std::ceil(std::sqrt(double(ne.bw.g.node_count())))));
    Decomposition d = rake_compress(ne.bw.g, gm, l);
    bool s = solve_rooted(p, ne.bw).has_value();
    if (s) ++rep.solvable;
    cases.push_back({std::move(ne.bw), std::move(d), s});
  }

  const int sigma = int(p.out_alpha.size());
  std::vector<std::pair<std::string, int>> choices;  // shape key, preference index
  auto pref_index = [&](const FFunction& f, Label lab) {
    for (std::size_t i = 0; i < f.preference.size(); ++i)
      if (f.preference[i] == lab) return int(i);
    throw std::logic_error("derive_f: chosen label missing from preference order");
  };

  for (int attempt = 1; attempt <= budget; ++attempt) {
    rep.attempts = attempt;
    FFunction f = FFunction::with_alphabet_order(p, l);
    std::set<std::string> known;
    for (const auto& [k, idx] : choices) {
      f.table[k] = f.preference[std::size_t(idx)];
      known.insert(k);
    }
    std::string fail;
    for (std::size_t i = 0; i < cases.size() && fail.empty(); ++i) {
      LayerSolveResult r = solve_by_layers(p, cases[i].inst, cases[i].d, f);
      for (const std::string& k : r.added)
        if (known.insert(k).second) choices.emplace_back(k, pref_index(f, f.table.at(k)));
      if (!cases[i].solvable) continue;
      if (r.empty_class)
        fail = "empty class at node " + std::to_string(r.first_empty) + " on tree " +
               std::to_string(i);
      else if (!r.solved() || !check_bw(p, cases[i].inst, *r.labeling).ok())
        fail = "solvable tree " + std::to_string(i) + " left unsolved";
    }
    if (fail.empty()) {
      rep.found = true;
      rep.f = std::move(f);
      rep.failure.clear();
      return rep;
    }
    rep.failure = fail;
    while (!choices.empty() && choices.back().second + 1 >= sigma) choices.pop_back();
    if (choices.empty()) {
      rep.failure += "; every candidate table exhausted";
      return rep;
    }
    ++choices.back().second;
  }
  rep.failure += "; attempt budget exhausted";
  return rep;
}

DeriveReport derive_f_search(const BwProblem& p, int gamma,
                             const std::vector<Graph>& validation_trees, int l_min,
                             int l_max, int budget) {
  if (l_min < 1 || l_max < l_min)
    throw std::invalid_argument("derive_f_search: bad l range");
  DeriveReport last;
  for (int l = l_min; l <= l_max; ++l) {
    last = derive_f(p, gamma, l, validation_trees, budget);
    if (last.found) return last;
  }
  return last;
}

std::vector<Graph> validation_trees(int count, int max_n, std::uint64_t seed) {
  if (count < 1 || max_n < 2)
    throw std::invalid_argument("validation_trees: need count >= 1 and max_n >= 2");
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  std::vector<Graph> out;
  out.push_back(path_graph(std::min(40, max_n)));
  if (max_n >= 9) out.push_back(path_graph(std::min(17, max_n)));
  if (max_n >= 6) out.push_back(star_graph(std::min(5, max_n - 1)));
  if (max_n >= 9) out.push_back(caterpillar(std::min(10, max_n / 3), 2));
  if (max_n >= 15) out.push_back(binary_tree(std::min(4, int(std::bit_width(unsigned(max_n + 1))) - 1)));
  for (std::uint64_t i = 0; int(out.size()) < count; ++i) {
    int n = 4 + int(mix(seed + i) % std::uint64_t(std::max(1, max_n - 3)));
    int deg = 3 + int(i % 3);
    out.push_back(random_tree(n, deg, mix(seed ^ (i * 0x51ull))));
  }
  out.resize(std::size_t(count));
  return out;
}

// ---- serialization ----------------------------------------------------------

std::string f_function_to_json(const FFunction& f, const BwProblem& p) {
  nlohmann::json j;
  j["l"] = f.l;
  nlohmann::json pref = nlohmann::json::array();
  for (Label l : f.preference) pref.push_back(p.out_alpha.name(l));
  j["preference"] = std::move(pref);
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [k, v] : f.table) table[k] = p.out_alpha.name(v);
  j["table"] = std::move(table);
  return j.dump(2);
}

FFunction f_function_from_json(const std::string& text, const BwProblem& p) {
  nlohmann::json j = nlohmann::json::parse(text);
  FFunction f;
  f.l = j.at("l").get<int>();
  for (const auto& name : j.at("preference"))
    f.preference.push_back(p.out_alpha.id(name.get<std::string>()));
  for (const auto& [k, v] : j.at("table").items())
    f.table[k] = p.out_alpha.id(v.get<std::string>());
  return f;
}

std::string DeriveReport::to_json(const BwProblem& p) const {
  nlohmann::json j;
  j["found"] = found;
  j["attempts"] = attempts;
  j["trees"] = trees;
  j["solvable"] = solvable;
  j["failure"] = failure;
  if (found) j["f"] = nlohmann::json::parse(f_function_to_json(f, p));
  return j.dump(2);
}

}  // namespace lclab
