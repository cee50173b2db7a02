#include "lclab/lcl.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lclab {

Label Alphabet::add(const std::string& name) {
  if (auto l = find(name)) return *l;
  if (names_.size() >= 250) throw std::length_error("alphabet too large");
  names_.push_back(name);
  return static_cast<Label>(names_.size() - 1);
}

std::optional<Label> Alphabet::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<Label>(i);
  return std::nullopt;
}

Label Alphabet::id(const std::string& name) const {
  if (auto l = find(name)) return *l;
  throw std::out_of_range("alphabet: unknown label " + name);
}

PairMultiset canon_multiset(PairMultiset m) {
  std::sort(m.begin(), m.end());
  return m;
}

bool BwProblem::node_edge() const {
  return std::all_of(black.begin(), black.end(),
                     [](const PairMultiset& m) { return m.size() == 2; });
}

bool BwInstance::two_colored() const {
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ee = g.edge(e);
    if (color[ee.a.node] == color[ee.b.node]) return false;
  }
  return true;
}

bool CheckResult::failed(NodeId v) const {
  return std::any_of(failures.begin(), failures.end(),
                     [v](const NodeVerdict& f) { return f.node == v; });
}

CheckResult check_bw(const BwProblem& p, const BwInstance& inst, const EdgeLabeling& out) {
  if (out.size() != inst.g.edge_count())
    throw std::invalid_argument("check_bw: labeling does not cover the edge set");
  CheckResult res;
  for (NodeId v = 0; v < inst.g.node_count(); ++v) {
    PairMultiset m;
    bool bad_label = false;
    for (const auto& pe : inst.g.ports(v)) {
      Label in = inst.input[pe.edge];
      Label o = out[pe.edge];
      if (!p.in_alpha.contains(in) || !p.out_alpha.contains(o)) {
        res.failures.push_back({v, "label outside alphabet on edge " + std::to_string(pe.edge)});
        bad_label = true;
        break;
      }
      m.emplace_back(in, o);
    }
    if (bad_label) continue;
    if (!p.allows(inst.color[v] == NodeColor::Black, canon_multiset(std::move(m))))
      res.failures.push_back({v, "incident multiset not in constraint set"});
  }
  return res;
}

NodeEdgeInstance node_edge_instance(const Graph& g) {
  NodeEdgeInstance out;
  out.g_nodes = g.node_count();
  out.bw.g = Graph(g.node_count() + g.edge_count());
  out.bw.color.assign(out.bw.g.node_count(), NodeColor::White);
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    out.bw.color[out.black_of(e)] = NodeColor::Black;
  out.bw.input.reserve(2 * g.edge_count());
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ee = g.edge(e);
    out.bw.g.add_edge(ee.a.node, out.black_of(e));
    out.bw.g.add_edge(ee.b.node, out.black_of(e));
    auto [ia, ib] = g.edge_inputs(e);
    out.bw.input.push_back(ia == kNoLabel ? 0 : ia);
    out.bw.input.push_back(ib == kNoLabel ? 0 : ib);
  }
  return out;
}

namespace {

// Partial-assignment pruning: a node is viable while its labeled pairs form a
// sub-multiset of some allowed multiset of matching total size.
struct Solver {
  const BwProblem& p;
  const BwInstance& inst;
  std::vector<Label> out;
  std::vector<EdgeId> order;
  std::vector<int> remaining;  // unlabeled incident edges per node

  explicit Solver(const BwProblem& p_, const BwInstance& inst_)
      : p(p_), inst(inst_), out(inst_.g.edge_count(), kNoLabel) {
    remaining.resize(inst.g.node_count());
    for (NodeId v = 0; v < inst.g.node_count(); ++v) remaining[v] = inst.g.degree(v);
    // BFS edge order completes nodes early and keeps pruning effective
    std::vector<bool> seen_edge(inst.g.edge_count(), false), seen_node(inst.g.node_count(), false);
    std::vector<NodeId> queue;
    for (NodeId s = 0; s < inst.g.node_count(); ++s) {
      if (seen_node[s]) continue;
      seen_node[s] = true;
      queue.push_back(s);
      for (std::size_t head = queue.size() - 1; head < queue.size(); ++head) {
        NodeId u = queue[head];
        for (const auto& pe : inst.g.ports(u)) {
          if (!seen_edge[pe.edge]) {
            seen_edge[pe.edge] = true;
            order.push_back(pe.edge);
          }
          if (!seen_node[pe.to]) {
            seen_node[pe.to] = true;
            queue.push_back(pe.to);
          }
        }
      }
    }
  }

  PairMultiset labeled_pairs(NodeId v) const {
    PairMultiset m;
    for (const auto& pe : inst.g.ports(v))
      if (out[pe.edge] != kNoLabel) m.emplace_back(inst.input[pe.edge], out[pe.edge]);
    return canon_multiset(std::move(m));
  }

  static bool submultiset(const PairMultiset& part, const PairMultiset& full) {
    std::size_t j = 0;
    for (const auto& x : part) {
      while (j < full.size() && full[j] < x) ++j;
      if (j == full.size() || !(full[j] == x)) return false;
      ++j;
    }
    return true;
  }

  bool viable(NodeId v) const {
    PairMultiset part = labeled_pairs(v);
    const auto& allowed = inst.color[v] == NodeColor::Black ? p.black : p.white;
    std::size_t want = inst.g.ports(v).size();
    if (remaining[v] == 0) return allowed.count(part) > 0;
    for (const auto& full : allowed)
      if (full.size() == want && submultiset(part, full)) return true;
    return false;
  }

  bool dfs(std::size_t i) {
    if (i == order.size()) return true;
    EdgeId e = order[i];
    const auto& ee = inst.g.edge(e);
    for (Label l = 0; l < static_cast<Label>(p.out_alpha.size()); ++l) {
      out[e] = l;
      --remaining[ee.a.node];
      --remaining[ee.b.node];
      if (viable(ee.a.node) && viable(ee.b.node) && dfs(i + 1)) return true;
      ++remaining[ee.a.node];
      ++remaining[ee.b.node];
      out[e] = kNoLabel;
    }
    return false;
  }
};

}  // namespace

std::optional<EdgeLabeling> brute_force_solve(const BwProblem& p, const BwInstance& inst,
                                              std::size_t max_edges) {
  if (inst.g.edge_count() > max_edges)
    throw std::length_error("brute_force_solve: instance exceeds the size guard");
  if (!inst.two_colored()) throw std::invalid_argument("brute_force_solve: not two-colored");
  // isolated nodes still need an allowed (empty) multiset
  for (NodeId v = 0; v < inst.g.node_count(); ++v)
    if (inst.g.degree(v) == 0 &&
        !p.allows(inst.color[v] == NodeColor::Black, {}))
      return std::nullopt;
  Solver s(p, inst);
  if (s.dfs(0)) return s.out;
  return std::nullopt;
}

std::uint64_t count_bw_solutions(const BwProblem& p, const BwInstance& inst,
                                 std::size_t max_edges) {
  if (inst.g.edge_count() > max_edges)
    throw std::length_error("count_bw_solutions: instance exceeds the size guard");
  std::uint64_t count = 0;
  EdgeLabeling out(inst.g.edge_count(), 0);
  std::size_t m = inst.g.edge_count();
  std::size_t k = p.out_alpha.size();
  for (;;) {
    if (check_bw(p, inst, out).ok()) ++count;
    std::size_t i = 0;
    while (i < m && out[i] == static_cast<Label>(k - 1)) out[i++] = 0;
    if (i == m) break;
    ++out[i];
  }
  return count;
}

// ---- library ---------------------------------------------------------------

namespace {

BwProblem base_problem(const std::string& name, std::vector<std::string> outs) {
  BwProblem p;
  p.name = name;
  p.in_alpha.add("eps");
  for (const auto& o : outs) p.out_alpha.add(o);
  return p;
}

PairMultiset uniform(Label out, int count) {
  return PairMultiset(static_cast<std::size_t>(count), {0, out});
}

}  // namespace

BwProblem two_coloring(int max_degree) {
  BwProblem p = base_problem("2-coloring", {"A", "B"});
  for (int d = 0; d <= max_degree; ++d) {
    p.white.insert(uniform(0, d));
    p.white.insert(uniform(1, d));
  }
  p.black.insert(canon_multiset({{0, 0}, {0, 1}}));
  return p;
}

BwProblem three_coloring(int max_degree) {
  BwProblem p = base_problem("3-coloring", {"c1", "c2", "c3"});
  for (Label c = 0; c < 3; ++c)
    for (int d = 0; d <= max_degree; ++d) p.white.insert(uniform(c, d));
  for (Label a = 0; a < 3; ++a)
    for (Label b = 0; b < 3; ++b)
      if (a != b) p.black.insert(canon_multiset({{0, a}, {0, b}}));
  return p;
}

BwProblem maximal_matching(int max_degree) {
  BwProblem p = base_problem("maximal-matching", {"M", "P", "O"});
  Label M = 0, P = 1, O = 2;
  // matched node: one M edge, the rest O; unmatched node: all P
  for (int d = 1; d <= max_degree; ++d) {
    PairMultiset m = uniform(O, d - 1);
    m.emplace_back(0, M);
    p.white.insert(canon_multiset(std::move(m)));
  }
  for (int d = 0; d <= max_degree; ++d) p.white.insert(uniform(P, d));
  p.black.insert(canon_multiset({{0, M}, {0, M}}));
  p.black.insert(canon_multiset({{0, O}, {0, O}}));
  p.black.insert(canon_multiset({{0, O}, {0, P}}));
  return p;
}

BwProblem sinkless_orientation(int max_degree) {
  BwProblem p = base_problem("sinkless-orientation", {"I", "O"});
  Label I = 0, O = 1;
  // nodes of degree >= 3 need an outgoing edge; smaller degrees are free
  for (int d = 0; d <= max_degree; ++d) {
    for (int outs = 0; outs <= d; ++outs) {
      if (d >= 3 && outs == 0) continue;
      PairMultiset m = uniform(I, d - outs);
      for (int i = 0; i < outs; ++i) m.emplace_back(0, O);
      p.white.insert(canon_multiset(std::move(m)));
    }
  }
  p.black.insert(canon_multiset({{0, I}, {0, O}}));
  return p;
}

BwProblem always_valid(int max_degree) {
  BwProblem p = base_problem("always-valid", {"X"});
  for (int d = 0; d <= std::max(max_degree, 2); ++d) p.white.insert(uniform(0, d));
  p.black.insert(uniform(0, 2));
  return p;
}

std::optional<BwProblem> library_problem(const std::string& name, int max_degree) {
  if (name == "2-coloring") return two_coloring(max_degree);
  if (name == "3-coloring") return three_coloring(max_degree);
  if (name == "maximal-matching") return maximal_matching(max_degree);
  if (name == "sinkless-orientation") return sinkless_orientation(max_degree);
  if (name == "always-valid") return always_valid(max_degree);
  return std::nullopt;
}

std::vector<std::string> library_problem_names() {
  return {"2-coloring", "3-coloring", "maximal-matching", "sinkless-orientation", "always-valid"};
}

// ---- serialization ----------------------------------------------------------

namespace {

nlohmann::json multisets_to_json(const std::set<PairMultiset>& s, const BwProblem& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : s) {
    nlohmann::json row = nlohmann::json::array();
    for (auto [i, o] : m) row.push_back({p.in_alpha.name(i), p.out_alpha.name(o)});
    arr.push_back(std::move(row));
  }
  return arr;
}

std::set<PairMultiset> multisets_from_json(const nlohmann::json& arr, const BwProblem& p) {
  std::set<PairMultiset> out;
  for (const auto& row : arr) {
    PairMultiset m;
    for (const auto& pr : row)
      m.emplace_back(p.in_alpha.id(pr.at(0).get<std::string>()),
                     p.out_alpha.id(pr.at(1).get<std::string>()));
    out.insert(canon_multiset(std::move(m)));
  }
  return out;
}

}  // namespace

std::string problem_to_json(const BwProblem& p) {
  nlohmann::json j;
  j["format"] = "lclab-problem";
  j["version"] = 1;
  j["name"] = p.name;
  for (std::size_t i = 0; i < p.in_alpha.size(); ++i)
    j["input_labels"].push_back(p.in_alpha.name(static_cast<Label>(i)));
  for (std::size_t i = 0; i < p.out_alpha.size(); ++i)
    j["output_labels"].push_back(p.out_alpha.name(static_cast<Label>(i)));
  j["white"] = multisets_to_json(p.white, p);
  j["black"] = multisets_to_json(p.black, p);
  return j.dump(2);
}

BwProblem problem_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "lclab-problem")
    throw std::runtime_error("problem load: bad header");
  BwProblem p;
  p.name = j.value("name", "");
  for (const auto& s : j.at("input_labels")) p.in_alpha.add(s.get<std::string>());
  for (const auto& s : j.at("output_labels")) p.out_alpha.add(s.get<std::string>());
  p.white = multisets_from_json(j.at("white"), p);
  p.black = multisets_from_json(j.at("black"), p);
  return p;
}

std::string problem_to_text(const BwProblem& p) {
  std::ostringstream out;
  out << "problem " << p.name << "\n";
  out << "inputs:";
  for (std::size_t i = 0; i < p.in_alpha.size(); ++i)
    out << " " << p.in_alpha.name(static_cast<Label>(i));
  out << "\noutputs:";
  for (std::size_t i = 0; i < p.out_alpha.size(); ++i)
    out << " " << p.out_alpha.name(static_cast<Label>(i));
  auto dump = [&](const char* title, const std::set<PairMultiset>& cs) {
    out << "\n" << title << " (" << cs.size() << "):\n";
    for (const auto& m : cs) {
      out << "  {";
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out << ", ";
        out << p.in_alpha.name(m[i].first) << ":" << p.out_alpha.name(m[i].second);
      }
      out << "}\n";
    }
  };
  dump("white", p.white);
  dump("black", p.black);
  return out.str();
}

}  // namespace lclab
