#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "lclab/classes.hpp"
#include "lclab/decomp.hpp"
#include "lclab/graph_gen.hpp"
#include "lclab/lcl.hpp"

using namespace lclab;

namespace {

Graph cycle_graph(int n) {
  Graph g{std::size_t(n)};
  for (NodeId v = 0; v + 1 < NodeId(n); ++v) g.add_edge(v, v + 1);
  g.add_edge(NodeId(n - 1), 0);
  return g;
}

// All valid labelings of a small instance, by plain enumeration.
std::vector<EdgeLabeling> all_solutions(const BwProblem& p, const BwInstance& inst) {
  std::vector<EdgeLabeling> out;
  const std::size_t m = inst.g.edge_count();
  const std::size_t k = p.out_alpha.size();
  EdgeLabeling lab(m, 0);
  for (;;) {
    if (check_bw(p, inst, lab).ok()) out.push_back(lab);
    std::size_t i = 0;
    while (i < m && lab[i] == Label(k - 1)) lab[i++] = 0;
    if (i == m) break;
    ++lab[i];
  }
  return out;
}

// Bare alternating path as seen by the compress machinery: no extra incoming
// edges, unit input alphabet.
CompressPath bare_path(int x, bool first_black) {
  CompressPath path;
  path.black.resize(std::size_t(x));
  for (int i = 0; i < x; ++i) path.black[std::size_t(i)] = first_black == (i % 2 == 0);
  path.edge_input.assign(std::size_t(x - 1), 0);
  path.incoming.resize(std::size_t(x));
  return path;
}

CompressPath reversed(const CompressPath& path) {
  CompressPath r = path;
  std::reverse(r.black.begin(), r.black.end());
  std::reverse(r.edge_input.begin(), r.edge_input.end());
  std::reverse(r.incoming.begin(), r.incoming.end());
  std::swap(r.end_input[0], r.end_input[1]);
  return r;
}

// Patch with the same feasible labelings as a compress path: internal edges
// first (path order), then each node's incoming edges, then the two outgoing
// ends. Returns the patch plus the index of every region.
struct PathPatch {
  Patch h;
  std::vector<int> internal;  // per path edge
  int out0 = -1, out1 = -1;
};

PathPatch patch_of(const CompressPath& path) {
  PathPatch pp;
  const int x = int(path.length());
  pp.h.nodes.resize(std::size_t(x));
  for (int i = 0; i < x; ++i) pp.h.nodes[std::size_t(i)].black = path.black[std::size_t(i)];
  for (int i = 0; i + 1 < x; ++i) {
    pp.internal.push_back(int(pp.h.edges.size()));
    pp.h.edges.push_back({i, i + 1, path.edge_input[std::size_t(i)], Patch::Edge::Internal, {}});
  }
  for (int i = 0; i < x; ++i)
    for (const auto& in : path.incoming[std::size_t(i)])
      pp.h.edges.push_back({i, -1, in.input, Patch::Edge::Incoming, in.options});
  pp.out0 = int(pp.h.edges.size());
  pp.h.edges.push_back({0, -1, path.end_input[0], Patch::Edge::Outgoing, {}});
  pp.out1 = int(pp.h.edges.size());
  pp.h.edges.push_back({x - 1, -1, path.end_input[1], Patch::Edge::Outgoing, {}});
  return pp;
}

// Members of the path's maximal class whose designated edge carries the label
// compress_g fixed there.
Class pinned_class(const BwProblem& p, const CompressPath& path, const CompressOutcome& oc) {
  PathPatch pp = patch_of(path);
  int pin = oc.middle_edge >= 0 ? pp.internal[std::size_t(oc.middle_edge)]
                                : (oc.fixed_end == 0 ? pp.out0 : pp.out1);
  Class full = maximal_class(p, pp.h);
  Class sub;
  sub.outgoing = {pp.out0, pp.out1};
  for (const auto& m : full.members)
    if (m[std::size_t(pin)] == oc.middle) sub.members.push_back(m);
  return sub;
}

}  // namespace

TEST_CASE("label sets: basic operations") {
  LabelSet s = LabelSet::of({0, 2});
  CHECK(s.contains(0));
  CHECK_FALSE(s.contains(1));
  CHECK(s.size() == 2);
  CHECK(s.labels() == std::vector<Label>{0, 2});
  CHECK(s.subset_of(LabelSet::all(3)));
  CHECK_FALSE(LabelSet::all(3).subset_of(s));
  CHECK(LabelSet{}.empty());
  auto p = two_coloring();
  CHECK(label_set_to_string(LabelSet::of({0, 1}), p.out_alpha) == "{A,B}");
  CHECK(label_set_to_string(LabelSet{}, p.out_alpha) == "{}");
}

TEST_CASE("rake_g: 2-coloring pins") {
  auto p = two_coloring();
  Label A = p.out_alpha.id("A"), B = p.out_alpha.id("B");
  // isolated white leaf: both colors remain possible
  CHECK(rake_g(p, false, {}, 0) == LabelSet::of({A, B}));
  // black node whose other side is pinned to {A} must answer B
  CHECK(rake_g(p, true, {{0, LabelSet::of({A})}}, 0) == LabelSet::of({B}));
  // white node fed {A} and {B} can satisfy neither uniform constraint
  CHECK(rake_g(p, false, {{0, LabelSet::of({A})}, {0, LabelSet::of({B})}}, 0).empty());
  CHECK_FALSE(rake_feasible(p, false, {{0, LabelSet::of({A})}, {0, LabelSet::of({B})}}));
}

TEST_CASE("rake_g: agrees with explicit enumeration on random nodes") {
  auto p = *library_problem("maximal-matching", 5);
  const std::size_t k = p.out_alpha.size();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int deg = int(rng() % 4);
    bool black = rng() & 1;
    if (black) deg = 1;  // black nodes have exactly two edges
    std::vector<IncomingEdge> in{std::size_t(deg)};
    for (auto& e : in) {
      e.options.bits = (rng() % ((1u << k) - 1)) + 1;
      e.input = 0;
    }
    LabelSet got = rake_g(p, black, in, 0);
    for (std::size_t lam = 0; lam < k; ++lam) {
      // count completions by brute force over incoming choices
      bool any = false;
      std::vector<std::size_t> idx(in.size(), 0);
      auto opts = [&](std::size_t i) { return in[i].options.labels(); };
      for (bool live = true; live;) {
        PairMultiset m;
        for (std::size_t i = 0; i < in.size(); ++i) m.emplace_back(0, opts(i)[idx[i]]);
        m.emplace_back(0, Label(lam));
        if (p.allows(black, canon_multiset(std::move(m)))) {
          any = true;
          break;
        }
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] == opts(i).size()) idx[i++] = 0;
        live = i < idx.size();
      }
      CHECK(got.contains(Label(lam)) == any);
    }
  }
}

TEST_CASE("rake_g: monotone in the incoming sets") {
  for (auto name : {"2-coloring", "maximal-matching", "sinkless-orientation"}) {
    auto p = *library_problem(name, 5);
    const std::size_t k = p.out_alpha.size();
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      bool black = rng() & 1;
      int deg = black ? 1 : int(rng() % 3 + 1);
      std::vector<IncomingEdge> small{std::size_t(deg)}, big;
      for (auto& e : small) e.options.bits = (rng() % ((1u << k) - 1)) + 1;
      big = small;
      for (auto& e : big) e.options.bits |= rng() % (1u << k);
      CHECK(rake_g(p, black, small, 0).subset_of(rake_g(p, black, big, 0)));
    }
  }
}

TEST_CASE("maximal_class: whole-instance patches match brute-force enumeration") {
  for (auto name : {"2-coloring", "maximal-matching"}) {
    auto p = *library_problem(name, 5);
    for (int n = 2; n <= 6; ++n) {
      for (const Graph& t : nonisomorphic_trees(n)) {
        auto ne = node_edge_instance(t);
        if (ne.bw.g.edge_count() > 12) continue;
        Patch h;
        h.nodes.resize(ne.bw.g.node_count());
        for (NodeId v = 0; v < ne.bw.g.node_count(); ++v)
          h.nodes[v].black = ne.bw.color[v] == NodeColor::Black;
        for (EdgeId e = 0; e < ne.bw.g.edge_count(); ++e)
          h.edges.push_back({int(ne.bw.g.edge(e).a.node), int(ne.bw.g.edge(e).b.node),
                             ne.bw.input[e], Patch::Edge::Internal, {}});
        Class c = maximal_class(p, h);
        auto sols = all_solutions(p, ne.bw);
        REQUIRE(c.members.size() == sols.size());
        std::set<std::vector<Label>> got(c.members.begin(), c.members.end());
        for (const auto& s : sols) CHECK(got.count(s) == 1);
      }
    }
  }
}

TEST_CASE("maximal_class: rejects oversized patches") {
  auto p = *library_problem("maximal-matching", 5);
  Patch h;
  h.nodes.resize(24);
  for (int i = 0; i + 1 < 24; ++i) h.edges.push_back({i, i + 1, 0, Patch::Edge::Internal, {}});
  h.edges.push_back({0, -1, 0, Patch::Edge::Outgoing, {}});
  CHECK_THROWS_AS(maximal_class(p, h), std::length_error);
  Patch bad;
  bad.nodes.resize(1);
  bad.edges.push_back({0, 5, 0, Patch::Edge::Internal, {}});
  CHECK_THROWS_AS(maximal_class(p, bad), std::invalid_argument);
}

TEST_CASE("is_independent: rectangles and counterexamples") {
  Class c;
  c.outgoing = {0, 1};
  CHECK(is_independent(c));  // empty class
  c.members = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  CHECK(is_independent(c));
  c.members = {{0, 1}, {1, 0}};  // parity-linked ends, mixing breaks it
  CHECK_FALSE(is_independent(c));
  c.members = {{0, 1}};
  CHECK(is_independent(c));
  // one outgoing edge is always independent
  Class one;
  one.outgoing = {0};
  one.members = {{0, 1}, {1, 1}};
  CHECK(is_independent(one));
}

TEST_CASE("2-coloring path classes are dependent until an edge is fixed") {
  auto p = two_coloring();
  CompressPath path = bare_path(5, true);  // b w b w b
  Class full = maximal_class(p, patch_of(path).h);
  full.outgoing = {patch_of(path).out0, patch_of(path).out1};
  CHECK_FALSE(full.members.empty());
  CHECK_FALSE(is_independent(full));

  Label A = p.out_alpha.id("A");
  CompressOutcome oc = compress_with_middle(p, path, A);
  // fixing the middle makes both boundary sets singletons, parity-determined
  CHECK(oc.first.size() == 1);
  CHECK(oc.last.size() == 1);
  Class pinned = pinned_class(p, path, oc);
  CHECK(is_independent(pinned));
  CHECK(pinned.outgoing_set(0) == oc.first);
  CHECK(pinned.outgoing_set(1) == oc.last);
}

TEST_CASE("compress_g: propagated sets equal the pinned class projections") {
  std::mt19937_64 rng(23);
  for (auto name : {"maximal-matching", "3-coloring", "sinkless-orientation"}) {
    auto p = *library_problem(name, 5);
    const std::size_t k = p.out_alpha.size();
    for (int trial = 0; trial < 60; ++trial) {
      int x = 1 + int(rng() % 5);
      CompressPath path = bare_path(x, rng() & 1);
      for (int i = 0; i < x; ++i) {
        if (path.black[std::size_t(i)]) continue;  // black nodes have no spare ports
        int extra = int(rng() % 3);
        if (x == 1 && extra == 0) extra = 1;
        for (int e = 0; e < extra; ++e) {
          IncomingEdge in;
          in.options.bits = (rng() % ((1u << k) - 1)) + 1;
          path.incoming[std::size_t(i)].push_back(in);
        }
      }
      FFunction f = FFunction::with_alphabet_order(p, 1);
      CompressOutcome oc = compress_g(p, path, f);
      Class pinned = pinned_class(p, path, oc);
      CHECK(is_independent(pinned));
      if (pinned.members.empty()) {
        CHECK((oc.first.empty() || oc.last.empty()));
      } else {
        CHECK(pinned.outgoing_set(0) == oc.first);
        CHECK(pinned.outgoing_set(1) == oc.last);
        // independence, spelled out: every mixed boundary pair is realized
        for (Label a : oc.first.labels())
          for (Label b : oc.last.labels()) {
            bool seen = false;
            for (const auto& m : pinned.members)
              seen |= m[std::size_t(pinned.outgoing[0])] == a &&
                      m[std::size_t(pinned.outgoing[1])] == b;
            CHECK(seen);
          }
      }
    }
  }
}

TEST_CASE("compress_g: orientation of the run does not matter") {
  auto p = *library_problem("maximal-matching", 5);
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    int x = 1 + int(rng() % 5);
    CompressPath path = bare_path(x, rng() & 1);
    for (int i = 0; i < x; ++i) {
      if (path.black[std::size_t(i)] || (rng() & 1)) continue;
      IncomingEdge in;
      in.options.bits = (rng() % 7) + 1;
      path.incoming[std::size_t(i)].push_back(in);
    }
    CompressPath rev = reversed(path);
    ShapeKey ka = canonical_shape(path), kb = canonical_shape(rev);
    CHECK(ka.key == kb.key);
    FFunction f1 = FFunction::with_alphabet_order(p, 1);
    FFunction f2 = FFunction::with_alphabet_order(p, 1);
    CompressOutcome a = compress_g(p, path, f1);
    CompressOutcome b = compress_g(p, rev, f2);
    CHECK(a.middle == b.middle);
    if (ka.reversed != kb.reversed) {
      // distinguishable orientations pin the same physical edge
      CHECK(a.first == b.last);
      CHECK(a.last == b.first);
      if (x >= 2) CHECK(a.middle_edge == x - 2 - b.middle_edge);
    } else {
      // palindromic shape: both presentations are the canonical reading and
      // produce the same outcome in their own coordinates
      CHECK(a.first == b.first);
      CHECK(a.last == b.last);
      CHECK(a.middle_edge == b.middle_edge);
    }
  }
}

TEST_CASE("solve_rooted: matches brute force and stays inside its sets") {
  for (auto name : {"2-coloring", "maximal-matching", "sinkless-orientation", "3-coloring"}) {
    auto p = *library_problem(name, 6);
    for (int n = 2; n <= 8; ++n) {
      for (const Graph& t : nonisomorphic_trees(n)) {
        auto ne = node_edge_instance(t);
        std::vector<LabelSet> sets;
        auto mine = solve_rooted(p, ne.bw, &sets);
        auto bf = brute_force_solve(p, ne.bw);
        REQUIRE(mine.has_value() == bf.has_value());
        if (!mine) continue;
        CHECK(check_bw(p, ne.bw, *mine).ok());
        // every labeled edge with a propagated set stays inside it
        for (EdgeId e = 0; e < ne.bw.g.edge_count(); ++e)
          if (!sets[e].empty()) CHECK(sets[e].contains((*mine)[e]));
      }
    }
  }
}

TEST_CASE("solve_rooted: propagated set is exactly the solution projection") {
  auto p = *library_problem("maximal-matching", 5);
  for (const Graph& t : nonisomorphic_trees(6)) {
    auto ne = node_edge_instance(t);
    if (ne.bw.g.edge_count() > 12) continue;
    std::vector<LabelSet> sets;
    auto mine = solve_rooted(p, ne.bw, &sets);
    auto sols = all_solutions(p, ne.bw);
    REQUIRE(mine.has_value() == !sols.empty());
    if (!mine) continue;
    // the set on a child->parent edge collects the solutions of the subtree
    // hanging below it; for edges on no higher constraint path that equals the
    // projection of all global solutions
    for (EdgeId e = 0; e < ne.bw.g.edge_count(); ++e) {
      LabelSet proj;
      for (const auto& s : sols) proj.add(s[e]);
      if (!sets[e].empty()) CHECK(proj.subset_of(sets[e]));
    }
  }
}

TEST_CASE("solve_rooted: throws on cycles") {
  auto p = two_coloring();
  BwInstance inst = node_edge_instance(cycle_graph(4)).bw;
  CHECK_THROWS_AS(solve_rooted(p, inst), std::invalid_argument);
}

TEST_CASE("solve_by_layers: rake-only instances") {
  auto p = *library_problem("maximal-matching", 6);
  for (const Graph& t : {star_graph(5), path_graph(2), binary_tree(3)}) {
    auto ne = node_edge_instance(t);
    Decomposition d = rake_compress(ne.bw.g, 2, 4);
    FFunction f = FFunction::with_alphabet_order(p, 4);
    auto res = solve_by_layers(p, ne.bw, d, f);
    REQUIRE(res.solved());
    CHECK(check_bw(p, ne.bw, *res.labeling).ok());
  }
  // single node, no edges
  auto ne = node_edge_instance(Graph{1});
  Decomposition d = rake_compress(ne.bw.g, 1, 1);
  FFunction f = FFunction::with_alphabet_order(p, 1);
  auto res = solve_by_layers(p, ne.bw, d, f);
  REQUIRE(res.solved());
  CHECK(res.labeling->empty());
}

TEST_CASE("solve_by_layers: reports the node whose class empties") {
  // a degree-7 hub exceeds the degree-6 constraint set, so the instance is
  // unsolvable and the hub is where the up phase dies
  auto p = two_coloring(6);
  Graph g = star_graph(7);
  auto ne = node_edge_instance(g);
  Decomposition d = rake_compress(ne.bw.g, 1, 2);
  FFunction f = FFunction::with_alphabet_order(p, 2);
  auto res = solve_by_layers(p, ne.bw, d, f);
  CHECK_FALSE(res.solved());
  CHECK(res.empty_class);
  CHECK(res.first_empty == 0);  // the hub
  CHECK_FALSE(solve_rooted(p, ne.bw).has_value());
}

TEST_CASE("solve_by_layers: solves matching over real decompositions") {
  auto p = *library_problem("maximal-matching", 6);
  FFunction f = FFunction::with_alphabet_order(p, 3);
  std::size_t paths_total = 0;
  for (int n : {20, 41, 60}) {
    for (int gamma : {1, 3}) {
      Graph t = n == 41 ? path_graph(41) : random_tree(n, 4, std::uint64_t(n) * 17 + gamma);
      auto ne = node_edge_instance(t);
      Decomposition d = rake_compress(ne.bw.g, gamma, 3);
      auto res = solve_by_layers(p, ne.bw, d, f);
      REQUIRE_MESSAGE(res.solved(), "n=", n, " gamma=", gamma);
      CHECK(check_bw(p, ne.bw, *res.labeling).ok());
      paths_total += res.paths;
    }
  }
  CHECK(paths_total > 0);  // the decompositions really exercised compress runs
}

TEST_CASE("derive_f: always-valid accepts the first table") {
  auto p = always_valid(6);
  auto trees = validation_trees(12, 40, 5);
  auto rep = derive_f(p, 1, 2, trees);
  CHECK(rep.found);
  CHECK(rep.attempts == 1);
  CHECK(rep.solvable == trees.size());
}

TEST_CASE("derive_f: maximal matching at gamma 1") {
  auto p = *library_problem("maximal-matching", 6);
  auto trees = validation_trees(50, 60, 12345);

  // run lengths 1 and 2 provably admit no table over this corpus
  auto r1 = derive_f(p, 1, 1, trees);
  CHECK_FALSE(r1.found);
  CHECK(r1.failure.find("exhausted") != std::string::npos);

  // run length 3 works on the first sweep
  auto rep = derive_f(p, 1, 3, trees);
  REQUIRE(rep.found);
  CHECK(rep.attempts == 1);
  CHECK(rep.solvable == 50);
  CHECK(rep.f.table.size() > 10);

  // the found table, replayed read-only, solves every validation tree
  for (const Graph& t : trees) {
    auto ne = node_edge_instance(t);
    Decomposition d = rake_compress(ne.bw.g, 1, 3);
    FFunction replay = rep.f;
    auto res = solve_by_layers(p, ne.bw, d, replay);
    REQUIRE(res.solved());
    CHECK(check_bw(p, ne.bw, *res.labeling).ok());
    CHECK(res.added.empty());  // no shape was missing from the table
  }

  // derivation is deterministic
  auto again = derive_f(p, 1, 3, trees);
  REQUIRE(again.found);
  CHECK(f_function_to_json(again.f, p) == f_function_to_json(rep.f, p));

  // the search wrapper lands on the same run length
  auto sr = derive_f_search(p, 1, trees, 1, 4, 48);
  REQUIRE(sr.found);
  CHECK(sr.f.l == 3);
}

TEST_CASE("derive_f: 2-coloring dies under sqrt-n gamma") {
  auto p = two_coloring(6);
  auto trees = validation_trees(25, 60, 12345);
  auto rep = derive_f_search(p, 0, trees, 1, 8, 200);
  CHECK_FALSE(rep.found);
  CHECK(rep.failure.find("empty class") != std::string::npos);
}

TEST_CASE("f function: json round trip") {
  auto p = *library_problem("maximal-matching", 6);
  auto trees = validation_trees(10, 40, 99);
  auto rep = derive_f(p, 1, 3, trees);
  REQUIRE(rep.found);
  FFunction back = f_function_from_json(f_function_to_json(rep.f, p), p);
  CHECK(back.l == rep.f.l);
  CHECK(back.preference == rep.f.preference);
  CHECK(back.table == rep.f.table);
  CHECK(rep.to_json(p).find("\"found\": true") != std::string::npos);
}

TEST_CASE("derive_f: argument validation") {
  auto p = two_coloring();
  auto trees = validation_trees(3, 20, 1);
  CHECK_THROWS_AS(derive_f(p, 1, 0, trees), std::invalid_argument);
  CHECK_THROWS_AS(derive_f(p, -1, 2, trees), std::invalid_argument);
  CHECK_THROWS_AS(derive_f_search(p, 1, trees, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(validation_trees(0, 20, 1), std::invalid_argument);
}
