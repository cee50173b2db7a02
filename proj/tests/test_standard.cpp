#include <doctest.h>

#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lclab/graph_gen.hpp"
#include "lclab/standard_lcl.hpp"

using namespace lclab;

namespace {

// Node writes its own color on every incident half-edge.
HalfEdgeLabeling color_labeling(const Graph& g, const std::vector<Label>& color) {
  HalfEdgeLabeling out = make_half_edge_map(g, 0);
  for (NodeId v = 0; v < g.node_count(); ++v)
    for (std::size_t p = 0; p < g.ports(v).size(); ++p) out[v][p] = color[v];
  return out;
}

std::vector<Label> greedy_tree_coloring(const Graph& g) {
  std::vector<Label> color(g.node_count(), 0);
  std::vector<int> depth = g.bfs_depths(0);
  for (NodeId v = 0; v < g.node_count(); ++v) color[v] = depth[v] % 2;
  return color;
}

// Perfect matching in vertex-checkable form: both halves of an edge agree on
// M/O and every node has exactly one M edge. Not solvable on every tree.
StandardLcl perfect_matching_standard(int max_degree) {
  StandardLcl p;
  p.name = "perfect-matching-std";
  p.radius = 1;
  p.in_alpha.add("-");
  Label M = p.out_alpha.add("M");
  Label O = p.out_alpha.add("O");
  for (int d = 1; d <= max_degree; ++d) {
    Ball b;
    NodeId c = b.g.add_node();
    for (int i = 0; i < d; ++i) b.g.add_edge(c, b.g.add_node());
    b.in = make_half_edge_map(b.g, 0);
    b.out = make_half_edge_map(b.g, O);
    b.out[c][0] = M;
    b.out[1][0] = M;
    p.add_ball(std::move(b));
  }
  return p;
}

Label ball_center_out(const Ball& b, std::size_t j) { return b.out[0][j]; }
Label ball_far_out(const Ball& b, std::size_t j) {
  const PortEntry& pe = b.g.ports(0)[j];
  return b.out[pe.to][pe.rev];
}

}  // namespace

TEST_CASE("ball extraction and canonical form") {
  Graph g = path_graph(5);
  std::vector<Label> color = {0, 1, 0, 1, 0};
  auto out = color_labeling(g, color);

  Ball mid = extract_ball(g, out, 2, 1);
  CHECK(mid.g.node_count() == 3);
  CHECK(mid.g.edge_count() == 2);
  CHECK(mid.radius() == 1);

  Ball wide = extract_ball(g, out, 2, 2);
  CHECK(wide.g.node_count() == 5);
  CHECK(wide.radius() == 2);

  // both interior nodes of the path see the same centered labeled ball
  CHECK(ball_canon(extract_ball(g, out, 1, 1)) == ball_canon(extract_ball(g, out, 3, 1)));
  // ends differ from the middle (degree 1 vs 2)
  CHECK(ball_canon(extract_ball(g, out, 0, 1)) != ball_canon(extract_ball(g, out, 2, 1)));
  // center color differs between layers
  CHECK(ball_canon(extract_ball(g, out, 1, 1)) != ball_canon(extract_ball(g, out, 2, 1)));
}

TEST_CASE("ball canon ignores port order") {
  // star with leaf colors (1,2) built in both port orders
  auto build = [](Label first, Label second) {
    Ball b;
    NodeId c = b.g.add_node();
    b.g.add_edge(c, b.g.add_node());
    b.g.add_edge(c, b.g.add_node());
    b.in = make_half_edge_map(b.g, 0);
    b.out = make_half_edge_map(b.g, 0);
    b.out[1][0] = first;
    b.out[2][0] = second;
    return b;
  };
  CHECK(ball_canon(build(1, 2)) == ball_canon(build(2, 1)));
  CHECK(ball_canon(build(1, 2)) != ball_canon(build(1, 1)));
}

TEST_CASE("standard checker accepts proper colorings and localizes faults") {
  auto p = three_coloring_standard();
  // 6 + 9 + 12 colored stars of degree 1..3, plus one unlabeled isolated node
  // (a degree-0 ball has no half-edges, so all three colors collapse)
  CHECK(p.balls.size() == 28);

  Graph g = random_tree(40, 3, 7);
  auto color = greedy_tree_coloring(g);
  std::vector<Label> c3(color.begin(), color.end());
  auto out = color_labeling(g, c3);
  CHECK(check_standard(p, g, out).ok());

  // corrupt one node's outputs: only nodes within distance 1 may fail
  NodeId bad = 20;
  for (std::size_t pp = 0; pp < g.ports(bad).size(); ++pp) out[bad][pp] = color[g.ports(bad)[pp].to];
  auto res = check_standard(p, g, out);
  CHECK(!res.ok());
  auto depth = g.bfs_depths(bad);
  for (const auto& f : res.failures) CHECK(depth[f.node] <= 1);
  CHECK(res.failed(bad));
}

TEST_CASE("brute-force standard solver agrees with hand verdicts") {
  auto pm = perfect_matching_standard(3);
  CHECK(brute_force_standard(pm, path_graph(2)).has_value());
  CHECK(!brute_force_standard(pm, path_graph(3)).has_value());
  CHECK(brute_force_standard(pm, path_graph(4)).has_value());
  CHECK(!brute_force_standard(pm, star_graph(3)).has_value());

  auto found = brute_force_standard(pm, path_graph(4));
  REQUIRE(found.has_value());
  CHECK(check_standard(pm, path_graph(4), *found).ok());

  CHECK_THROWS_AS(brute_force_standard(pm, path_graph(11)), std::length_error);
}

TEST_CASE("conversion shape: one output triple per (ball, center port)") {
  auto av = always_valid_standard();
  CHECK(av.balls.size() == 4);
  auto cav = to_node_edge(av);
  CHECK(cav.bw.node_edge());
  CHECK(cav.bw.out_alpha.size() == 6);  // 0+1+2+3 center ports
  CHECK(cav.triple_of_label.size() == 6);
  CHECK(cav.bw.white.size() == 4);
  CHECK(cav.bw.black.size() == 21);  // every unordered triple pair glues

  auto c3 = to_node_edge(three_coloring_standard());
  CHECK(c3.bw.out_alpha.size() == 60);  // 6*1 + 9*2 + 12*3
  std::size_t ports = 0;
  for (const auto& b : three_coloring_standard().balls) ports += b.g.ports(0).size();
  CHECK(ports == 60);
  CHECK(c3.bw.white.size() == 28);
}

TEST_CASE("conversion edge constraints match the direct gluing rule") {
  auto p = three_coloring_standard();
  auto conv = to_node_edge(p);

  // independent rule for radius 1: each side's center color must equal what
  // the other ball claims about its neighbor on the shared edge
  std::set<PairMultiset> expect;
  const auto& balls = p.balls;
  for (std::size_t x = 0; x < conv.triple_of_label.size(); ++x)
    for (std::size_t y = x; y < conv.triple_of_label.size(); ++y) {
      auto [bx, jx] = conv.triple_of_label[x];
      auto [by, jy] = conv.triple_of_label[y];
      if (ball_center_out(balls[bx], jx) != ball_far_out(balls[by], jy)) continue;
      if (ball_center_out(balls[by], jy) != ball_far_out(balls[bx], jx)) continue;
      PairMultiset m;
      m.emplace_back(0, static_cast<Label>(x));
      m.emplace_back(0, static_cast<Label>(y));
      expect.insert(canon_multiset(m));
    }
  CHECK(conv.bw.black == expect);
}

TEST_CASE("conversion preserves solvability on all small trees") {
  StandardLcl probs[] = {always_valid_standard(), three_coloring_standard(),
                         perfect_matching_standard(3)};
  for (const auto& p : probs) {
    auto conv = to_node_edge(p);
    for (int n = 1; n <= 8; ++n) {
      for (const Graph& g : nonisomorphic_trees(n)) {
        bool std_ok = brute_force_standard(p, g).has_value();
        bool ne_ok = brute_force_solve(conv.bw, node_edge_instance(g).bw).has_value();
        CAPTURE(p.name);
        CAPTURE(n);
        CHECK(std_ok == ne_ok);
        if (g.max_degree() <= 3 && p.name != "perfect-matching-std") CHECK(std_ok);
      }
    }
  }
}

TEST_CASE("lift: round trip through the node-edge form") {
  auto p = three_coloring_standard();
  auto conv = to_node_edge(p);

  Graph g = random_tree(20, 3, 11);
  auto color = greedy_tree_coloring(g);
  std::vector<Label> c3(color.begin(), color.end());
  auto std_out = color_labeling(g, c3);
  REQUIRE(check_standard(p, g, std_out).ok());

  auto up = lift_solution(LiftDirection::ToNodeEdge, p, conv, g, std_out, {});
  auto inst = node_edge_instance(g);
  CHECK(check_bw(conv.bw, inst.bw, up.node_edge).ok());

  auto down = lift_solution(LiftDirection::FromNodeEdge, p, conv, g, {}, up.node_edge);
  CHECK(down.standard == std_out);

  auto same = lift_solution(LiftDirection::Identity, p, conv, g, std_out, {});
  CHECK(same.standard == std_out);
}

TEST_CASE("lift: trivial problem on a path and invalid input rejection") {
  auto p = always_valid_standard();
  auto conv = to_node_edge(p);
  Graph g = path_graph(5);
  auto std_out = make_half_edge_map(g, 0);  // the only label

  auto up = lift_solution(LiftDirection::ToNodeEdge, p, conv, g, std_out, {});
  CHECK(check_bw(conv.bw, node_edge_instance(g).bw, up.node_edge).ok());
  auto down = lift_solution(LiftDirection::FromNodeEdge, p, conv, g, {}, up.node_edge);
  CHECK(down.standard == std_out);

  auto pm = perfect_matching_standard(3);
  auto pmc = to_node_edge(pm);
  auto bad = make_half_edge_map(g, 1);  // all O: no node is matched
  CHECK_THROWS_AS(lift_solution(LiftDirection::ToNodeEdge, pm, pmc, g, bad, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lift_solution(LiftDirection::Identity, pm, pmc, g, bad, {}),
                  std::invalid_argument);
}
