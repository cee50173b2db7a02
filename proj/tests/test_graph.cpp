#include <doctest.h>

#include <algorithm>
#include <set>

#include "lclab/family.hpp"
#include "lclab/graph.hpp"
#include "lclab/graph_gen.hpp"
#include "lclab/graph_io.hpp"

using namespace lclab;

namespace {

// direction labels from coordinate deltas; independent of any library labeler
HalfEdgeLabelMap grid_directions(const GridGraph& gg) {
  HalfEdgeLabelMap m = make_half_edge_map(gg.g);
  for (NodeId u = 0; u < gg.g.node_count(); ++u) {
    const auto& ps = gg.g.ports(u);
    for (std::size_t p = 0; p < ps.size(); ++p) {
      int dx = gg.x_of(ps[p].to) - gg.x_of(u);
      int dy = gg.y_of(ps[p].to) - gg.y_of(u);
      m[u][p] = dx == 1 ? dir::R : dx == -1 ? dir::L : dy == 1 ? dir::U : dir::D;
    }
  }
  return m;
}

}  // namespace

TEST_CASE("grid generator matches the coordinate adjacency rule") {
  auto g11 = make_grid(1, 1);
  CHECK(g11.g.node_count() == 1);
  CHECK(g11.g.edge_count() == 0);

  auto g22 = make_grid(2, 2);
  CHECK(g22.g.node_count() == 4);
  CHECK(g22.g.edge_count() == 4);

  auto g34 = make_grid(3, 4);  // h=3 rows, w=4 columns
  CHECK(g34.g.node_count() == 12);
  CHECK(g34.g.edge_count() == 17);
  // exhaustive adjacency enumeration: neighbors are exactly the +-1 coordinate pairs
  std::size_t expected_edges = 0;
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < 3; ++y) {
      NodeId u = g34.at(x, y);
      std::set<NodeId> want;
      if (x > 0) want.insert(g34.at(x - 1, y));
      if (x < 3) want.insert(g34.at(x + 1, y));
      if (y > 0) want.insert(g34.at(x, y - 1));
      if (y < 2) want.insert(g34.at(x, y + 1));
      std::set<NodeId> got;
      for (const auto& pe : g34.g.ports(u)) got.insert(pe.to);
      CHECK(got == want);
      expected_edges += want.size();
    }
  }
  CHECK(g34.g.edge_count() == expected_edges / 2);
  CHECK(g34.g.port_symmetric());
}

TEST_CASE("tree-like generator: layers, parents, horizontal chains") {
  CHECK(make_tree_like(1).g.node_count() == 1);
  CHECK(make_tree_like(1).g.edge_count() == 0);

  auto t2 = make_tree_like(2);
  CHECK(t2.g.node_count() == 3);
  CHECK(t2.g.edge_count() == 3);  // 2 parent + 1 horizontal

  auto t3 = make_tree_like(3);
  CHECK(t3.g.node_count() == 7);
  CHECK(t3.g.edge_count() == 10);  // 6 parent + 4 horizontal
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < (1 << l); ++k) {
      NodeId u = t3.at(l, k);
      CHECK(t3.layer_of(u) == l);
      CHECK(t3.pos_of(u) == k);
      std::set<NodeId> want;
      if (l > 0) want.insert(t3.at(l - 1, k / 2));
      if (l < 2) {
        want.insert(t3.at(l + 1, 2 * k));
        want.insert(t3.at(l + 1, 2 * k + 1));
      }
      if (k > 0) want.insert(t3.at(l, k - 1));
      if (k + 1 < (1 << l)) want.insert(t3.at(l, k + 1));
      std::set<NodeId> got;
      for (const auto& pe : t3.g.ports(u)) got.insert(pe.to);
      CHECK(got == want);
    }
  CHECK(t3.g.port_symmetric());
}

TEST_CASE("family instance: node counts and identification bijections") {
  auto tiny = make_family_instance(2, 1);
  CHECK(tiny.g.node_count() == 3);
  CHECK(tiny.g.edge_count() == 3);
  CHECK(tiny.g.port_symmetric());

  auto fi = make_family_instance(3, 2);
  CHECK(fi.h == 4);
  CHECK(fi.w == 2);
  CHECK(fi.g.node_count() == 15);  // 8 grid + 2*3 tree internals + 1 top root
  CHECK(fi.g.port_symmetric());

  // tree bottom layer k is grid column row k
  for (int t = 0; t < fi.w; ++t)
    for (int k = 0; k < fi.h; ++k) CHECK(fi.col_at(t, fi.ell - 1, k) == fi.grid_at(t, k));
  // side grid node (x,y) is the spine node (ell-1-y, 0) of tree x
  for (int x = 0; x < fi.w; ++x)
    for (int y = 0; y < fi.ell; ++y) {
      NodeId v = fi.side_at(x, y);
      CHECK(fi.side_pos[v].x == x);
      CHECK(fi.side_pos[v].y == y);
      CHECK(fi.col_pos[v].tree == x);
      CHECK(fi.col_pos[v].k == 0);
    }
  // top-tree leaves are the column-tree roots
  for (int k = 0; k < fi.w; ++k) CHECK(fi.top_at(fi.ellp - 1, k) == fi.col_at(k, 0, 0));

  // every node belongs to at least one structure
  for (NodeId v = 0; v < fi.g.node_count(); ++v) {
    bool member = fi.grid_pos[v].x >= 0 || fi.side_pos[v].x >= 0 || fi.col_pos[v].tree >= 0 ||
                  fi.top_pos[v].l >= 0;
    CHECK(member);
  }
  // shared edges carry several tags: grid verticals are column-tree horizontals
  NodeId a = fi.grid_at(0, 0), b = fi.grid_at(0, 1);
  EdgeId e = *fi.g.edge_between(a, b);
  CHECK(fi.tagged(e, Structure::BottomGrid));
  CHECK(fi.tagged(e, Structure::ColTree));
}

TEST_CASE("random trees: reproducible, acyclic, degree-bounded") {
  auto single = random_tree(1, 3, 5);
  CHECK(single.node_count() == 1);

  auto path = random_tree(10, 2, 123);
  CHECK(path.is_tree());
  CHECK(path.max_degree() == 2);  // degree bound forces a path

  auto t = random_tree(200, 3, 7);
  CHECK(t.node_count() == 200);
  CHECK(t.edge_count() == 199);
  CHECK(t.is_tree());
  CHECK(t.max_degree() <= 3);
  CHECK(t.port_symmetric());

  auto t2 = random_tree(200, 3, 7);
  CHECK(graph_to_text(t) == graph_to_text(t2));
  auto t3 = random_tree(200, 3, 8);
  CHECK(graph_to_text(t) != graph_to_text(t3));

  CHECK_THROWS(random_tree(5, 1, 0));
}

TEST_CASE("follow walks label-directed paths") {
  auto gg = make_grid(2, 2);
  auto labels = grid_directions(gg);

  std::vector<std::uint8_t> empty;
  CHECK(follow(gg.g, labels, gg.at(0, 0), empty) == gg.at(0, 0));

  std::vector<std::uint8_t> ruld{dir::R, dir::U, dir::L, dir::D};
  CHECK(follow(gg.g, labels, gg.at(0, 0), ruld) == gg.at(0, 0));

  std::vector<std::uint8_t> up_twice{dir::U, dir::U};
  CHECK(!follow(gg.g, labels, gg.at(0, 0), up_twice).has_value());

  // ambiguity: two half-edges with the same label
  auto amb = labels;
  amb[gg.at(0, 0)][0] = dir::R;
  amb[gg.at(0, 0)][1] = dir::R;
  std::vector<std::uint8_t> right{dir::R};
  CHECK(!follow(gg.g, amb, gg.at(0, 0), right).has_value());
}

TEST_CASE("serialization round-trips text and json") {
  auto t = random_tree(40, 3, 99);
  t.enable_inputs();
  t.set_input(3, 0, 2);
  t.set_input(7, 1, 5);

  Graph t_text = graph_from_text(graph_to_text(t));
  CHECK(graph_to_text(t_text) == graph_to_text(t));
  Graph t_json = graph_from_json(graph_to_json(t));
  CHECK(graph_to_json(t_json) == graph_to_json(t));
  CHECK(graph_to_text(t_json) == graph_to_text(t));

  auto fi = make_family_instance(3, 2);
  CHECK(graph_to_text(graph_from_text(graph_to_text(fi.g))) == graph_to_text(fi.g));
}

TEST_CASE("labeled tree enumeration and canonical forms") {
  int count4 = 0;
  for_each_labeled_tree(4, [&](const Graph& g) {
    CHECK(g.is_tree());
    ++count4;
  });
  CHECK(count4 == 16);  // Cayley: 4^2

  CHECK(nonisomorphic_trees(6).size() == 6);
  CHECK(nonisomorphic_trees(7).size() == 11);

  CHECK(tree_canonical_form(path_graph(5)) == tree_canonical_form(path_graph(5)));
  CHECK(tree_canonical_form(path_graph(6)) != tree_canonical_form(star_graph(5)));
}
