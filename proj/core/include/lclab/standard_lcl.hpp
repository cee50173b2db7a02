#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lclab/graph.hpp"
#include "lclab/lcl.hpp"

namespace lclab {

// Labeled centered ball: node 0 is the center; every half-edge carries an
// (input, output) pair. Only tree-shaped balls are supported, which covers
// every problem this artifact ships.
struct Ball {
  Graph g;
  HalfEdgeLabelMap in, out;

  int radius() const;
};

// Canonical string; equal iff the centered labeled balls are isomorphic.
std::string ball_canon(const Ball& b);

// Vertex-checkable problem: a node is happy iff its labeled radius-r ball is
// isomorphic to some element of `balls`.
struct StandardLcl {
  std::string name;
  Alphabet in_alpha, out_alpha;
  int radius = 1;
  std::vector<Ball> balls;  // deduplicated up to isomorphism

  void add_ball(Ball b);  // dedupes
};

// Half-edge output labeling of a plain graph.
using HalfEdgeLabeling = HalfEdgeLabelMap;

// Extracts the labeled ball of radius r around v (induced on the distance-r
// neighborhood; g must be a tree).
Ball extract_ball(const Graph& g, const HalfEdgeLabeling& out, NodeId v, int r);

CheckResult check_standard(const StandardLcl& p, const Graph& g, const HalfEdgeLabeling& out);

std::optional<HalfEdgeLabeling> brute_force_standard(const StandardLcl& p, const Graph& g,
                                                     std::size_t max_nodes = 10);

// Node-edge conversion: output labels are triples (ball, center port); white
// constraints pin all ports of one ball, black constraints the compatible
// gluings of two balls along a shared edge.
struct NodeEdgeConversion {
  BwProblem bw;
  int radius = 1;
  std::vector<std::pair<int, int>> triple_of_label;   // label -> (ball index, port)
  std::vector<std::vector<Label>> label_of_ball_port;  // [ball][port] -> label
};

NodeEdgeConversion to_node_edge(const StandardLcl& p);

enum class LiftDirection { Identity, ToNodeEdge, FromNodeEdge };

// Moves a valid labeling across the conversion. For ToNodeEdge the input is a
// standard labeling of g and the result labels node_edge_instance(g); for
// FromNodeEdge the reverse. Throws when the source labeling is invalid.
struct LiftResult {
  HalfEdgeLabeling standard;  // set for FromNodeEdge / Identity-on-standard
  EdgeLabeling node_edge;     // set for ToNodeEdge
};
LiftResult lift_solution(LiftDirection dir, const StandardLcl& p, const NodeEdgeConversion& conv,
                         const Graph& g, const HalfEdgeLabeling& std_out,
                         const EdgeLabeling& ne_out);

// ---- standard-form library -------------------------------------------------
StandardLcl always_valid_standard(int max_degree = 3);
StandardLcl three_coloring_standard(int max_degree = 3);

}  // namespace lclab
