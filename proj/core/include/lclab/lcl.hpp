#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lclab/graph.hpp"

namespace lclab {

using Label = std::uint8_t;

class Alphabet {
 public:
  Label add(const std::string& name);
  std::optional<Label> find(const std::string& name) const;
  Label id(const std::string& name) const;  // throws on miss
  const std::string& name(Label l) const { return names_.at(l); }
  std::size_t size() const { return names_.size(); }
  bool contains(Label l) const { return l < names_.size(); }

 private:
  std::vector<std::string> names_;
};

// Multiset of (input, output) label pairs in canonical (sorted) order.
using PairMultiset = std::vector<std::pair<Label, Label>>;
PairMultiset canon_multiset(PairMultiset m);

// Black-white LCL: output labels live on the edges of a two-colored bipartite
// graph; a node is happy iff the multiset of (input, output) pairs on its
// incident edges belongs to its color's constraint set.
struct BwProblem {
  std::string name;
  Alphabet in_alpha, out_alpha;
  std::set<PairMultiset> white, black;

  bool node_edge() const;  // every black constraint has exactly two pairs
  bool allows(bool black_node, const PairMultiset& m) const {
    return (black_node ? black : white).count(m) > 0;
  }
};

enum class NodeColor : std::uint8_t { White = 0, Black = 1 };

struct BwInstance {
  Graph g;
  std::vector<NodeColor> color;  // per node
  std::vector<Label> input;      // per edge

  bool two_colored() const;  // endpoints of every edge differ in color
};

// Output labeling of a BW instance: one label per edge.
using EdgeLabeling = std::vector<Label>;

struct NodeVerdict {
  NodeId node;
  std::string reason;
};

struct CheckResult {
  std::vector<NodeVerdict> failures;
  bool ok() const { return failures.empty(); }
  bool failed(NodeId v) const;
};

CheckResult check_bw(const BwProblem& p, const BwInstance& inst, const EdgeLabeling& out);

// View of an ordinary graph as a node-edge BW instance: whites are the nodes
// of g, blacks are its edges, bipartite edges are the half-edges of g.
struct NodeEdgeInstance {
  BwInstance bw;
  std::size_t g_nodes = 0;

  NodeId white_of(NodeId g_node) const { return g_node; }
  NodeId black_of(EdgeId g_edge) const { return static_cast<NodeId>(g_nodes + g_edge); }
  // bipartite edge ids: half-edge (e, side) -> 2e + side, sides in edge-end order
  EdgeId bw_edge(EdgeId g_edge, int side) const { return 2 * g_edge + side; }
};

NodeEdgeInstance node_edge_instance(const Graph& g);

// Exhaustive solver with pruning; refuses instances above the edge guard.
std::optional<EdgeLabeling> brute_force_solve(const BwProblem& p, const BwInstance& inst,
                                              std::size_t max_edges = 200);

// Counts labelings accepted by check_bw (same guard); oracle for tests.
std::uint64_t count_bw_solutions(const BwProblem& p, const BwInstance& inst,
                                 std::size_t max_edges = 64);

// ---- library problems (node-edge form) -----------------------------------
BwProblem two_coloring(int max_degree = 3);
BwProblem three_coloring(int max_degree = 3);
BwProblem maximal_matching(int max_degree = 3);
BwProblem sinkless_orientation(int max_degree = 3);
BwProblem always_valid(int max_degree = 3);
// nullopt when the name is unknown; names: 2-coloring, 3-coloring,
// maximal-matching, sinkless-orientation, always-valid
std::optional<BwProblem> library_problem(const std::string& name, int max_degree = 3);
std::vector<std::string> library_problem_names();

// ---- problem (de)serialization -------------------------------------------
std::string problem_to_json(const BwProblem& p);
BwProblem problem_from_json(const std::string& text);
std::string problem_to_text(const BwProblem& p);  // human-readable summary

}  // namespace lclab
