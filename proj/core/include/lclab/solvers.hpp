#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lclab/classes.hpp"
#include "lclab/decomp.hpp"
#include "lclab/engine.hpp"
#include "lclab/lcl.hpp"

namespace lclab {

// Distributed tree solvers. Both run node programs under the round engine on
// the node-edge form of the input tree and report one output label per
// bipartite edge. A returned labeling has already passed check_bw; an invalid
// one indicates a solver bug and throws std::logic_error instead.

struct SolverRun {
  bool solved = false;
  std::optional<EdgeLabeling> labeling;  // per edge of the node-edge instance
  bool unsolvable = false;  // the run established that no labeling exists (exact mode)
  bool aborted = false;     // layered mode hit an empty label-set: f does not
                            // cover this instance, or no labeling exists

  // Diagnostics when a label-set emptied: the bipartite node it emptied at and,
  // in layered mode, the sublayer that processed it.
  NodeId empty_node = kNoNode;
  std::string empty_sublayer;

  int rounds = 0;                      // solve-phase message rounds
  int decomposition_rounds = 0;        // phase-one rounds, layered mode only
  std::uint64_t max_message_bits = 0;  // across every phase of the run
  bool timed_out = false;
  Trace trace;  // solve phase
};

// Exact solver: iterative leaf peeling elects a root while label-sets float
// rootward (a node reports the moment it is the last unreported port), then
// concrete labels walk back down. Rounds scale with the diameter. Every
// message carries one label-set or one label plus a two-bit tag. Declares
// unsolvable exactly when the instance has no valid labeling. Non-trees are
// rejected with std::invalid_argument.
SolverRun solve_diameter(const BwProblem& p, const Graph& tree, RunOptions opts = {});

// Layered solver: first the distributed rake/compress decomposition, then a
// propagation program that walks sublayers in creation order. Nodes act as
// soon as all lower-sublayer neighbors have reported. Compress runs exchange
// their per-node summaries end to end so that every run node evaluates f
// locally (read-only, see compress_lookup); run orientation follows the
// endpoint with the smaller (parent sublayer, id) pair. Rounds scale with the
// sublayer count, not the diameter. An emptied label-set aborts the run and
// names the node and its sublayer. Non-trees are rejected.
SolverRun solve_superlog(const BwProblem& p, const Graph& tree, int gamma, int l,
                         const FFunction& f, RunOptions opts = {});

struct OracleReport {
  std::size_t instances = 0;
  std::size_t agreed = 0;    // verdict matches the exhaustive solver
  std::size_t solvable = 0;  // per the exhaustive solver
  std::vector<std::string> mismatches;
  bool ok() const { return agreed == instances; }
};

// Replays the diameter solver against the exhaustive solver on every tree and
// compares solvability verdicts; solved runs must also pass check_bw. Trees
// above max_edges are rejected with std::invalid_argument.
OracleReport compare_with_oracle(const BwProblem& p, const std::vector<Graph>& trees,
                                 std::size_t max_edges = 14);

}  // namespace lclab
