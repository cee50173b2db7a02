#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lclab/engine.hpp"
#include "lclab/graph.hpp"

namespace lclab {

// Layered tree decomposition built from two peeling operations: "rake" removes
// nodes of current degree <= 1, "compress" removes every maximal run of
// degree-2 nodes that is at least l nodes long. One iteration = gamma rake
// operations followed by one compress operation. A post-processing step
// promotes some interior nodes of long compress runs into the next iteration's
// first rake sublayer so that the runs left behind have between l and 2l
// nodes; promoted nodes are pairwise non-adjacent and never run endpoints.

enum class LayerKind : std::uint8_t { Rake, Compress };

struct NodeLayer {
  LayerKind kind = LayerKind::Rake;
  int iter = 0;           // iteration that removed the node, 1-based
  int sub = 0;            // rake sublayer within the iteration, 1-based; 0 for compress
  bool promoted = false;  // compress node moved up into rake sublayer (iter, 1)
};

// Position of a sublayer in the creation order: every rake sublayer of
// iteration i precedes the compress layer of iteration i, which precedes
// everything of iteration i+1.
std::uint64_t sublayer_key(const NodeLayer& a);

struct Decomposition {
  int gamma = 1;
  int l = 4;
  int iterations = 0;  // highest iteration that removed a node
  std::vector<NodeLayer> node;

  int layer_count() const;  // nonempty rake layers + nonempty compress layers
  int rake_layer_count() const;
  int compress_layer_count() const;
  int max_rake_sublayers() const;  // largest sublayer index in use
};

// Sequential reference. The input must be a connected acyclic graph; anything
// else throws std::invalid_argument. When two adjacent degree-1 nodes face
// each other the one with the smaller id is raked (ids default to node
// indices), matching the tie-break used by the distributed version.
Decomposition rake_compress(const Graph& tree, int gamma, int l,
                            const std::vector<std::uint64_t>* ids = nullptr);

// Distributed version, run under the simulation engine. Rake and compress
// membership agree with the sequential reference on the same ids; only the
// choice of promoted nodes may differ, and both satisfy the same invariants.
struct DistributedDecomposition {
  Decomposition decomp;
  Trace trace;
  std::vector<std::uint64_t> ids;
  bool timed_out = false;
};
DistributedDecomposition rake_compress_distributed(const Graph& tree, int gamma, int l,
                                                   RunOptions opts = {});

struct DecompositionCheck {
  bool ok = true;
  std::vector<std::string> problems;
};

// Structural validation:
//   - every node carries exactly one well-formed layer assignment;
//   - components of each compress layer are paths of l..2l nodes whose
//     endpoints (and only the endpoints) have a neighbor in a higher sublayer;
//   - every rake sublayer is an independent set;
//   - each component of a rake layer has at most one node with a neighbor in
//     a higher sublayer.
DecompositionCheck check_decomposition(const Graph& g, const Decomposition& d);

struct LayerReport {
  std::size_t n = 0;
  int gamma = 0;
  int l = 0;
  int iterations = 0;
  int layers = 0;
  int rake_layers = 0;
  int compress_layers = 0;
  int max_rake_sublayers = 0;
  double layers_per_log2_n = 0.0;  // the constant c in "layers <= c log2 n"
};
LayerReport layer_counts(const Decomposition& d, std::size_t n);

std::string decomposition_to_json(const Decomposition& d);
std::string layer_report_to_json(const LayerReport& r);

}  // namespace lclab
