#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lclab/decomp.hpp"
#include "lclab/graph.hpp"
#include "lclab/lcl.hpp"

namespace lclab {

// Machinery for solving tree LCLs layer by layer: label-sets summarize what a
// removed part of the tree can still realize on the edge connecting it to the
// rest, classes materialize that summary for small fragments, and an
// f-function fixes one edge of every compress path so that its two boundary
// summaries become independent of each other.

// ---- label-sets -------------------------------------------------------------

// Subset of the output alphabet, at most 64 labels.
struct LabelSet {
  std::uint64_t bits = 0;

  static LabelSet all(std::size_t alphabet_size);
  static LabelSet of(std::initializer_list<Label> labels);

  void add(Label l) { bits |= std::uint64_t(1) << l; }
  bool contains(Label l) const { return (bits >> l) & 1; }
  bool empty() const { return bits == 0; }
  int size() const;
  bool subset_of(const LabelSet& o) const { return (bits & ~o.bits) == 0; }
  bool operator==(const LabelSet&) const = default;

  // Labels in increasing order.
  std::vector<Label> labels() const;
};

std::string label_set_to_string(const LabelSet& s, const Alphabet& alpha);

// Half-edge arriving from an already-removed part of the tree: the input on
// the edge plus the labels that part can realize on it.
struct IncomingEdge {
  Label input = 0;
  LabelSet options;
};

// ---- single-node propagation ------------------------------------------------

// Labels on the outgoing edge (with input `out_input`) for which some choice
// of incoming labels, one from each option set, satisfies the node constraint.
LabelSet rake_g(const BwProblem& p, bool black_node,
                const std::vector<IncomingEdge>& incoming, Label out_input);

// Same question when the node has no outgoing edge left.
bool rake_feasible(const BwProblem& p, bool black_node,
                   const std::vector<IncomingEdge>& incoming);

// Concrete choice of incoming labels, one per entry of `incoming`, compatible
// with the node constraint and with the outgoing edge fixed to
// (outgoing->first = input, outgoing->second = label) when present. Empty
// optional when no choice exists.
std::optional<std::vector<Label>> rake_pick(
    const BwProblem& p, bool black_node, const std::vector<IncomingEdge>& incoming,
    const std::optional<std::pair<Label, Label>>& outgoing);

// ---- materialized classes ---------------------------------------------------

// Small BW fragment with explicit boundary edges. Boundary edges have v == -1;
// incoming ones carry the option set of the removed side, outgoing ones are
// unconstrained.
struct Patch {
  struct Node {
    bool black = false;
  };
  struct Edge {
    int u = -1;
    int v = -1;  // -1: boundary edge attached only at u
    Label input = 0;
    enum Role : std::uint8_t { Internal, Incoming, Outgoing } role = Internal;
    LabelSet options;  // meaningful for Incoming edges only
  };
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  std::vector<int> outgoing_edges() const;
};

// All labelings of a patch that satisfy every node constraint, with incoming
// edges restricted to their option sets. `members` holds one label per patch
// edge, in patch edge order.
struct Class {
  std::vector<int> outgoing;                // patch edge indices
  std::vector<std::vector<Label>> members;  // each member: label per edge

  bool empty() const { return members.empty(); }
  // Distinct projections of the members onto the outgoing edges.
  std::vector<std::vector<Label>> outgoing_projections() const;
  LabelSet outgoing_set(int which) const;  // projection onto one outgoing edge
};

// Exhaustive enumeration. Throws std::length_error when the assignment space
// exceeds 2^22 labelings; callers are expected to keep patches small.
Class maximal_class(const BwProblem& p, const Patch& h);

// A class is independent when for any two members, every mixed combination of
// their outgoing labels is the outgoing projection of some member. Equivalent
// to the projection set being a full product of per-edge sets.
bool is_independent(const Class& c);

// ---- compress paths ---------------------------------------------------------

// Maximal run of degree-2 BW nodes in path order, with its boundary context.
// Internal edge i joins nodes i and i+1. end_input[0] is the input on the
// outgoing edge at node 0, end_input[1] at node x-1; a one-node path has both
// outgoing edges at node 0.
struct CompressPath {
  std::vector<bool> black;
  std::vector<Label> edge_input;
  std::array<Label, 2> end_input = {0, 0};
  std::vector<std::vector<IncomingEdge>> incoming;  // per node

  std::size_t length() const { return black.size(); }
};

// Orientation-independent serialization of the path shape; paths read in
// either direction share one key. `reversed` says which direction won.
// `palindromic` marks shapes that read identically both ways; their pinned
// outcome can be asymmetric, so consumers that must agree on which physical
// end is which cannot get that from the shape. Every solver therefore walks
// paths from the smaller node index, making outcomes reproducible across
// sequential and message-passing runs.
struct ShapeKey {
  std::string key;
  bool reversed = false;
  bool palindromic = false;
};
ShapeKey canonical_shape(const CompressPath& path);

// Deterministic middle-label rule, an explicit table over shape keys plus a
// preference order used the first time a shape is seen. Table entries always
// win, which is what lets the derivation search override individual shapes.
struct FFunction {
  int l = 1;                     // path lengths this table was built for
  std::vector<Label> preference;  // candidate order, a permutation of the alphabet
  std::map<std::string, Label> table;

  static FFunction with_alphabet_order(const BwProblem& p, int l);
};

// Outcome of fixing the designated edge of a path and propagating label-sets
// outward to both boundary edges. For paths of two or more nodes the fixed
// edge is the internal edge at index min(x/2, x-2) of the canonical
// orientation; a one-node path fixes the outgoing edge at its first end
// instead (middle_edge == -1) and `first` is then the singleton {middle}.
// Indices refer to the path as given, not to the canonical orientation.
struct CompressOutcome {
  LabelSet first, last;
  Label middle = 0;
  int middle_edge = -1;
  int fixed_end = -1;  // 0 or 1 when a one-node path fixed that outgoing edge
  std::string shape;   // canonical key consulted
  bool tabled = false;  // shape was already in the table
  // Per internal edge: labels completable toward the designated edge over the
  // nodes between them (the designated entry is the pinned singleton). Empty
  // for one-node paths.
  std::vector<LabelSet> edge_sets;
};

// Applies f to a path, extending the table deterministically on a miss: the
// first preference label whose two propagated sets are both nonempty, or the
// first preference label when every candidate dies. Never returns an empty
// outcome for a shape whose table entry admits one; empty sets simply
// propagate and surface as an empty class upstream.
CompressOutcome compress_g(const BwProblem& p, const CompressPath& path, FFunction& f);

// Propagated sets for one explicit middle-label candidate, without touching
// any table. Exposed for derivation and for tests.
CompressOutcome compress_with_middle(const BwProblem& p, const CompressPath& path,
                                     Label middle);

// Read-only variant of compress_g: table misses fall back to the same
// deterministic preference rule but record nothing. Every consumer of the same
// path therefore computes the same outcome, which is what lets the nodes of a
// distributed path evaluate f independently.
CompressOutcome compress_lookup(const BwProblem& p, const CompressPath& path,
                                const FFunction& f);

// ---- layered solving --------------------------------------------------------

struct LayerSolveResult {
  std::optional<EdgeLabeling> labeling;  // per edge of the instance
  bool empty_class = false;
  NodeId first_empty = kNoNode;   // node whose class emptied first
  std::size_t paths = 0;          // compress paths consulted
  std::vector<std::string> added;  // table keys created during this run, in order

  bool solved() const { return labeling.has_value(); }
};

// Solves an instance over a rake/compress decomposition of its graph:
// label-sets travel up sublayer by sublayer (rake nodes via rake_g, compress
// paths via compress_g), then concrete labels travel back down. The
// decomposition must belong to inst.g. May extend f's table; see compress_g.
LayerSolveResult solve_by_layers(const BwProblem& p, const BwInstance& inst,
                                 const Decomposition& d, FFunction& f);

// Exact tree solver: roots each component and propagates label-sets from the
// leaves up, then picks labels top-down. Solvability oracle for acyclic
// instances (throws std::invalid_argument on cycles) and the reference
// semantics for the diameter-time distributed solver. When `sets` is given it
// receives the propagated label-set per edge (oriented child to parent); the
// final label on an edge is always drawn from that set.
std::optional<EdgeLabeling> solve_rooted(const BwProblem& p, const BwInstance& inst,
                                         std::vector<LabelSet>* sets = nullptr);

// ---- f derivation -----------------------------------------------------------

struct DeriveReport {
  bool found = false;
  FFunction f;
  int attempts = 0;        // validation sweeps run
  std::size_t trees = 0;
  std::size_t solvable = 0;  // trees the rooted oracle can solve
  std::string failure;       // why the last attempt died, empty when found

  std::string to_json(const BwProblem& p) const;
};

// Searches for a middle-label table that survives validation: decompose every
// validation tree (node-edge form) with the given gamma and l, run
// solve_by_layers, and accept the table only if no solvable tree ever hits an
// empty class and every solvable tree ends with a labeling that checks. On
// failure the most recent table entry with candidates left is advanced and the
// sweep restarts; `budget` caps the number of sweeps. gamma == 0 selects
// ceil(sqrt(n)) per tree, n counted on the node-edge graph.
DeriveReport derive_f(const BwProblem& p, int gamma, int l,
                      const std::vector<Graph>& validation_trees, int budget = 512);

// Tries l = l_min..l_max in order and returns the first table found; the
// report of the last attempt when none is.
DeriveReport derive_f_search(const BwProblem& p, int gamma,
                             const std::vector<Graph>& validation_trees, int l_min = 1,
                             int l_max = 8, int budget = 512);

// Deterministic mixed corpus for validation: long paths first (so compress
// shapes are always exercised), then a star, a caterpillar, a complete binary
// tree, and random trees of varying size and degree. All trees have at most
// max_n nodes.
std::vector<Graph> validation_trees(int count, int max_n, std::uint64_t seed);

// ---- serialization ----------------------------------------------------------

std::string f_function_to_json(const FFunction& f, const BwProblem& p);
FFunction f_function_from_json(const std::string& text, const BwProblem& p);

}  // namespace lclab
