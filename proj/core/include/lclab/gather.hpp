#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "lclab/engine.hpp"
#include "lclab/graph.hpp"

namespace lclab {

// Everything a node advertises about itself: identity, an opaque payload,
// neighbor ids in port order and the input label on each of its half-edges.
struct NodeFact {
  std::uint64_t id = 0;
  std::uint64_t payload = 0;
  std::vector<std::uint64_t> nbr;
  std::vector<std::uint8_t> in;
};

// Reconstructed radius-T view; local node 0 is the center, ports of each node
// follow the advertised order, ids/payload/depth are per local node.
struct BallView {
  Graph g;
  std::vector<std::uint64_t> id, payload;
  std::vector<int> depth;
  int radius = 0;

  std::optional<NodeId> local_of(std::uint64_t want) const;
};

// Deterministic reconstruction from facts; requires the facts of every node
// within the radius. Both the program and the oracle funnel through this.
BallView reconstruct_ball(const std::map<std::uint64_t, NodeFact>& facts, std::uint64_t center,
                          int radius);

// Full-information flooding: after round t a node holds all facts from
// distance <= t; terminates after `radius` rounds.
class GatherBallProgram : public NodeProgram {
 public:
  GatherBallProgram(int radius, std::uint64_t payload, std::vector<std::uint8_t> half_inputs)
      : radius_(radius), payload_(payload), inputs_(std::move(half_inputs)) {}

  void init(Context& ctx) override;
  NodeStatus step(Context& ctx) override;

  bool complete() const { return complete_; }
  const std::map<std::uint64_t, NodeFact>& facts() const { return facts_; }
  BallView ball() const;

 private:
  int radius_;
  std::uint64_t payload_;
  std::vector<std::uint8_t> inputs_;
  std::uint64_t self_ = 0;
  std::map<std::uint64_t, NodeFact> facts_;
  std::vector<std::uint64_t> fresh_;  // ids learned last round, to forward
  bool complete_ = false;
};

// Sequential oracle: same reconstruction, facts read straight off the graph.
BallView gather_ball_oracle(const Graph& g, const std::vector<std::uint64_t>& ids,
                            const std::vector<std::uint64_t>& payload, NodeId v, int radius);

Message encode_facts(const std::vector<const NodeFact*>& facts);
std::vector<NodeFact> decode_facts(const Message& m);

}  // namespace lclab
