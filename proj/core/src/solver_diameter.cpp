#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lclab/bits.hpp"
#include "lclab/solvers.hpp"

namespace lclab {

namespace {

constexpr std::uint64_t kTagSet = 0;
constexpr std::uint64_t kTagLabel = 1;
constexpr std::uint64_t kTagAbort = 2;
constexpr int kTagBits = 2;

// One node of the peel solver. A node reports its label-set the moment all
// ports but one have reported to it; the port left over is its parent. The
// survivor that hears from every port without ever reporting is the root; if
// two survivors report to each other in the same round, the one with the
// larger id takes the root role and treats the other as a child.
class PeelProgram : public NodeProgram {
 public:
  PeelProgram(const BwProblem* p, bool black, std::vector<Label> port_in, int sigma, int lw)
      : p_(p), port_in_(std::move(port_in)), sigma_(sigma), lw_(lw), black_(black) {}

  Label port_label(PortId q) const { return final_[q]; }
  bool unsolvable() const { return unsolvable_; }
  bool computed_empty() const { return computed_empty_; }
  bool root_infeasible() const { return root_infeasible_; }
  bool is_root() const { return is_root_; }

  void init(Context& ctx) override {
    set_.assign(std::size_t(ctx.degree), LabelSet{});
    got_set_.assign(std::size_t(ctx.degree), false);
    final_.assign(std::size_t(ctx.degree), kNoLabel);
  }

  NodeStatus step(Context& ctx) override {
    if (done_) return NodeStatus::Done;
    const int deg = ctx.degree;
    int abort_from = -1;
    for (int q = 0; q < deg; ++q) {
      const Message* m = ctx.recv(PortId(q));
      if (!m) continue;
      BitReader r(*m);
      const std::uint64_t tag = r.bits(kTagBits);
      if (tag == kTagSet) {
        set_[std::size_t(q)] = LabelSet{r.bits(sigma_)};
        got_set_[std::size_t(q)] = true;
      } else if (tag == kTagLabel) {
        final_[std::size_t(q)] = Label(r.bits(lw_));
        got_label_ = true;
      } else {
        abort_from = q;
      }
    }
    if (abort_from >= 0) {
      unsolvable_ = true;
      for (int q = 0; q < deg; ++q)
        if (q != abort_from) ctx.send(PortId(q), message_bits(kTagAbort, kTagBits));
      done_ = true;
      return NodeStatus::Done;
    }

    if (!is_root_) {
      if (!sent_up_) {
        int missing = -1, cnt = 0;
        for (int q = 0; q < deg; ++q)
          if (!got_set_[std::size_t(q)]) {
            missing = q;
            ++cnt;
          }
        if (cnt == 0) {
          is_root_ = true;  // heard from every port without ever reporting
        } else if (cnt == 1) {
          parent_ = missing;
          std::vector<IncomingEdge> in;
          in.reserve(std::size_t(deg) - 1);
          for (int q = 0; q < deg; ++q)
            if (q != parent_) in.push_back({port_in_[std::size_t(q)], set_[std::size_t(q)]});
          up_set_ = rake_g(*p_, black_, in, port_in_[std::size_t(parent_)]);
          if (up_set_.empty()) computed_empty_ = true;
          BitWriter w;
          w.bits(kTagSet, kTagBits);
          w.bits(up_set_.bits, sigma_);
          ctx.send(PortId(parent_), std::move(w).message());
          sent_up_ = true;
        }
      } else if (!got_label_ && got_set_[std::size_t(parent_)]) {
        // mutual report across the center edge: larger id takes the root role
        if (ctx.id > ctx.neighbor_id(PortId(parent_))) is_root_ = true;
      }
    }

    if (is_root_) {
      std::vector<IncomingEdge> in;
      in.reserve(std::size_t(deg));
      for (int q = 0; q < deg; ++q) in.push_back({port_in_[std::size_t(q)], set_[std::size_t(q)]});
      auto pick = rake_pick(*p_, black_, in, std::nullopt);
      if (!pick) {
        unsolvable_ = true;
        root_infeasible_ = true;
        for (int q = 0; q < deg; ++q) ctx.send(PortId(q), message_bits(kTagAbort, kTagBits));
      } else {
        for (int q = 0; q < deg; ++q) {
          final_[std::size_t(q)] = (*pick)[std::size_t(q)];
          BitWriter w;
          w.bits(kTagLabel, kTagBits);
          w.bits(final_[std::size_t(q)], lw_);
          ctx.send(PortId(q), std::move(w).message());
        }
      }
      done_ = true;
      return NodeStatus::Done;
    }

    if (got_label_) {
      std::vector<IncomingEdge> in;
      in.reserve(std::size_t(deg) - 1);
      for (int q = 0; q < deg; ++q)
        if (q != parent_) in.push_back({port_in_[std::size_t(q)], set_[std::size_t(q)]});
      auto pick = rake_pick(*p_, black_, in,
                            std::make_pair(port_in_[std::size_t(parent_)],
                                           final_[std::size_t(parent_)]));
      if (!pick) throw std::logic_error("peel solver: downward completion lost feasibility");
      std::size_t i = 0;
      for (int q = 0; q < deg; ++q) {
        if (q == parent_) continue;
        final_[std::size_t(q)] = (*pick)[i++];
        BitWriter w;
        w.bits(kTagLabel, kTagBits);
        w.bits(final_[std::size_t(q)], lw_);
        ctx.send(PortId(q), std::move(w).message());
      }
      done_ = true;
      return NodeStatus::Done;
    }

    return NodeStatus::Idle;
  }

 private:
  const BwProblem* p_;
  std::vector<Label> port_in_;
  int sigma_, lw_;
  bool black_;

  std::vector<LabelSet> set_;
  std::vector<bool> got_set_;
  std::vector<Label> final_;
  LabelSet up_set_;
  int parent_ = -1;
  bool sent_up_ = false, got_label_ = false, is_root_ = false, done_ = false;
  bool unsolvable_ = false, computed_empty_ = false, root_infeasible_ = false;
};

}  // namespace

SolverRun solve_diameter(const BwProblem& p, const Graph& tree, RunOptions opts) {
  if (!p.node_edge()) throw std::invalid_argument("solve_diameter: problem must be node-edge");
  if (!tree.is_tree()) throw std::invalid_argument("solve_diameter: input must be a tree");
  const int sigma = int(p.out_alpha.size());
  if (sigma < 1 || sigma > 64)
    throw std::invalid_argument("solve_diameter: output alphabet must have 1..64 labels");
  const int lw = std::max(1, ceil_log2(std::uint64_t(sigma)));

  NodeEdgeInstance ne = node_edge_instance(tree);
  const Graph& g = ne.bw.g;

  Engine eng(g, opts);
  const bool finished = eng.run([&](NodeId v) {
    std::vector<Label> pin;
    pin.reserve(g.ports(v).size());
    for (const PortEntry& pe : g.ports(v)) pin.push_back(ne.bw.input[pe.edge]);
    return std::make_unique<PeelProgram>(&p, ne.bw.color[v] == NodeColor::Black,
                                         std::move(pin), sigma, lw);
  });

  SolverRun run;
  run.trace = eng.trace();
  run.rounds = run.trace.rounds;
  run.max_message_bits = run.trace.max_bits;
  run.timed_out = !finished;
  if (!finished) return run;

  NodeId empty_at = kNoNode, root_bad = kNoNode;
  bool unsat = false;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto& prog = eng.program_as<PeelProgram>(v);
    if (prog.unsolvable()) unsat = true;
    if (prog.computed_empty() && empty_at == kNoNode) empty_at = v;
    if (prog.root_infeasible()) root_bad = v;
  }
  if (unsat) {
    run.unsolvable = true;
    run.empty_node = empty_at != kNoNode ? empty_at : root_bad;
    return run;
  }

  EdgeLabeling out(g.edge_count(), kNoLabel);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ends = g.edge(e);
    Label a = eng.program_as<PeelProgram>(ends.a.node).port_label(ends.a.port);
    Label b = eng.program_as<PeelProgram>(ends.b.node).port_label(ends.b.port);
    if (a == kNoLabel || a != b)
      throw std::logic_error("peel solver: edge ends disagree on the final label");
    out[e] = a;
  }
  if (!check_bw(p, ne.bw, out).ok())
    throw std::logic_error("peel solver: produced labeling fails its own checker");
  run.labeling = std::move(out);
  run.solved = true;
  return run;
}

OracleReport compare_with_oracle(const BwProblem& p, const std::vector<Graph>& trees,
                                 std::size_t max_edges) {
  OracleReport rep;
  rep.instances = trees.size();
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (trees[i].edge_count() > max_edges)
      throw std::invalid_argument("compare_with_oracle: tree above the edge guard");
    NodeEdgeInstance ne = node_edge_instance(trees[i]);
    const bool exhaustive = brute_force_solve(p, ne.bw).has_value();
    if (exhaustive) ++rep.solvable;
    SolverRun run = solve_diameter(p, trees[i]);
    const bool agree = !run.timed_out && run.solved == exhaustive && run.unsolvable == !exhaustive;
    if (agree) {
      ++rep.agreed;
    } else {
      const char* got = run.solved ? "solved" : run.unsolvable ? "unsolvable" : "inconclusive";
      rep.mismatches.push_back("tree " + std::to_string(i) + ": solver " + got +
                               ", exhaustive " + (exhaustive ? "solved" : "unsolvable"));
    }
  }
  return rep;
}

}  // namespace lclab
