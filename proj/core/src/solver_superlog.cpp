#include <algorithm>
#include <memory>
#include <optional>
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
constexpr std::uint64_t kTagGather = 2;
constexpr std::uint64_t kTagSweep = 3;
constexpr std::uint64_t kTagAbort = 4;
constexpr int kTagBits = 3;

constexpr std::uint8_t kRelLower = 0;
constexpr std::uint8_t kRelHigher = 1;
constexpr std::uint8_t kRelPath = 2;

// Field widths shared by every node; both sides of a message must agree on
// them exactly for the bit stream to parse.
struct SharedCfg {
  const BwProblem* p = nullptr;
  const FFunction* f = nullptr;
  int sigma = 1;  // label-set mask width = output alphabet size
  int lw = 1;     // single output label
  int iw = 1;     // single input label
  int dw = 1;     // extras count of one run node
  int cw = 1;     // record count of a gather
  int nw = 1;     // node index
};

// One node of a compress run as seen by a passing gather: its color, the
// edge inputs behind and ahead in travel direction, and the (input, label-set)
// pairs its lower neighbors reported.
struct PathRecord {
  bool black = false;
  Label prev_in = 0, next_in = 0;
  std::vector<IncomingEdge> extras;
};

// The end with the smaller node index leads the run. The table was derived
// from sequential replays that walk every run from its smaller-index end, so
// this is the one orientation under which the recorded outcomes are certified;
// shape content cannot substitute for it because a decorated shape can read
// identically in both directions while its outcome sets differ per end.
struct GatherMsg {
  std::uint64_t node = 0;  // initiator node index; the smaller end leads
  std::vector<PathRecord> recs;
};

Message encode_gather(const GatherMsg& gm, const SharedCfg& c) {
  BitWriter w;
  w.bits(kTagGather, kTagBits);
  w.bits(gm.node, c.nw);
  w.bits(gm.recs.size(), c.cw);
  for (const PathRecord& r : gm.recs) {
    w.bits(r.black ? 1 : 0, 1);
    w.bits(r.prev_in, c.iw);
    w.bits(r.next_in, c.iw);
    w.bits(r.extras.size(), c.dw);
    for (const IncomingEdge& e : r.extras) {
      w.bits(e.input, c.iw);
      w.bits(e.options.bits, c.sigma);
    }
  }
  return std::move(w).message();
}

GatherMsg decode_gather(BitReader& r, const SharedCfg& c) {  // tag already consumed
  GatherMsg gm;
  gm.node = r.bits(c.nw);
  gm.recs.resize(std::size_t(r.bits(c.cw)));
  for (PathRecord& rec : gm.recs) {
    rec.black = r.bits(1) != 0;
    rec.prev_in = Label(r.bits(c.iw));
    rec.next_in = Label(r.bits(c.iw));
    rec.extras.resize(std::size_t(r.bits(c.dw)));
    for (IncomingEdge& e : rec.extras) {
      e.input = Label(r.bits(c.iw));
      e.options = LabelSet{r.bits(c.sigma)};
    }
  }
  return gm;
}

struct NodeInit {
  bool black = false;
  bool compress = false;
  std::vector<Label> port_in;
  std::vector<std::uint8_t> rel;  // per port
};

// Sublayer propagation program. Rake nodes report a label-set upward once all
// lower neighbors reported and complete once their parent answers with a
// label. Compress runs first exchange end-to-end gathers so every run node
// holds the whole run and evaluates f identically, then the two ends report
// upward, and completion sweeps run inward from both ends, meeting at the
// pinned middle edge.
class LayeredProgram : public NodeProgram {
 public:
  LayeredProgram(const SharedCfg* c, const NodeInit* ini) : c_(c), ini_(ini) {}

  Label port_label(PortId q) const { return final_[q]; }
  bool aborted() const { return aborted_; }
  bool computed_empty() const { return computed_empty_; }
  bool infeasible_top() const { return infeasible_top_; }

  void init(Context& ctx) override {
    const std::size_t d = std::size_t(ctx.degree);
    set_.assign(d, LabelSet{});
    got_set_.assign(d, false);
    got_label_.assign(d, false);
    final_.assign(d, kNoLabel);
    for (PortId q = 0; q < PortId(d); ++q) {
      switch (ini_->rel[q]) {
        case kRelLower: lower_.push_back(q); break;
        case kRelHigher: higher_.push_back(q); break;
        default: path_.push_back(q); break;
      }
    }
  }

  NodeStatus step(Context& ctx) override {
    if (done_) return NodeStatus::Done;
    int abort_from = -1;
    for (int q = 0; q < ctx.degree; ++q) {
      const Message* m = ctx.recv(PortId(q));
      if (!m) continue;
      BitReader r(*m);
      const std::uint64_t tag = r.bits(kTagBits);
      switch (tag) {
        case kTagSet:
          set_[std::size_t(q)] = LabelSet{r.bits(c_->sigma)};
          got_set_[std::size_t(q)] = true;
          break;
        case kTagLabel:
          final_[std::size_t(q)] = Label(r.bits(c_->lw));
          got_label_[std::size_t(q)] = true;
          break;
        case kTagGather:
          gather_[side_of(PortId(q))] = decode_gather(r, *c_);
          break;
        case kTagSweep:
          sweep_[side_of(PortId(q))] = Label(r.bits(c_->lw));
          break;
        default:
          abort_from = q;
      }
    }
    if (abort_from >= 0) {
      aborted_ = true;
      for (int q = 0; q < ctx.degree; ++q)
        if (q != abort_from) ctx.send(PortId(q), message_bits(kTagAbort, kTagBits));
      done_ = true;
      return NodeStatus::Done;
    }

    if (!ini_->compress) {
      step_rake(ctx);
    } else if (path_.empty()) {
      step_solo(ctx);
    } else if (path_.size() == 1) {
      step_end(ctx);
    } else {
      step_interior(ctx);
    }
    return done_ ? NodeStatus::Done : NodeStatus::Idle;
  }

 private:
  int side_of(PortId q) const { return !path_.empty() && q == path_[0] ? 0 : 1; }

  bool extras_ready() const {
    for (PortId q : lower_) if (!got_set_[q]) return false;
    return true;
  }

  std::vector<IncomingEdge> extras_in() const {
    std::vector<IncomingEdge> in;
    in.reserve(lower_.size());
    for (PortId q : lower_) in.push_back({ini_->port_in[q], set_[q]});
    return in;
  }

  void send_set(Context& ctx, PortId q, LabelSet s) {
    BitWriter w;
    w.bits(kTagSet, kTagBits);
    w.bits(s.bits, c_->sigma);
    ctx.send(q, std::move(w).message());
  }

  void send_label(Context& ctx, PortId q, Label l) {
    final_[q] = l;
    BitWriter w;
    w.bits(kTagLabel, kTagBits);
    w.bits(l, c_->lw);
    ctx.send(q, std::move(w).message());
  }

  void send_sweep(Context& ctx, PortId q, Label l) {
    BitWriter w;
    w.bits(kTagSweep, kTagBits);
    w.bits(l, c_->lw);
    ctx.send(q, std::move(w).message());
  }

  void abort_all(Context& ctx) {
    aborted_ = true;
    for (int q = 0; q < ctx.degree; ++q) ctx.send(PortId(q), message_bits(kTagAbort, kTagBits));
    done_ = true;
  }

  PathRecord own_record(PortId behind, PortId ahead) const {
    PathRecord r;
    r.black = ini_->black;
    r.prev_in = ini_->port_in[behind];
    r.next_in = ini_->port_in[ahead];
    r.extras = extras_in();
    return r;
  }

  // records arrive ordered far-end first; orientation reverses when this
  // node's end of the run leads
  void build_path(std::vector<PathRecord>& full, bool rev) {
    const std::size_t x = full.size();
    cp_ = CompressPath{};
    cp_.black.resize(x);
    cp_.incoming.resize(x);
    cp_.edge_input.resize(x - 1);
    cp_.end_input = {full.front().prev_in, full.back().next_in};
    for (std::size_t i = 0; i < x; ++i) {
      cp_.black[i] = full[i].black;
      cp_.incoming[i] = std::move(full[i].extras);
      if (i + 1 < x) cp_.edge_input[i] = full[i].next_in;
    }
    if (rev) {
      std::reverse(cp_.black.begin(), cp_.black.end());
      std::reverse(cp_.incoming.begin(), cp_.incoming.end());
      std::reverse(cp_.edge_input.begin(), cp_.edge_input.end());
      std::swap(cp_.end_input[0], cp_.end_input[1]);
    }
  }

  void step_rake(Context& ctx) {
    if (!acted_ && extras_ready()) {
      if (higher_.empty()) {
        // unique final survivor: feasibility decides the whole run
        auto pick = rake_pick(*c_->p, ini_->black, extras_in(), std::nullopt);
        if (!pick) {
          infeasible_top_ = true;
          abort_all(ctx);
          return;
        }
        for (std::size_t i = 0; i < lower_.size(); ++i) send_label(ctx, lower_[i], (*pick)[i]);
        done_ = true;
        return;
      }
      up_set_ = rake_g(*c_->p, ini_->black, extras_in(), ini_->port_in[higher_[0]]);
      if (up_set_.empty()) computed_empty_ = true;
      send_set(ctx, higher_[0], up_set_);
      acted_ = true;
    }
    if (acted_ && got_label_[higher_[0]]) {
      auto pick = rake_pick(*c_->p, ini_->black, extras_in(),
                            std::make_pair(ini_->port_in[higher_[0]], final_[higher_[0]]));
      if (!pick) throw std::logic_error("layered solver: rake completion lost feasibility");
      for (std::size_t i = 0; i < lower_.size(); ++i) send_label(ctx, lower_[i], (*pick)[i]);
      done_ = true;
    }
  }

  void step_solo(Context& ctx) {
    if (!acted_ && extras_ready()) {
      cp_ = CompressPath{};
      cp_.black = {ini_->black};
      cp_.end_input = {ini_->port_in[higher_[0]], ini_->port_in[higher_[1]]};
      cp_.incoming = {extras_in()};
      outcome_ = compress_lookup(*c_->p, cp_, *c_->f);
      if (outcome_.first.empty() || outcome_.last.empty()) computed_empty_ = true;
      send_set(ctx, higher_[0], outcome_.first);
      send_set(ctx, higher_[1], outcome_.last);
      acted_ = true;
    }
    if (acted_ && got_label_[higher_[0]] && got_label_[higher_[1]]) {
      auto in = extras_in();
      in.push_back({ini_->port_in[higher_[0]], LabelSet::of({final_[higher_[0]]})});
      in.push_back({ini_->port_in[higher_[1]], LabelSet::of({final_[higher_[1]]})});
      auto pick = rake_pick(*c_->p, ini_->black, in, std::nullopt);
      if (!pick) throw std::logic_error("layered solver: one-node run completion lost feasibility");
      for (std::size_t i = 0; i < lower_.size(); ++i) send_label(ctx, lower_[i], (*pick)[i]);
      done_ = true;
    }
  }

  void step_end(Context& ctx) {
    if (extras_ready() && !gather_sent_) {
      GatherMsg gm;
      gm.node = ctx.node;
      gm.recs.push_back(own_record(higher_[0], path_[0]));
      ctx.send(path_[0], encode_gather(gm, *c_));
      gather_sent_ = true;
    }
    if (extras_ready() && gather_[0] && !computed_) {
      std::vector<PathRecord> full = std::move(gather_[0]->recs);
      full.push_back(own_record(path_[0], higher_[0]));
      const bool lead = std::uint64_t(ctx.node) < gather_[0]->node;
      build_path(full, lead);
      my_pos_ = lead ? 0 : int(full.size()) - 1;
      outcome_ = compress_lookup(*c_->p, cp_, *c_->f);
      const LabelSet up = my_pos_ == 0 ? outcome_.first : outcome_.last;
      if (up.empty()) computed_empty_ = true;
      send_set(ctx, higher_[0], up);
      computed_ = true;
    }
    if (computed_ && got_label_[higher_[0]]) {
      const int x = int(cp_.length());
      const bool at0 = my_pos_ == 0;
      const int adj = at0 ? 0 : x - 2;
      auto in = extras_in();
      in.push_back({cp_.edge_input[std::size_t(adj)], outcome_.edge_sets[std::size_t(adj)]});
      auto pick = rake_pick(*c_->p, ini_->black, in,
                            std::make_pair(cp_.end_input[at0 ? 0 : 1], final_[higher_[0]]));
      if (!pick) throw std::logic_error("layered solver: run end completion lost feasibility");
      for (std::size_t i = 0; i < lower_.size(); ++i) send_label(ctx, lower_[i], (*pick)[i]);
      const Label mu = pick->back();
      final_[path_[0]] = mu;
      const bool fwd = at0 ? 0 < outcome_.middle_edge : x - 2 > outcome_.middle_edge;
      if (fwd) send_sweep(ctx, path_[0], mu);
      done_ = true;
    }
  }

  void step_interior(Context& ctx) {
    for (int s = 0; s < 2; ++s) {
      if (gather_[s] && extras_ready() && !fwd_[s]) {
        GatherMsg gm = *gather_[s];
        gm.recs.push_back(own_record(path_[std::size_t(s)], path_[std::size_t(1 - s)]));
        ctx.send(path_[std::size_t(1 - s)], encode_gather(gm, *c_));
        fwd_[s] = true;
      }
    }
    if (extras_ready() && gather_[0] && gather_[1] && !computed_) {
      std::vector<PathRecord> full = gather_[0]->recs;
      const int k = int(full.size());
      full.push_back(own_record(path_[0], path_[1]));
      for (auto it = gather_[1]->recs.rbegin(); it != gather_[1]->recs.rend(); ++it) {
        PathRecord r = *it;
        std::swap(r.prev_in, r.next_in);  // opposite travel direction
        full.push_back(std::move(r));
      }
      const bool rev = gather_[1]->node < gather_[0]->node;
      build_path(full, rev);
      my_pos_ = rev ? int(full.size()) - 1 - k : k;
      prev_port_ = rev ? path_[1] : path_[0];  // toward run position 0
      outcome_ = compress_lookup(*c_->p, cp_, *c_->f);
      computed_ = true;
    }
    if (!computed_) return;
    for (int s = 0; s < 2; ++s) {
      if (!sweep_[s]) continue;
      const Label lam = *sweep_[s];
      const bool from_prev = path_[std::size_t(s)] == prev_port_;
      const int fixed_e = from_prev ? my_pos_ - 1 : my_pos_;
      const int free_e = from_prev ? my_pos_ : my_pos_ - 1;
      auto in = extras_in();
      in.push_back({cp_.edge_input[std::size_t(fixed_e)], LabelSet::of({lam})});
      in.push_back({cp_.edge_input[std::size_t(free_e)], outcome_.edge_sets[std::size_t(free_e)]});
      auto pick = rake_pick(*c_->p, ini_->black, in, std::nullopt);
      if (!pick) throw std::logic_error("layered solver: run interior completion lost feasibility");
      for (std::size_t i = 0; i < lower_.size(); ++i) send_label(ctx, lower_[i], (*pick)[i]);
      const Label mu = pick->back();
      final_[path_[std::size_t(s)]] = lam;
      final_[path_[std::size_t(1 - s)]] = mu;
      const bool fwd = from_prev ? my_pos_ < outcome_.middle_edge
                                 : my_pos_ - 1 > outcome_.middle_edge;
      if (fwd) send_sweep(ctx, path_[std::size_t(1 - s)], mu);
      done_ = true;
      return;
    }
  }

  const SharedCfg* c_;
  const NodeInit* ini_;

  std::vector<PortId> lower_, higher_, path_;
  std::vector<LabelSet> set_;
  std::vector<bool> got_set_, got_label_;
  std::vector<Label> final_;
  LabelSet up_set_;

  std::optional<GatherMsg> gather_[2];
  std::optional<Label> sweep_[2];
  bool fwd_[2] = {false, false};
  CompressPath cp_;
  CompressOutcome outcome_;
  int my_pos_ = -1;
  PortId prev_port_ = 0;

  bool acted_ = false, gather_sent_ = false, computed_ = false, done_ = false;
  bool aborted_ = false, computed_empty_ = false, infeasible_top_ = false;
};

std::string sublayer_name(const NodeLayer& nl) {
  if (nl.kind == LayerKind::Compress) return "compress " + std::to_string(nl.iter);
  return "rake " + std::to_string(nl.iter) + "." + std::to_string(nl.sub);
}

}  // namespace

SolverRun solve_superlog(const BwProblem& p, const Graph& tree, int gamma, int l,
                         const FFunction& f, RunOptions opts) {
  if (!p.node_edge()) throw std::invalid_argument("solve_superlog: problem must be node-edge");
  if (!tree.is_tree()) throw std::invalid_argument("solve_superlog: input must be a tree");
  if (gamma < 1 || l < 1)
    throw std::invalid_argument("solve_superlog: gamma and l must be positive");
  if (f.preference.empty())
    throw std::invalid_argument("solve_superlog: f needs a preference order");
  const int sigma = int(p.out_alpha.size());
  if (sigma < 1 || sigma > 64)
    throw std::invalid_argument("solve_superlog: output alphabet must have 1..64 labels");

  NodeEdgeInstance ne = node_edge_instance(tree);
  const Graph& g = ne.bw.g;
  const std::size_t n = g.node_count();

  DistributedDecomposition dd = rake_compress_distributed(g, gamma, l, opts);
  SolverRun run;
  run.decomposition_rounds = dd.trace.rounds;
  run.max_message_bits = dd.trace.max_bits;
  if (dd.timed_out) {
    run.timed_out = true;
    run.trace = std::move(dd.trace);
    return run;
  }
  const Decomposition& d = dd.decomp;

  std::vector<std::uint64_t> key(n);
  for (NodeId v = 0; v < n; ++v) key[v] = sublayer_key(d.node[v]);

  SharedCfg cfg;
  cfg.p = &p;
  cfg.f = &f;
  cfg.sigma = sigma;
  cfg.lw = std::max(1, ceil_log2(std::uint64_t(sigma)));
  cfg.iw = std::max(1, ceil_log2(std::uint64_t(p.in_alpha.size())));
  cfg.dw = std::max(1, ceil_log2(std::uint64_t(g.max_degree()) + 1));
  cfg.cw = std::max(1, ceil_log2(std::uint64_t(2 * l + 1)));
  cfg.nw = std::max(1, ceil_log2(std::max<std::uint64_t>(2, std::uint64_t(n))));

  std::vector<NodeInit> ini(n);
  for (NodeId v = 0; v < n; ++v) {
    NodeInit& e = ini[v];
    e.black = ne.bw.color[v] == NodeColor::Black;
    e.compress = d.node[v].kind == LayerKind::Compress;
    const auto& ports = g.ports(v);
    e.port_in.resize(ports.size());
    e.rel.resize(ports.size());
    int higher = 0, path = 0;
    for (PortId q = 0; q < PortId(ports.size()); ++q) {
      const PortEntry& pe = ports[q];
      e.port_in[q] = ne.bw.input[pe.edge];
      if (key[pe.to] < key[v]) {
        e.rel[q] = kRelLower;
      } else if (key[pe.to] > key[v]) {
        e.rel[q] = kRelHigher;
        ++higher;
      } else {
        e.rel[q] = kRelPath;
        ++path;
      }
    }
    if (!e.compress && (path != 0 || higher > 1))
      throw std::logic_error("layered solver: rake node with unexpected neighbors");
    if (e.compress && path + higher != 2)
      throw std::logic_error("layered solver: compress node outside a two-ended run");
  }

  Engine eng(g, opts);
  const bool finished =
      eng.run([&](NodeId v) { return std::make_unique<LayeredProgram>(&cfg, &ini[v]); });
  run.trace = eng.trace();
  run.rounds = run.trace.rounds;
  run.max_message_bits = std::max(run.max_message_bits, run.trace.max_bits);
  run.timed_out = !finished;
  if (!finished) return run;

  bool any_abort = false;
  NodeId bad = kNoNode;
  for (NodeId v = 0; v < n; ++v) {
    const auto& prog = eng.program_as<LayeredProgram>(v);
    if (prog.aborted()) any_abort = true;
    if (prog.computed_empty() || prog.infeasible_top()) {
      if (bad == kNoNode || std::make_pair(key[v], v) < std::make_pair(key[bad], bad)) bad = v;
    }
  }
  if (any_abort) {
    run.aborted = true;
    run.empty_node = bad;
    if (bad != kNoNode) run.empty_sublayer = sublayer_name(d.node[bad]);
    return run;
  }

  EdgeLabeling out(g.edge_count(), kNoLabel);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ends = g.edge(e);
    Label a = eng.program_as<LayeredProgram>(ends.a.node).port_label(ends.a.port);
    Label b = eng.program_as<LayeredProgram>(ends.b.node).port_label(ends.b.port);
    if (a == kNoLabel || a != b)
      throw std::logic_error("layered solver: edge ends disagree on the final label");
    out[e] = a;
  }
  if (!check_bw(p, ne.bw, out).ok())
    throw std::logic_error("layered solver: produced labeling fails its own checker");
  run.labeling = std::move(out);
  run.solved = true;
  return run;
}

}  // namespace lclab
