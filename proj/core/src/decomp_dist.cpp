#include <algorithm>
#include <array>
#include <bit>
#include <cassert>
#include <memory>
#include <stdexcept>
#include <vector>

#include "decomp_internal.hpp"
#include "lclab/decomp.hpp"

namespace lclab {

namespace {

// Every node follows the same fixed round schedule, so phase boundaries are
// globally aligned without any coordination messages. One iteration:
//   rake op j:      2 rounds (candidacy, resolve)
//   run detection:  STATUS exchange + capped distance waves + membership
//   level 0:        color reduction and MIS on each run        (41 rounds)
//   level k>=1:     the same on the survivor set, relayed      (42*3^k rounds)
//   repair:         anchor/endpoint probes, then spacing waves
// Survivors of the last level that are at least l+1 hops from both run ends
// are promoted; spacing waves insert further promotions so every residual
// segment has l..2l nodes.
//
// Every tie-break uses node indices, exchanged in the messages, never the
// run's assigned ids: the produced layers must be a function of the graph
// alone so repeated runs and sequential replays agree node for node.

enum Tag : unsigned {
  kCand = 0,
  kGone = 1,
  kStatus = 2,
  kUpd = 3,
  kInRun = 4,
  kClr = 5,
  kJoin = 6,
  kProbe = 7,
  kAProbe = 8,
  kEProbe = 9,
  kPWave = 10,
};
constexpr int kTagBits = 4;

struct DistSchedule {
  int gamma = 1, l = 4;
  int K = 0;          // sparsification levels past level 0
  int nw = 1;         // node index field width
  int hw = 1;         // hop counter width
  int uw = 1;         // boundary-distance field width
  int probe_cap = 0;  // longest hop count any repair probe or wave can need
  std::array<int, 5> cvw{};

  struct Level {
    int base = 0, r = 1;  // r rounds of relay slack per virtual round
  };
  std::vector<Level> levels;

  int status_r = 0, inrun_r = 0, rbase = 0, decide_r = 0, gone_r = 0, iter_rounds = 1;

  int cv_base(int k) const { return levels[k].base + (k == 0 ? 0 : levels[k].r); }
  int mis_base(int k) const { return cv_base(k) + 5 * levels[k].r; }
  int level_end(int k) const { return mis_base(k) + 36 * levels[k].r; }

  // Width of a color message read at round r_in_iter: the sending slot is the
  // one covering the previous round (relay latency never crosses a slot).
  int clr_width(int r_in_iter) const {
    int prev = r_in_iter - 1;
    for (int k = 0; k <= K; ++k) {
      int cvb = cv_base(k), r = levels[k].r;
      if (prev >= cvb && prev < cvb + 5 * r) return cvw[(prev - cvb) / r];
    }
    return -1;
  }

  static DistSchedule make(int gamma, int l, std::size_t n) {
    DistSchedule s;
    s.gamma = gamma;
    s.l = l;
    while ((2 << s.K) < l + 1) ++s.K;  // survivor spacing doubles per level
    int cover = 1, b = 3;
    for (int k = 0; k < s.K; ++k) {
      cover += b;  // every run node has a last-level survivor within `cover`
      b *= 3;
    }
    s.probe_cap = 2 * l + 2 * cover + 2;
    s.nw = std::max(1, ceil_log2(std::max<std::uint64_t>(2, n)));
    s.hw = std::max(1, ceil_log2(std::uint64_t(s.probe_cap) + 1));
    s.uw = std::max(1, ceil_log2(std::uint64_t(l) + 2));
    s.cvw[0] = s.nw;
    for (int t = 1; t < 5; ++t)
      s.cvw[t] = std::max(1, ceil_log2(2 * std::uint64_t(s.cvw[t - 1])));
    s.status_r = 2 * gamma;
    s.inrun_r = s.status_r + l + 2;
    int cur = s.inrun_r + 1, r = 1;
    for (int k = 0; k <= s.K; ++k) {
      s.levels.push_back({cur, r});
      cur += (k == 0 ? 0 : r) + (5 + 36) * r;
      r *= 3;
    }
    s.rbase = cur;
    s.decide_r = s.rbase + s.probe_cap + 1;
    s.gone_r = s.decide_r + s.probe_cap + 2;
    s.iter_rounds = s.gone_r + 1;
    return s;
  }
};

class RakeCompressNode final : public NodeProgram {
 public:
  explicit RakeCompressNode(std::shared_ptr<const DistSchedule> s) : S_(std::move(s)) {}

  void init(Context& ctx) override {
    alive_deg_ = ctx.degree;
    alive_port_.assign(std::size_t(std::max(0, ctx.degree)), 1);
  }

  NodeStatus step(Context& ctx) override {
    const DistSchedule& S = *S_;
    const int iter = ctx.round / S.iter_rounds + 1;
    const int r = ctx.round % S.iter_rounds;

    drain(ctx, r);

    if (r < 2 * S.gamma) {
      rake_round(ctx, iter, r);
      if (done_) return NodeStatus::Done;
    } else if (r == S.status_r) {
      start_compress(ctx);
    } else if (r == S.status_r + 1) {
      wave_base(ctx);
    } else if (r == S.inrun_r) {
      finish_detect(ctx);
    } else if (in_run_ && r > S.inrun_r && r < S.rbase) {
      level_round(ctx, r);
    } else if (in_run_ && r == S.rbase) {
      repair_probe(ctx);
    } else if (in_run_ && r == S.decide_r) {
      repair_decide(ctx);
    } else if (r == S.gone_r) {
      finish_iteration(ctx, iter);
      if (done_) return NodeStatus::Done;
    }
    return NodeStatus::Active;
  }

  NodeLayer layer() const {
    if (!decided_) throw std::logic_error("decomposition still running for this node");
    return out_;
  }

 private:
  static int other(int s) { return 1 - s; }

  int side_of(int port) const {
    if (!deg2_) return -1;
    if (port == pport_[0]) return 0;
    if (port == pport_[1]) return 1;
    return -1;
  }

  void send_tag(Context& ctx, int port, Tag t) {
    BitWriter w;
    w.bits(t, kTagBits);
    ctx.send(PortId(port), std::move(w).message());
  }

  void forward_raw(Context& ctx, int from_side, const Message& m) {
    int o = other(from_side);
    if (run_port_[o]) ctx.send(PortId(pport_[o]), Message(m));
  }

  void drain(Context& ctx, int r) {
    const DistSchedule& S = *S_;
    for (int p = 0; p < int(alive_port_.size()); ++p) {
      const Message* m = ctx.recv(PortId(p));
      if (!m) continue;
      BitReader br(*m);
      const Tag tag = Tag(br.bits(kTagBits));
      switch (tag) {
        case kCand:
          nbr_cand_ = true;
          nbr_cand_node_ = br.bits(S.nw);
          break;
        case kGone:
          if (alive_port_[p]) {
            alive_port_[p] = 0;
            --alive_deg_;
          }
          break;
        case kStatus: {
          int s = side_of(p);
          if (s >= 0) nbr_deg2_[s] = char(br.bits(1));
          break;
        }
        case kUpd: {
          int s = side_of(p);
          if (s < 0) break;
          int k = int(br.bits(S.uw));
          if (dist_[s] == 0) {
            dist_[s] = k + 1;
            if (k + 1 <= S.l) {
              BitWriter w;
              w.bits(kUpd, kTagBits);
              w.bits(std::uint64_t(k + 1), S.uw);
              ctx.send(PortId(pport_[other(s)]), std::move(w).message());
            }
          }
          break;
        }
        case kInRun: {
          int s = side_of(p);
          if (s >= 0) {
            run_port_[s] = 1;
            run_nbr_node_[s] = br.bits(S.nw);
          }
          break;
        }
        case kClr: {
          if (!in_run_) break;
          int s = side_of(p);
          if (s < 0) break;
          if (!vmember_) {
            forward_raw(ctx, s, *m);
            break;
          }
          int w = S.clr_width(r);
          if (w < 0) break;
          side_col_[s][0] = br.bits(w);
          side_col_[s][1] = br.bits(w);
          side_col_ok_[s] = 1;
          break;
        }
        case kJoin: {
          if (!in_run_) break;
          int s = side_of(p);
          if (s < 0) break;
          if (vmember_)
            nbr_in_s_[s] = 1;
          else
            forward_raw(ctx, s, *m);
          break;
        }
        case kProbe: {
          if (!in_run_) break;
          int s = side_of(p);
          if (s < 0) break;
          std::uint64_t who = br.bits(S.nw);
          int h = int(br.bits(S.hw));
          if (vmember_) {
            if (!vnbr_[s]) {
              vnbr_[s] = 1;
              vnbr_node_[s] = who;
              vnbr_dist_[s] = h;
            }
          } else if (h + 1 <= S.probe_cap && run_port_[other(s)]) {
            BitWriter w;
            w.bits(kProbe, kTagBits);
            w.bits(who, S.nw);
            w.bits(std::uint64_t(h + 1), S.hw);
            ctx.send(PortId(pport_[other(s)]), std::move(w).message());
          }
          break;
        }
        case kAProbe:
        case kEProbe: {
          bool isA = tag == kAProbe;
          if (!in_run_) break;
          int s = side_of(p);
          if (s < 0) break;
          std::uint64_t who = br.bits(S.nw);
          int h = int(br.bits(S.hw));
          if (isA) {
            if (!a_seen_[s]) {
              a_seen_[s] = 1;
              a_node_[s] = who;
              a_dist_[s] = h;
            }
          } else if (!e_seen_[s]) {
            e_seen_[s] = 1;
            e_node_[s] = who;
            e_dist_[s] = h;
          }
          if (!anchor_ && h + 1 <= S.probe_cap && run_port_[other(s)]) {
            BitWriter w;
            w.bits(isA ? kAProbe : kEProbe, kTagBits);
            w.bits(who, S.nw);
            w.bits(std::uint64_t(h + 1), S.hw);
            ctx.send(PortId(pport_[other(s)]), std::move(w).message());
          }
          break;
        }
        case kPWave: {
          if (!in_run_) break;
          int s = side_of(p);
          if (s < 0) break;
          int h = int(br.bits(S.hw));
          int cnt = int(br.bits(4));
          std::vector<int> offs(static_cast<std::size_t>(cnt));
          for (auto& o : offs) o = int(br.bits(S.hw));
          if (std::find(offs.begin(), offs.end(), h) != offs.end()) promoted_ = true;
          if (!offs.empty() && h < offs.back() && run_port_[other(s)]) {
            BitWriter w;
            w.bits(kPWave, kTagBits);
            w.bits(std::uint64_t(h + 1), S.hw);
            w.bits(std::uint64_t(cnt), 4);
            for (int o : offs) w.bits(std::uint64_t(o), S.hw);
            ctx.send(PortId(pport_[other(s)]), std::move(w).message());
          }
          break;
        }
      }
    }
  }

  void rake_round(Context& ctx, int iter, int r) {
    int j = r / 2;
    if (r % 2 == 0) {
      nbr_cand_ = false;
      cand_ = alive_deg_ <= 1;
      cand_port_ = -1;
      if (cand_ && alive_deg_ == 1) {
        for (int p = 0; p < int(alive_port_.size()); ++p)
          if (alive_port_[p]) cand_port_ = p;
        BitWriter w;
        w.bits(kCand, kTagBits);
        w.bits(ctx.node, S_->nw);
        ctx.send(PortId(cand_port_), std::move(w).message());
      }
    } else if (cand_) {
      // two facing degree-1 nodes: only the smaller node index goes
      bool removed = alive_deg_ == 0 || !nbr_cand_ ||
                     std::uint64_t(ctx.node) < nbr_cand_node_;
      if (removed) {
        out_ = NodeLayer{LayerKind::Rake, iter, j + 1, false};
        decided_ = done_ = true;
        if (cand_port_ >= 0) send_tag(ctx, cand_port_, kGone);
      }
      cand_ = false;
    }
  }

  void start_compress(Context& ctx) {
    deg2_ = alive_deg_ == 2;
    in_run_ = false;
    pport_[0] = pport_[1] = -1;
    nbr_deg2_[0] = nbr_deg2_[1] = 0;
    dist_[0] = dist_[1] = 0;
    run_port_[0] = run_port_[1] = 0;
    vmember_ = in_s_ = false;
    nbr_in_s_[0] = nbr_in_s_[1] = 0;
    vnbr_[0] = vnbr_[1] = 0;
    side_col_ok_[0] = side_col_ok_[1] = 0;
    anchor_ = promoted_ = false;
    a_seen_[0] = a_seen_[1] = 0;
    e_seen_[0] = e_seen_[1] = 0;
    if (deg2_) {
      int k = 0;
      for (int p = 0; p < int(alive_port_.size()); ++p)
        if (alive_port_[p]) pport_[k++] = p;
    }
    BitWriter proto;
    proto.bits(kStatus, kTagBits);
    proto.bits(deg2_ ? 1 : 0, 1);
    Message msg = std::move(proto).message();
    for (int p = 0; p < int(alive_port_.size()); ++p)
      if (alive_port_[p]) ctx.send(PortId(p), Message(msg));
  }

  void wave_base(Context& ctx) {
    if (!deg2_) return;
    for (int s = 0; s < 2; ++s) {
      if (nbr_deg2_[s]) continue;
      dist_[s] = 1;
      BitWriter w;
      w.bits(kUpd, kTagBits);
      w.bits(1, S_->uw);
      ctx.send(PortId(pport_[other(s)]), std::move(w).message());
    }
  }

  void finish_detect(Context& ctx) {
    if (!deg2_) return;
    for (int s = 0; s < 2; ++s)
      if (dist_[s] == 0) dist_[s] = S_->l + 2;  // boundary beyond the cap
    in_run_ = dist_[0] + dist_[1] - 1 >= S_->l;
    if (in_run_) {
      BitWriter w;
      w.bits(kInRun, kTagBits);
      w.bits(ctx.node, S_->nw);
      Message msg = std::move(w).message();
      for (int s = 0; s < 2; ++s) ctx.send(PortId(pport_[s]), Message(msg));
    }
  }

  void begin_level(Context& ctx, int k) {
    vmember_ = k == 0 ? in_run_ : in_s_;
    in_s_ = false;
    nbr_in_s_[0] = nbr_in_s_[1] = 0;
    side_col_ok_[0] = side_col_ok_[1] = 0;
    col_[0] = col_[1] = ctx.node;
    if (k == 0) {
      for (int s = 0; s < 2; ++s) {
        vnbr_[s] = run_port_[s];
        if (vnbr_[s]) {
          vnbr_node_[s] = run_nbr_node_[s];
          vnbr_dist_[s] = 1;
        }
      }
    } else {
      vnbr_[0] = vnbr_[1] = 0;
    }
  }

  void level_round(Context& ctx, int r) {
    const DistSchedule& S = *S_;
    int k = 0;
    while (r >= S.level_end(k)) ++k;
    const auto& L = S.levels[k];
    int off = r - L.base;
    if (off == 0) begin_level(ctx, k);
    if (k > 0 && off < L.r) {
      if (off == 0 && vmember_) {
        for (int s = 0; s < 2; ++s) {
          if (!run_port_[s]) continue;
          BitWriter w;
          w.bits(kProbe, kTagBits);
          w.bits(ctx.node, S.nw);
          w.bits(1, S.hw);
          ctx.send(PortId(pport_[s]), std::move(w).message());
        }
      }
      return;
    }
    int cvoff = off - (k > 0 ? L.r : 0);
    if (cvoff < 5 * L.r) {
      if (cvoff % L.r == 0) cv_slot(ctx, k, cvoff / L.r);
      return;
    }
    int misoff = cvoff - 5 * L.r;
    if (misoff % L.r == 0) mis_slot(ctx, misoff / L.r);
  }

  // forest A: edge to the smaller of the larger-index neighbors, forest B:
  // edge to the larger; together they cover every virtual path edge
  void parent_sides(Context& ctx, int out[2]) const {
    out[0] = out[1] = -1;
    int larger[2], cnt = 0;
    for (int s = 0; s < 2; ++s)
      if (vnbr_[s] && vnbr_node_[s] > std::uint64_t(ctx.node)) larger[cnt++] = s;
    if (cnt == 1) {
      out[0] = larger[0];
    } else if (cnt == 2) {
      bool first_smaller = vnbr_node_[larger[0]] < vnbr_node_[larger[1]];
      out[0] = first_smaller ? larger[0] : larger[1];
      out[1] = first_smaller ? larger[1] : larger[0];
    }
  }

  static std::uint64_t cv_update(std::uint64_t mine, std::uint64_t parent) {
    std::uint64_t x = mine ^ parent;
    assert(x != 0);
    int i = std::countr_zero(x);
    return 2ull * unsigned(i) + ((mine >> i) & 1u);
  }

  void cv_slot(Context& ctx, int k, int t) {
    if (!vmember_) return;
    const DistSchedule& S = *S_;
    if (t > 0) {
      int ps[2];
      parent_sides(ctx, ps);
      for (int f = 0; f < 2; ++f) {
        std::uint64_t pc;
        if (ps[f] >= 0) {
          assert(side_col_ok_[ps[f]]);
          pc = side_col_[ps[f]][f];
        } else {
          pc = col_[f] ^ 1;  // roots pair against a fictitious differing color
        }
        col_[f] = cv_update(col_[f], pc);
      }
    }
    (void)k;
    BitWriter w;
    w.bits(kClr, kTagBits);
    w.bits(col_[0], S.cvw[t]);
    w.bits(col_[1], S.cvw[t]);
    Message msg = std::move(w).message();
    for (int s = 0; s < 2; ++s)
      if (vnbr_[s]) ctx.send(PortId(pport_[s]), Message(msg));
  }

  void mis_slot(Context& ctx, int c) {
    if (!vmember_ || in_s_) return;
    if (nbr_in_s_[0] || nbr_in_s_[1]) return;
    if (int(col_[0]) * 6 + int(col_[1]) != c) return;
    in_s_ = true;
    for (int s = 0; s < 2; ++s)
      if (vnbr_[s]) send_tag(ctx, pport_[s], kJoin);
  }

  void repair_probe(Context& ctx) {
    const DistSchedule& S = *S_;
    anchor_ = in_s_ && dist_[0] > S.l && dist_[1] > S.l;
    bool is_end = !run_port_[0] || !run_port_[1];
    for (int s = 0; s < 2; ++s) {
      if (!run_port_[s]) continue;
      if (anchor_) {
        BitWriter w;
        w.bits(kAProbe, kTagBits);
        w.bits(ctx.node, S.nw);
        w.bits(1, S.hw);
        ctx.send(PortId(pport_[s]), std::move(w).message());
      }
      if (is_end) {
        BitWriter w;
        w.bits(kEProbe, kTagBits);
        w.bits(ctx.node, S.nw);
        w.bits(1, S.hw);
        ctx.send(PortId(pport_[s]), std::move(w).message());
      }
    }
  }

  void send_wave(Context& ctx, int side, int g, int shift) {
    const DistSchedule& S = *S_;
    auto sp = detail::span_spacings(g, S.l);
    if (sp.size() < 2) return;
    std::vector<int> offs;
    int cum = 0;
    for (std::size_t t = 0; t + 1 < sp.size(); ++t) {
      cum += sp[t];
      offs.push_back(cum + shift);
    }
    BitWriter w;
    w.bits(kPWave, kTagBits);
    w.bits(1, S.hw);
    w.bits(offs.size(), 4);
    for (int o : offs) w.bits(std::uint64_t(o), S.hw);
    ctx.send(PortId(pport_[side]), std::move(w).message());
  }

  void repair_decide(Context& ctx) {
    const DistSchedule& S = *S_;
    promoted_ = anchor_;
    if (anchor_) {
      for (int s = 0; s < 2; ++s) {
        if (!run_port_[s]) continue;
        if (a_seen_[s]) {
          if (std::uint64_t(ctx.node) < a_node_[s]) send_wave(ctx, s, a_dist_[s], 0);
        } else if (e_seen_[s]) {
          send_wave(ctx, s, e_dist_[s] + 1, 0);  // sentinel one hop past the end
        }
      }
    } else if ((!run_port_[0] || !run_port_[1]) && !a_seen_[0] && !a_seen_[1]) {
      // short run whose survivors were all too close to the ends
      for (int s = 0; s < 2; ++s) {
        if (!run_port_[s] || !e_seen_[s]) continue;
        int x = e_dist_[s] + 1;
        if (x > 2 * S.l && std::uint64_t(ctx.node) < e_node_[s]) send_wave(ctx, s, x + 1, -1);
      }
    }
  }

  void finish_iteration(Context& ctx, int iter) {
    if (!in_run_) return;
    out_ = promoted_ ? NodeLayer{LayerKind::Rake, iter + 1, 1, true}
                     : NodeLayer{LayerKind::Compress, iter, 0, false};
    decided_ = done_ = true;
    for (int s = 0; s < 2; ++s)
      if (!run_port_[s]) send_tag(ctx, pport_[s], kGone);
  }

  std::shared_ptr<const DistSchedule> S_;

  int alive_deg_ = 0;
  std::vector<char> alive_port_;
  bool decided_ = false, done_ = false;
  NodeLayer out_;

  bool cand_ = false, nbr_cand_ = false;
  int cand_port_ = -1;
  std::uint64_t nbr_cand_node_ = 0;

  bool deg2_ = false, in_run_ = false;
  int pport_[2] = {-1, -1};
  char nbr_deg2_[2] = {0, 0};
  int dist_[2] = {0, 0};
  char run_port_[2] = {0, 0};
  std::uint64_t run_nbr_node_[2] = {0, 0};

  bool vmember_ = false, in_s_ = false;
  char vnbr_[2] = {0, 0};
  std::uint64_t vnbr_node_[2] = {0, 0};
  int vnbr_dist_[2] = {0, 0};
  std::uint64_t col_[2] = {0, 0};
  std::uint64_t side_col_[2][2] = {{0, 0}, {0, 0}};
  char side_col_ok_[2] = {0, 0};
  char nbr_in_s_[2] = {0, 0};

  bool anchor_ = false, promoted_ = false;
  char a_seen_[2] = {0, 0};
  std::uint64_t a_node_[2] = {0, 0};
  int a_dist_[2] = {0, 0};
  char e_seen_[2] = {0, 0};
  std::uint64_t e_node_[2] = {0, 0};
  int e_dist_[2] = {0, 0};
};

}  // namespace

DistributedDecomposition rake_compress_distributed(const Graph& tree, int gamma, int l,
                                                   RunOptions opts) {
  if (gamma < 1) throw std::invalid_argument("gamma must be at least 1");
  if (l < 1) throw std::invalid_argument("l must be at least 1");
  std::size_t n = tree.node_count();
  if (n > 0 && (!tree.is_tree() || !tree.connected()))
    throw std::invalid_argument("rake_compress requires a connected acyclic graph");

  auto sched = std::make_shared<const DistSchedule>(DistSchedule::make(gamma, l, n));
  Engine eng(tree, opts);
  bool finished = eng.run([&](NodeId) { return std::make_unique<RakeCompressNode>(sched); });

  DistributedDecomposition out;
  out.timed_out = !finished;
  out.ids = eng.ids();
  out.trace = eng.trace();
  out.decomp.gamma = gamma;
  out.decomp.l = l;
  if (finished) {
    out.decomp.node.resize(n);
    for (NodeId v = 0; v < n; ++v) {
      out.decomp.node[v] = eng.program_as<RakeCompressNode>(v).layer();
      out.decomp.iterations = std::max(out.decomp.iterations, out.decomp.node[v].iter);
    }
  }
  return out;
}

}  // namespace lclab
