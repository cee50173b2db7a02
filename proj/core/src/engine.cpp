#include "lclab/engine.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lclab {

namespace {
constexpr std::size_t kMaxStoredViolations = 64;
}

std::uint64_t BandwidthPolicy::budget_bits(std::size_t declared_n) const {
  std::uint64_t b = static_cast<std::uint64_t>(c) * ceil_log2(declared_n);
  return b < 1 ? 1 : b;
}

const Message* Context::recv(PortId p) const {
  if (!inbox) return nullptr;
  const auto& slot = (*inbox)[p];
  return slot ? &*slot : nullptr;
}

bool Context::has_messages() const {
  if (!inbox) return false;
  for (const auto& m : *inbox)
    if (m) return true;
  return false;
}

void Context::send(PortId p, Message m) {
  if (p >= degree) throw std::out_of_range("send: bad port");
  out.emplace_back(p, std::move(m));
}

std::vector<std::uint64_t> assign_random_ids(std::size_t n, std::uint64_t space,
                                             std::uint64_t seed) {
  if (space < n) throw std::invalid_argument("id space smaller than node count");
  Rng rng(seed);
  std::vector<std::uint64_t> ids(n);
  for (auto& v : ids) v = rng.below(space);
  return ids;
}

Engine::Engine(const Graph& g, RunOptions opts) : g_(&g), opts_(opts) {
  declared_n_ = opts_.declared_n ? opts_.declared_n : g.node_count();
  const std::size_t n = g.node_count();
  if (opts_.random_ids) {
    std::uint64_t space = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(n) * n * n);
    std::uint64_t salt = 0;
    for (;;) {
      ids_ = assign_random_ids(n, space, Rng::mix(opts_.seed, 0xA11D5 + salt));
      std::set<std::uint64_t> dedup(ids_.begin(), ids_.end());
      if (dedup.size() == n) break;
      if (++salt > 100) throw std::runtime_error("could not draw distinct ids");
    }
  } else {
    ids_.resize(n);
    for (std::size_t v = 0; v < n; ++v) ids_[v] = v;
  }
}

bool Engine::run(const Factory& make) {
  const std::size_t n = g_->node_count();
  const std::uint64_t budget = opts_.policy.budget_bits(declared_n_);

  std::vector<std::vector<std::uint64_t>> nbr_ids(n);
  for (NodeId v = 0; v < n; ++v)
    for (const PortEntry& pe : g_->ports(v)) nbr_ids[v].push_back(ids_[pe.to]);

  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (NodeId v = 0; v < n; ++v) rngs.emplace_back(Rng::mix(opts_.seed, ids_[v]));

  programs_.clear();
  programs_.reserve(n);
  trace_ = Trace{};
  trace_.done_round.assign(n, -1);
  trace_.full_rows = opts_.trace_mode == TraceMode::Full;
  trace_.bounded = opts_.policy.bounded;
  trace_.budget = budget;
  timed_out_ = false;

  std::vector<NodeStatus> status(n, NodeStatus::Active);
  std::vector<std::vector<std::optional<Message>>> cur(n), nxt(n);
  for (NodeId v = 0; v < n; ++v) {
    cur[v].resize(g_->ports(v).size());
    nxt[v].resize(g_->ports(v).size());
  }
  std::vector<HalfEdge> filled_cur, filled_nxt;

  auto make_ctx = [&](NodeId v, int round) {
    Context ctx;
    ctx.node = v;
    ctx.id = ids_[v];
    ctx.degree = g_->degree(v);
    ctx.declared_n = declared_n_;
    ctx.round = round;
    ctx.rng = &rngs[v];
    ctx.neighbor_ids = &nbr_ids[v];
    return ctx;
  };

  for (NodeId v = 0; v < n; ++v) {
    programs_.push_back(make(v));
    Context ctx = make_ctx(v, -1);
    programs_[v]->init(ctx);
    if (!ctx.out.empty()) throw std::logic_error("init must not send");
  }

  std::vector<bool> has_msg(n, false);
  std::vector<NodeId> order;
  std::vector<TraceRow> round_rows;

  int round = 0;
  for (;; ++round) {
    order.clear();
    for (NodeId v = 0; v < n; ++v) {
      if (status[v] == NodeStatus::Done) continue;
      if (status[v] == NodeStatus::Active || has_msg[v]) order.push_back(v);
    }
    if (order.empty()) break;
    if (round >= opts_.max_rounds) {
      timed_out_ = true;
      break;
    }
    if (opts_.processing_shuffle != 0) {
      Rng sh(Rng::mix(opts_.processing_shuffle, static_cast<std::uint64_t>(round)));
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[sh.below(i)]);
    }

    round_rows.clear();
    for (NodeId v : order) {
      Context ctx = make_ctx(v, round);
      ctx.inbox = &cur[v];
      NodeStatus s = programs_[v]->step(ctx);
      status[v] = s;
      if (s == NodeStatus::Done && trace_.done_round[v] < 0) trace_.done_round[v] = round;
      for (auto& [p, msg] : ctx.out) {
        const PortEntry& pe = g_->ports(v)[p];
        if (nxt[pe.to][pe.rev]) throw std::logic_error("duplicate send on a port");
        round_rows.push_back({round, v, pe.to, msg.bit_count});
        nxt[pe.to][pe.rev] = std::move(msg);
        filled_nxt.push_back({pe.to, pe.rev});
      }
    }

    // canonical order: the trace must not depend on processing order
    std::sort(round_rows.begin(), round_rows.end(), [](const TraceRow& a, const TraceRow& b) {
      return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    for (const TraceRow& r : round_rows) {
      ++trace_.messages;
      trace_.total_bits += r.bits;
      if (r.bits > trace_.max_bits) {
        trace_.max_bits = r.bits;
        trace_.max_row = r;
      }
      if (trace_.bounded && r.bits > budget) {
        ++trace_.violations_total;
        if (trace_.violations.size() < kMaxStoredViolations) trace_.violations.push_back(r);
      }
      if (trace_.full_rows) trace_.rows.push_back(r);
    }
    if (!round_rows.empty()) trace_.rounds = round + 1;

    for (const HalfEdge& h : filled_cur) {
      cur[h.node][h.port].reset();
      has_msg[h.node] = false;
    }
    filled_cur.clear();
    std::swap(cur, nxt);
    std::swap(filled_cur, filled_nxt);
    for (const HalfEdge& h : filled_cur) has_msg[h.node] = true;
  }
  trace_.steps_rounds = round;
  return !timed_out_;
}

AuditVerdict audit(const Trace& t, const BandwidthPolicy& policy, std::size_t declared_n) {
  AuditVerdict v;
  v.budget = policy.bounded ? policy.budget_bits(declared_n) : 0;
  v.max_bits = t.max_bits;
  if (!policy.bounded) return v;
  if (t.full_rows) {
    for (const TraceRow& r : t.rows)
      if (r.bits > v.budget) {
        ++v.violations_total;
        if (v.violations.size() < kMaxStoredViolations) v.violations.push_back(r);
      }
  } else {
    if (!t.bounded || t.budget != v.budget)
      throw std::invalid_argument("aggregate trace was audited under a different policy");
    v.violations = t.violations;
    v.violations_total = t.violations_total;
  }
  v.pass = v.violations_total == 0;
  return v;
}

std::string AuditVerdict::to_string() const {
  std::ostringstream os;
  if (pass) {
    os << "audit: pass (max message " << max_bits << " bits";
    if (budget) os << ", budget " << budget;
    os << ")";
    return os.str();
  }
  os << "audit: FAIL, " << violations_total << " message(s) over " << budget << " bits";
  if (!violations.empty()) {
    const TraceRow& r = violations.front();
    os << "; first at round " << r.round << " edge " << r.src << "->" << r.dst << " (" << r.bits
       << " bits)";
  }
  return os.str();
}

std::string trace_to_csv(const Trace& t) {
  if (!t.full_rows) throw std::invalid_argument("csv export needs a full trace");
  std::string s = "round,src,dst,bits\n";
  for (const TraceRow& r : t.rows) {
    s += std::to_string(r.round);
    s += ',';
    s += std::to_string(r.src);
    s += ',';
    s += std::to_string(r.dst);
    s += ',';
    s += std::to_string(r.bits);
    s += '\n';
  }
  return s;
}

std::string trace_summary_json(const Trace& t) {
  nlohmann::json j;
  j["rounds"] = t.rounds;
  j["steps_rounds"] = t.steps_rounds;
  j["messages"] = t.messages;
  j["total_bits"] = t.total_bits;
  j["max_bits"] = t.max_bits;
  if (t.max_row.round >= 0)
    j["max_message"] = {{"round", t.max_row.round},
                        {"src", t.max_row.src},
                        {"dst", t.max_row.dst},
                        {"bits", t.max_row.bits}};
  if (t.bounded) {
    j["budget"] = t.budget;
    j["violations"] = t.violations_total;
  }
  return j.dump(2);
}

}  // namespace lclab
