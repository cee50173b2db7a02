#include "lclab/gather.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace lclab {

std::optional<NodeId> BallView::local_of(std::uint64_t want) const {
  for (std::size_t i = 0; i < id.size(); ++i)
    if (id[i] == want) return static_cast<NodeId>(i);
  return std::nullopt;
}

Message encode_facts(const std::vector<const NodeFact*>& facts) {
  BitWriter w;
  w.u32(static_cast<std::uint32_t>(facts.size()));
  for (const NodeFact* f : facts) {
    w.u64(f->id);
    w.u64(f->payload);
    w.u16(static_cast<std::uint16_t>(f->nbr.size()));
    for (std::size_t p = 0; p < f->nbr.size(); ++p) {
      w.u64(f->nbr[p]);
      w.u8(f->in[p]);
    }
  }
  return std::move(w).message();
}

std::vector<NodeFact> decode_facts(const Message& m) {
  BitReader r(m);
  std::vector<NodeFact> out(r.u32());
  for (NodeFact& f : out) {
    f.id = r.u64();
    f.payload = r.u64();
    std::size_t d = r.u16();
    f.nbr.resize(d);
    f.in.resize(d);
    for (std::size_t p = 0; p < d; ++p) {
      f.nbr[p] = r.u64();
      f.in[p] = r.u8();
    }
  }
  return out;
}

BallView reconstruct_ball(const std::map<std::uint64_t, NodeFact>& facts, std::uint64_t center,
                          int radius) {
  auto fact_of = [&](std::uint64_t id) -> const NodeFact& {
    auto it = facts.find(id);
    if (it == facts.end()) throw std::invalid_argument("missing fact inside the radius");
    return it->second;
  };

  // BFS over ids to fix depths and the local numbering (center first).
  std::map<std::uint64_t, NodeId> local;
  BallView view;
  view.radius = radius;
  std::deque<std::uint64_t> q{center};
  local[center] = 0;
  view.id.push_back(center);
  view.depth.push_back(0);
  std::size_t head = 0;
  std::vector<std::uint64_t> order{center};
  while (head < order.size()) {
    std::uint64_t u = order[head++];
    int du = view.depth[local[u]];
    if (du == radius) continue;
    for (std::uint64_t w : fact_of(u).nbr) {
      if (local.count(w)) continue;
      local[w] = static_cast<NodeId>(view.id.size());
      view.id.push_back(w);
      view.depth.push_back(du + 1);
      order.push_back(w);
    }
  }

  view.g = Graph(view.id.size());
  view.g.enable_inputs();
  view.payload.assign(view.id.size(), 0);
  // Edges in BFS order, each node's ports following its advertised order;
  // an edge between two depth-`radius` nodes is part of the ball as well.
  std::vector<std::vector<std::uint64_t>> pending_in(view.id.size());
  for (std::uint64_t u : order) {
    const NodeFact& f = fact_of(u);
    NodeId lu = local[u];
    view.payload[lu] = f.payload;
    for (std::size_t p = 0; p < f.nbr.size(); ++p) {
      auto it = local.find(f.nbr[p]);
      if (it == local.end()) continue;  // beyond the radius
      NodeId lw = it->second;
      if (!view.g.edge_between(lu, lw)) view.g.add_edge(lu, lw);
      view.g.set_input(lu, *view.g.port_to(lu, lw), f.in[p]);
    }
  }
  return view;
}

void GatherBallProgram::init(Context& ctx) {
  self_ = ctx.id;
  NodeFact f;
  f.id = ctx.id;
  f.payload = payload_;
  f.nbr = *ctx.neighbor_ids;
  f.in = inputs_.empty() ? std::vector<std::uint8_t>(ctx.degree, 0) : inputs_;
  if (f.in.size() != static_cast<std::size_t>(ctx.degree))
    throw std::invalid_argument("half input count does not match degree");
  facts_.emplace(ctx.id, std::move(f));
  fresh_.push_back(ctx.id);
  complete_ = radius_ == 0;
}

NodeStatus GatherBallProgram::step(Context& ctx) {
  if (ctx.round > 0) {
    for (PortId p = 0; p < ctx.degree; ++p) {
      const Message* m = ctx.recv(p);
      if (!m) continue;
      for (NodeFact& f : decode_facts(*m)) {
        std::uint64_t fid = f.id;
        if (facts_.emplace(fid, std::move(f)).second) fresh_.push_back(fid);
      }
    }
  }
  if (ctx.round >= radius_) {
    complete_ = true;
    return NodeStatus::Done;
  }
  std::vector<const NodeFact*> batch;
  for (std::uint64_t fid : fresh_) batch.push_back(&facts_.at(fid));
  fresh_.clear();
  if (!batch.empty()) {
    for (PortId p = 0; p < ctx.degree; ++p) ctx.send(p, encode_facts(batch));
  }
  return NodeStatus::Active;
}

BallView GatherBallProgram::ball() const {
  if (!complete_) throw std::logic_error("gathering has not finished");
  return reconstruct_ball(facts_, self_, radius_);
}

BallView gather_ball_oracle(const Graph& g, const std::vector<std::uint64_t>& ids,
                            const std::vector<std::uint64_t>& payload, NodeId v, int radius) {
  std::map<std::uint64_t, NodeFact> facts;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    NodeFact f;
    f.id = ids[u];
    f.payload = payload.empty() ? 0 : payload[u];
    for (std::size_t p = 0; p < g.ports(u).size(); ++p) {
      f.nbr.push_back(ids[g.ports(u)[p].to]);
      std::uint8_t li = g.has_inputs() ? g.input(u, static_cast<PortId>(p)) : 0;
      f.in.push_back(li == kNoLabel ? 0 : li);
    }
    facts.emplace(ids[u], std::move(f));
  }
  return reconstruct_ball(facts, ids[v], radius);
}

}  // namespace lclab
