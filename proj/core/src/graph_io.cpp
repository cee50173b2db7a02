#include "lclab/graph_io.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lclab {

namespace {

// Edges must come back with the exact ports they were written with; since
// ports are assigned in insertion order this holds whenever the edge list is
// emitted in edge-id order, which both writers do.
void check_ports(const Graph& g, EdgeId e, NodeId u, PortId pu, NodeId v, PortId pv) {
  const auto& ee = g.edge(e);
  if (ee.a.node != u || ee.a.port != pu || ee.b.node != v || ee.b.port != pv)
    throw std::runtime_error("graph load: port assignment does not round-trip");
}

}  // namespace

std::string graph_to_text(const Graph& g) {
  std::ostringstream out;
  out << "lclab-graph 1\n";
  out << "nodes " << g.node_count() << "\n";
  out << "inputs " << (g.has_inputs() ? 1 : 0) << "\n";
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ee = g.edge(e);
    out << "edge " << ee.a.node << " " << ee.a.port << " " << ee.b.node << " " << ee.b.port;
    if (g.has_inputs())
      out << " " << int(g.input(ee.a.node, ee.a.port)) << " " << int(g.input(ee.b.node, ee.b.port));
    out << "\n";
  }
  return out.str();
}

Graph graph_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "lclab-graph" || version != 1)
    throw std::runtime_error("graph load: bad header");
  std::size_t n = 0;
  int has_inputs = 0;
  if (!(in >> word >> n) || word != "nodes") throw std::runtime_error("graph load: bad node count");
  if (!(in >> word >> has_inputs) || word != "inputs")
    throw std::runtime_error("graph load: bad inputs flag");
  Graph g(n);
  if (has_inputs) g.enable_inputs();
  while (in >> word) {
    if (word != "edge") throw std::runtime_error("graph load: expected edge line");
    NodeId u, v;
    int pu, pv;
    if (!(in >> u >> pu >> v >> pv)) throw std::runtime_error("graph load: bad edge line");
    EdgeId e = g.add_edge(u, v);
    check_ports(g, e, u, static_cast<PortId>(pu), v, static_cast<PortId>(pv));
    if (has_inputs) {
      int iu, iv;
      if (!(in >> iu >> iv)) throw std::runtime_error("graph load: bad edge labels");
      g.set_input(u, static_cast<PortId>(pu), static_cast<std::uint8_t>(iu));
      g.set_input(v, static_cast<PortId>(pv), static_cast<std::uint8_t>(iv));
    }
  }
  return g;
}

std::string graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["format"] = "lclab-graph";
  j["version"] = 1;
  j["nodes"] = g.node_count();
  j["inputs"] = g.has_inputs();
  auto& edges = j["edges"] = nlohmann::json::array();
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ee = g.edge(e);
    nlohmann::json row = {ee.a.node, ee.a.port, ee.b.node, ee.b.port};
    if (g.has_inputs()) {
      row.push_back(g.input(ee.a.node, ee.a.port));
      row.push_back(g.input(ee.b.node, ee.b.port));
    }
    edges.push_back(std::move(row));
  }
  return j.dump(2);
}

Graph graph_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (j.value("format", "") != "lclab-graph" || j.value("version", 0) != 1)
    throw std::runtime_error("graph load: bad json header");
  Graph g(j.at("nodes").get<std::size_t>());
  bool has_inputs = j.value("inputs", false);
  if (has_inputs) g.enable_inputs();
  for (const auto& row : j.at("edges")) {
    NodeId u = row.at(0).get<NodeId>();
    PortId pu = row.at(1).get<PortId>();
    NodeId v = row.at(2).get<NodeId>();
    PortId pv = row.at(3).get<PortId>();
    EdgeId e = g.add_edge(u, v);
    check_ports(g, e, u, pu, v, pv);
    if (has_inputs) {
      g.set_input(u, pu, row.at(4).get<std::uint8_t>());
      g.set_input(v, pv, row.at(5).get<std::uint8_t>());
    }
  }
  return g;
}

}  // namespace lclab
