#pragma once

#include <iosfwd>
#include <string>

#include "lclab/graph.hpp"

namespace lclab {

// Text edge list with explicit ports and optional half-edge input labels.
// Both formats round-trip exactly (ids, ports, labels).
std::string graph_to_text(const Graph& g);
Graph graph_from_text(const std::string& text);

std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& json_text);

}  // namespace lclab
