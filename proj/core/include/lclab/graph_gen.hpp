#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lclab/graph.hpp"

namespace lclab {

// Uniform-attachment random tree with max degree Δ, deterministic per seed.
Graph random_tree(int n, int max_degree, std::uint64_t seed);

Graph path_graph(int n);
Graph star_graph(int leaves);
// Complete binary tree with `levels` levels (2^levels - 1 nodes).
Graph binary_tree(int levels);
// Path of `spine` nodes, each with `legs` pendant leaves (degree Δ knob).
Graph caterpillar(int spine, int legs);

// Invokes fn once per labeled tree on n nodes (Prüfer enumeration, n^(n-2)
// trees). Meant for exhaustive small-n oracles.
void for_each_labeled_tree(int n, const std::function<void(const Graph&)>& fn);

// One representative per isomorphism class of trees on n nodes.
std::vector<Graph> nonisomorphic_trees(int n);

// AHU canonical string of a tree; equal strings iff isomorphic.
std::string tree_canonical_form(const Graph& g);

}  // namespace lclab
