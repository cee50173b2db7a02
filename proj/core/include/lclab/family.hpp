#pragma once

#include <cstdint>
#include <vector>

#include "lclab/graph.hpp"

namespace lclab {

// Direction labels used by grid / tree-like structures (half-edge labels).
namespace dir {
inline constexpr std::uint8_t U = 0;
inline constexpr std::uint8_t D = 1;
inline constexpr std::uint8_t L = 2;
inline constexpr std::uint8_t R = 3;
inline constexpr std::uint8_t P = 4;    // parent
inline constexpr std::uint8_t ChL = 5;  // left child
inline constexpr std::uint8_t ChR = 6;  // right child
const char* name(std::uint8_t d);
}  // namespace dir

// w columns by h rows; node (x,y) with 0 <= x < w, 0 <= y < h.
struct GridGraph {
  Graph g;
  int h = 0, w = 0;
  NodeId at(int x, int y) const { return static_cast<NodeId>(y * w + x); }
  int x_of(NodeId v) const { return static_cast<int>(v) % w; }
  int y_of(NodeId v) const { return static_cast<int>(v) / w; }
};

GridGraph make_grid(int h, int w);

// Complete binary tree of `ell` layers plus horizontal edges inside each
// layer; node (l,k) with 0 <= l < ell, 0 <= k < 2^l.
struct TreeLikeGraph {
  Graph g;
  int ell = 0;
  NodeId at(int l, int k) const { return static_cast<NodeId>((1 << l) - 1 + k); }
  int layer_of(NodeId v) const;
  int pos_of(NodeId v) const { return static_cast<int>(v) - ((1 << layer_of(v)) - 1); }
};

TreeLikeGraph make_tree_like(int ell);

enum class Structure : std::uint8_t {
  BottomGrid = 0,
  SideGrid = 1,
  ColTree = 2,
  TopTree = 3,
};
const char* structure_name(Structure s);

inline std::uint8_t structure_bit(Structure s) {
  return static_cast<std::uint8_t>(1u << static_cast<unsigned>(s));
}

// The composite family: an h x w bottom grid (h = 2^(ell-1), w = 2^(ellp-1)),
// one column tree of height ell per grid column, a side grid gluing the
// left-most spine of every column tree, and a top tree of height ellp whose
// leaves are the column-tree roots. Shared nodes appear once; shared edges
// carry several structure tags.
struct FamilyInstance {
  Graph g;
  int ell = 0, ellp = 0;
  int h = 0, w = 0;

  std::vector<std::uint8_t> edge_tags;  // bitmask of structure_bit()

  struct GridPos {
    std::int32_t x = -1, y = -1;
  };
  struct ColPos {
    std::int32_t tree = -1, l = -1, k = -1;
  };
  struct TopPos {
    std::int32_t l = -1, k = -1;
  };
  std::vector<GridPos> grid_pos;  // bottom grid membership
  std::vector<GridPos> side_pos;  // side grid membership
  std::vector<ColPos> col_pos;    // column tree membership
  std::vector<TopPos> top_pos;    // top tree membership

  bool tagged(EdgeId e, Structure s) const { return edge_tags[e] & structure_bit(s); }

  NodeId grid_at(int x, int y) const { return static_cast<NodeId>(y * w + x); }
  NodeId col_at(int tree, int l, int k) const;
  NodeId top_at(int l, int k) const;
  NodeId side_at(int x, int y) const { return col_at(x, ell - 1 - y, 0); }
};

FamilyInstance make_family_instance(int ell, int ellp);

}  // namespace lclab
