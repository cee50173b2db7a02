#include "lclab/family.hpp"

#include <stdexcept>

namespace lclab {

const char* dir::name(std::uint8_t d) {
  switch (d) {
    case dir::U: return "U";
    case dir::D: return "D";
    case dir::L: return "L";
    case dir::R: return "R";
    case dir::P: return "P";
    case dir::ChL: return "ChL";
    case dir::ChR: return "ChR";
  }
  return "?";
}

const char* structure_name(Structure s) {
  switch (s) {
    case Structure::BottomGrid: return "bottomGrid";
    case Structure::SideGrid: return "sideGrid";
    case Structure::ColTree: return "colTree";
    case Structure::TopTree: return "topTree";
  }
  return "?";
}

GridGraph make_grid(int h, int w) {
  if (h < 1 || w < 1) throw std::invalid_argument("make_grid: h, w must be >= 1");
  GridGraph out;
  out.h = h;
  out.w = w;
  out.g = Graph(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) out.g.add_edge(out.at(x, y), out.at(x + 1, y));
      if (y + 1 < h) out.g.add_edge(out.at(x, y), out.at(x, y + 1));
    }
  }
  return out;
}

int TreeLikeGraph::layer_of(NodeId v) const {
  int l = 0;
  while (((1 << (l + 1)) - 1) <= static_cast<int>(v)) ++l;
  return l;
}

TreeLikeGraph make_tree_like(int ell) {
  if (ell < 1) throw std::invalid_argument("make_tree_like: ell must be >= 1");
  TreeLikeGraph out;
  out.ell = ell;
  out.g = Graph(static_cast<std::size_t>((1 << ell) - 1));
  for (int l = 1; l < ell; ++l) {
    for (int k = 0; k < (1 << l); ++k) out.g.add_edge(out.at(l - 1, k / 2), out.at(l, k));
    for (int k = 0; k + 1 < (1 << l); ++k) out.g.add_edge(out.at(l, k), out.at(l, k + 1));
  }
  return out;
}

NodeId FamilyInstance::col_at(int tree, int l, int k) const {
  if (l == ell - 1) return grid_at(tree, k);  // bottom layer lives in the grid
  int base = h * w;
  int per_tree = (1 << (ell - 1)) - 1;  // internal (non-bottom) nodes per tree
  return static_cast<NodeId>(base + tree * per_tree + ((1 << l) - 1 + k));
}

NodeId FamilyInstance::top_at(int l, int k) const {
  if (l == ellp - 1) return col_at(k, 0, 0);  // leaves are the column-tree roots
  int base = h * w + w * ((1 << (ell - 1)) - 1);
  return static_cast<NodeId>(base + ((1 << l) - 1 + k));
}

FamilyInstance make_family_instance(int ell, int ellp) {
  if (ell < 2) throw std::invalid_argument("make_family_instance: ell must be >= 2");
  if (ellp < 1) throw std::invalid_argument("make_family_instance: ellp must be >= 1");
  FamilyInstance fi;
  fi.ell = ell;
  fi.ellp = ellp;
  fi.h = 1 << (ell - 1);
  fi.w = 1 << (ellp - 1);

  std::size_t n_nodes = static_cast<std::size_t>(fi.h) * fi.w          // bottom grid
                        + static_cast<std::size_t>(fi.w) * (fi.h - 1)  // tree internals
                        + (fi.w - 1);                                  // top-tree internals
  fi.g = Graph(n_nodes);
  fi.grid_pos.resize(n_nodes);
  fi.side_pos.resize(n_nodes);
  fi.col_pos.resize(n_nodes);
  fi.top_pos.resize(n_nodes);

  auto tag_edge = [&](NodeId u, NodeId v, Structure s) {
    auto e = fi.g.edge_between(u, v);
    EdgeId id = e ? *e : fi.g.add_edge(u, v);
    if (fi.edge_tags.size() <= id) fi.edge_tags.resize(id + 1, 0);
    fi.edge_tags[id] |= structure_bit(s);
  };

  // bottom grid
  for (int y = 0; y < fi.h; ++y)
    for (int x = 0; x < fi.w; ++x) {
      fi.grid_pos[fi.grid_at(x, y)] = {x, y};
      if (x + 1 < fi.w) tag_edge(fi.grid_at(x, y), fi.grid_at(x + 1, y), Structure::BottomGrid);
      if (y + 1 < fi.h) tag_edge(fi.grid_at(x, y), fi.grid_at(x, y + 1), Structure::BottomGrid);
    }

  // column trees (bottom layer ell-1 is the grid column)
  for (int t = 0; t < fi.w; ++t) {
    for (int l = 0; l < ell; ++l)
      for (int k = 0; k < (1 << l); ++k) fi.col_pos[fi.col_at(t, l, k)] = {t, l, k};
    for (int l = 1; l < ell; ++l) {
      for (int k = 0; k < (1 << l); ++k)
        tag_edge(fi.col_at(t, l - 1, k / 2), fi.col_at(t, l, k), Structure::ColTree);
      for (int k = 0; k + 1 < (1 << l); ++k)
        tag_edge(fi.col_at(t, l, k), fi.col_at(t, l, k + 1), Structure::ColTree);
    }
  }

  // side grid over the left-most spines; verticals coincide with the spine
  // parent edges, row 0 coincides with grid row 0
  for (int x = 0; x < fi.w; ++x)
    for (int y = 0; y < ell; ++y) {
      fi.side_pos[fi.side_at(x, y)] = {x, y};
      if (x + 1 < fi.w) tag_edge(fi.side_at(x, y), fi.side_at(x + 1, y), Structure::SideGrid);
      if (y + 1 < ell) tag_edge(fi.side_at(x, y), fi.side_at(x, y + 1), Structure::SideGrid);
    }

  // top tree (leaves are the column-tree roots)
  for (int l = 0; l < ellp; ++l)
    for (int k = 0; k < (1 << l); ++k) fi.top_pos[fi.top_at(l, k)] = {l, k};
  for (int l = 1; l < ellp; ++l) {
    for (int k = 0; k < (1 << l); ++k)
      tag_edge(fi.top_at(l - 1, k / 2), fi.top_at(l, k), Structure::TopTree);
    for (int k = 0; k + 1 < (1 << l); ++k)
      tag_edge(fi.top_at(l, k), fi.top_at(l, k + 1), Structure::TopTree);
  }

  fi.edge_tags.resize(fi.g.edge_count(), 0);
  return fi;
}

}  // namespace lclab
