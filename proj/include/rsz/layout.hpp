#ifndef RSZ_LAYOUT_HPP
#define RSZ_LAYOUT_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "rsz/grid.hpp"
#include "rsz/patch.hpp"

namespace rsz {

// ---------------------------------------------------------------------------
// One-dimensional chain of vertical strips Omega_i = [lo_i, lo_i + width] x
// [0, ly], spaced by a uniform stride.  Interior intervals shrink by the
// overlap on any side that has a neighbor; end patches keep the domain edge.
// ---------------------------------------------------------------------------
struct Layout {
  GridSpec grid;
  int n_patches = 0;
  double patch_width = 0, stride = 0, overlap = 0;
  int w_cells = 0, s_cells = 0, ov_cells = 0;

  std::vector<int> col_lo, col_hi;          // patch column ranges (node indices)
  std::vector<int> int_col_lo, int_col_hi;  // interior (confine) column ranges
  std::vector<std::vector<int>> neighbors;  // patches with open-interval overlap
  std::vector<int> left_owner, right_owner; // patch whose interior holds our edge; -1 on domain boundary

  // canonical boundary-walk positions of the left/right edge nodes at rows
  // j = 1..ny-2, indexed by j-1; filled once at build time
  std::vector<std::vector<int>> left_edge_pos, right_edge_pos;
};

inline NodeRect patch_rect(const Layout& l, int p) {
  return {l.col_lo[p], l.col_hi[p], 0, l.grid.ny - 1};
}
inline NodeRect confine_rect(const Layout& l, int p) {
  return {l.int_col_lo[p], l.int_col_hi[p], 0, l.grid.ny - 1};
}

inline Layout build_layout(const GridSpec& g, int n_patches, double patch_width, double stride) {
  if (n_patches < 1) throw error(errc::non_conforming_layout, "need at least one patch");

  Layout l;
  l.grid = g;
  l.n_patches = n_patches;
  l.patch_width = patch_width;
  l.stride = stride;

  try {
    l.w_cells = cells_along(patch_width, g.h, "patch width");
    l.s_cells = n_patches > 1 ? cells_along(stride, g.h, "stride") : 0;
  } catch (const error& e) {
    throw error(errc::non_conforming_layout, e.what());
  }
  if (l.w_cells < 2)
    throw error(errc::non_conforming_layout, "patch width must cover at least two cells");
  if ((n_patches - 1) * l.s_cells + l.w_cells != g.nx - 1)
    throw error(errc::non_conforming_layout, "patches do not tile the domain width");
  l.ov_cells = n_patches > 1 ? l.w_cells - l.s_cells : 0;
  l.overlap = l.ov_cells * g.h;
  if (n_patches > 1 && l.ov_cells < 1)
    throw error(errc::non_conforming_layout, "adjacent patches must overlap");
  if (n_patches > 1 && 2 * l.s_cells < l.w_cells)
    throw error(errc::non_conforming_layout,
                "stride too small: non-adjacent patches would overlap");

  for (int p = 0; p < n_patches; ++p) {
    int lo = p * l.s_cells;
    l.col_lo.push_back(lo);
    l.col_hi.push_back(lo + l.w_cells);
    l.int_col_lo.push_back(lo + l.ov_cells);
    l.int_col_hi.push_back(lo + l.w_cells - l.ov_cells);
  }

  l.neighbors.resize(n_patches);
  for (int p = 0; p < n_patches; ++p)
    for (int q = 0; q < n_patches; ++q)
      if (q != p && std::max(l.col_lo[p], l.col_lo[q]) < std::min(l.col_hi[p], l.col_hi[q]))
        l.neighbors[p].push_back(q);

  // every shared patch edge must fall in exactly one neighbor's interior
  l.left_owner.assign(n_patches, -1);
  l.right_owner.assign(n_patches, -1);
  auto find_owner = [&](int p, int col) {
    int owner = -1;
    for (int q : l.neighbors[p])
      if (l.int_col_lo[q] <= col && col <= l.int_col_hi[q]) {
        if (owner >= 0)
          throw error(errc::non_conforming_layout, "patch edge owned by two interiors");
        owner = q;
      }
    return owner;
  };
  for (int p = 0; p < n_patches; ++p) {
    if (l.col_lo[p] > 0) l.left_owner[p] = find_owner(p, l.col_lo[p]);
    if (l.col_hi[p] < g.nx - 1) l.right_owner[p] = find_owner(p, l.col_hi[p]);
  }

  // positions of vertical-edge nodes in the canonical boundary walk
  l.left_edge_pos.resize(n_patches);
  l.right_edge_pos.resize(n_patches);
  for (int p = 0; p < n_patches; ++p) {
    NodeRect r = patch_rect(l, p);
    l.left_edge_pos[p].assign(g.ny - 2, -1);
    l.right_edge_pos[p].assign(g.ny - 2, -1);
    auto walk = boundary_nodes(r);
    for (int pos = 0; pos < static_cast<int>(walk.size()); ++pos) {
      auto [i, j] = walk[pos];
      if (j >= 1 && j <= g.ny - 2) {
        if (i == r.i0) l.left_edge_pos[p][j - 1] = pos;
        if (i == r.i1) l.right_edge_pos[p][j - 1] = pos;
      }
    }
  }
  return l;
}

// ---------------------------------------------------------------------------
// Piecewise-linear partition of unity: ramps across overlap bands, constant in
// y, one weight per patch node.
// ---------------------------------------------------------------------------
struct PartitionOfUnity {
  std::vector<std::vector<double>> eta;  // per patch, row-major over its rect
};

inline PartitionOfUnity build_pou(const Layout& l) {
  PartitionOfUnity pou;
  pou.eta.resize(l.n_patches);
  for (int p = 0; p < l.n_patches; ++p) {
    NodeRect r = patch_rect(l, p);
    bool has_left = l.col_lo[p] > 0, has_right = l.col_hi[p] < l.grid.nx - 1;
    std::vector<double> colw(r.ncols(), 1.0);
    for (int c = 0; c < r.ncols(); ++c) {
      if (has_left && c < l.ov_cells)
        colw[c] = static_cast<double>(c) / l.ov_cells;
      else if (has_right && c > l.w_cells - l.ov_cells)
        colw[c] = static_cast<double>(l.w_cells - c) / l.ov_cells;
    }
    auto& e = pou.eta[p];
    e.resize(r.count());
    for (int j = 0; j < r.nrows(); ++j)
      for (int c = 0; c < r.ncols(); ++c) e[j * r.ncols() + c] = colw[c];
  }
  return pou;
}

// ---------------------------------------------------------------------------
// Global Dirichlet data: built-in product-of-sines profile or values loaded
// from a boundary file.
// ---------------------------------------------------------------------------
struct DirichletData {
  enum class Kind { builtin_sine, from_file };
  Kind kind = Kind::builtin_sine;
  std::vector<double> node_values;  // nx*ny array; only boundary entries are used
};

inline double builtin_boundary_eval(double x, double y) {
  return std::sin(kPi / 3.0 * (x - 1.0 / 3.0)) * std::sin(3.0 * kPi * (y - 0.25));
}

inline bool on_domain_boundary(const GridSpec& g, int i, int j) {
  return i == 0 || i == g.nx - 1 || j == 0 || j == g.ny - 1;
}

inline DirichletData builtin_sine_data(const GridSpec& g) {
  DirichletData d;
  d.kind = DirichletData::Kind::builtin_sine;
  d.node_values.assign(static_cast<size_t>(g.nx) * g.ny, 0.0);
  for (auto [i, j] : boundary_nodes(full_rect(g)))
    d.node_values[static_cast<size_t>(j) * g.nx + i] = builtin_boundary_eval(i * g.h, j * g.h);
  return d;
}

// Text format: header `BND <n_nodes>` then index/value pairs, where the index
// is the node's position in the canonical boundary walk of the whole domain.
// Every boundary node must be covered exactly once.
inline DirichletData load_boundary(const std::string& path, const GridSpec& g) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_error, "cannot open boundary file " + path);
  std::string magic;
  in >> magic;
  if (magic != "BND") throw error(errc::parse_error, "boundary file missing BND header");
  long long n = 0;
  if (!(in >> n)) throw error(errc::parse_error, "malformed boundary header");
  auto walk = boundary_nodes(full_rect(g));
  if (n != static_cast<long long>(walk.size()))
    throw error(errc::parse_error, "boundary file node count does not match the grid");

  DirichletData d;
  d.kind = DirichletData::Kind::from_file;
  d.node_values.assign(static_cast<size_t>(g.nx) * g.ny, 0.0);
  std::vector<char> seen(walk.size(), 0);
  for (long long r = 0; r < n; ++r) {
    long long idx;
    double v;
    if (!(in >> idx >> v)) throw error(errc::parse_error, "boundary file truncated");
    if (idx < 0 || idx >= n) throw error(errc::parse_error, "boundary node index out of range");
    if (seen[idx]) throw error(errc::parse_error, "duplicate boundary node index");
    if (!std::isfinite(v)) throw error(errc::parse_error, "boundary value not finite");
    seen[idx] = 1;
    auto [i, j] = walk[idx];
    d.node_values[static_cast<size_t>(j) * g.nx + i] = v;
  }
  return d;
}

inline double boundary_value(const DirichletData& d, const GridSpec& g, int i, int j) {
  if (!on_domain_boundary(g, i, j))
    throw error(errc::config_error, "boundary lookup at an interior node");
  return d.node_values[static_cast<size_t>(j) * g.nx + i];
}

// ---------------------------------------------------------------------------
// Schwarz iteration state: one Dirichlet trace per patch.
// ---------------------------------------------------------------------------
struct BoundaryState {
  int iteration = 0;
  std::vector<BoundaryTrace> traces;
};

// Traces start as the global data b on physical boundary nodes and zero on the
// artificial vertical edges.
inline BoundaryState init_state(const Layout& l, const DirichletData& b) {
  BoundaryState st;
  st.traces.resize(l.n_patches);
  for (int p = 0; p < l.n_patches; ++p) {
    auto& tr = st.traces[p];
    tr.patch_id = p;
    auto walk = boundary_nodes(patch_rect(l, p));
    tr.values.resize(walk.size());
    for (size_t k = 0; k < walk.size(); ++k) {
      auto [i, j] = walk[k];
      tr.values[k] =
          on_domain_boundary(l.grid, i, j) ? boundary_value(b, l.grid, i, j) : 0.0;
    }
  }
  return st;
}

// Jacobi exchange: every patch's artificial edge is overwritten with the
// owning neighbor's confined field at that column.  Physical boundary rows
// (j = 0 and j = ny-1) are never touched, so the pinned data persists.
inline BoundaryState exchange(const Layout& l, const std::vector<InteriorField>& fields,
                              const BoundaryState& st) {
  if (static_cast<int>(fields.size()) != l.n_patches ||
      static_cast<int>(st.traces.size()) != l.n_patches)
    throw error(errc::config_error, "exchange needs one field and one trace per patch");

  BoundaryState out = st;
  out.iteration = st.iteration + 1;
  for (int p = 0; p < l.n_patches; ++p) {
    auto pull = [&](int owner, int col, const std::vector<int>& pos) {
      if (owner < 0) throw error(errc::missing_owner, "patch edge has no owning interior");
      NodeRect cr = confine_rect(l, owner);
      if (static_cast<int>(fields[owner].values.size()) != cr.count())
        throw error(errc::config_error, "confined field length mismatch in exchange");
      for (int j = 1; j <= l.grid.ny - 2; ++j)
        out.traces[p].values[pos[j - 1]] = fields[owner].values[cr.local(col, j)];
    };
    if (l.col_lo[p] > 0) pull(l.left_owner[p], l.col_lo[p], l.left_edge_pos[p]);
    if (l.col_hi[p] < l.grid.nx - 1) pull(l.right_owner[p], l.col_hi[p], l.right_edge_pos[p]);
  }
  return out;
}

// Glue patch fields into one global field with the partition of unity.
inline GridFunction assemble_global(const Layout& l, const PartitionOfUnity& pou,
                                    const std::vector<GridFunction>& fields) {
  if (static_cast<int>(fields.size()) != l.n_patches)
    throw error(errc::config_error, "assemble_global needs one field per patch");
  GridFunction out(full_rect(l.grid));
  for (int p = 0; p < l.n_patches; ++p) {
    NodeRect r = patch_rect(l, p);
    if (!(fields[p].rect == r))
      throw error(errc::config_error, "patch field rect mismatch in assemble_global");
    const auto& e = pou.eta[p];
    for (int j = 0; j < r.nrows(); ++j) {
      double* dst = out.values.data() + static_cast<size_t>(j + r.j0) * l.grid.nx + r.i0;
      const double* src = fields[p].values.data() + static_cast<size_t>(j) * r.ncols();
      const double* w = e.data() + static_cast<size_t>(j) * r.ncols();
      for (int c = 0; c < r.ncols(); ++c) dst[c] += w[c] * src[c];
    }
  }
  return out;
}

}  // namespace rsz

#endif
