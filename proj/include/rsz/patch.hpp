#ifndef RSZ_PATCH_HPP
#define RSZ_PATCH_HPP

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "rsz/banded.hpp"
#include "rsz/dense.hpp"
#include "rsz/grid.hpp"

namespace rsz {

// Dirichlet data on a patch boundary, canonical counterclockwise order.
struct BoundaryTrace {
  int patch_id = 0;
  std::vector<double> values;
};

// Nodal values over a patch's confine rect, row-major bottom row first.
struct InteriorField {
  int patch_id = 0;
  std::vector<double> values;
};

// ---------------------------------------------------------------------------
// Discrete elliptic operator -div(a grad .) on one rectangular patch with the
// 5-point finite-volume stencil, a sampled at edge midpoints.  Holds the
// factored interior block A, the interior/boundary coupling B, and the
// selection maps onto the confine rect.
// ---------------------------------------------------------------------------
class PatchOperator {
 public:
  int patch_id = 0;
  NodeRect rect;
  NodeRect confine;
  int n_interior = 0, n_boundary = 0, n_confine = 0;

  // local row-major node id -> ordinal in the interior/boundary numbering
  std::vector<int> interior_of_local, boundary_of_local;
  std::vector<int> interior_local;               // interior ordinal -> local id
  std::vector<std::pair<int, int>> boundary_ij;  // boundary ordinal -> global (i,j)

  // confine position -> source ordinal, split by node class
  std::vector<std::pair<int, int>> conf_interior, conf_boundary;

  BandedSPD chol;  // factored interior block
  struct Coupling {
    int it, bd;
    double v;
  };
  std::vector<Coupling> couplings;  // B in triplets (always negative values)

  mutable std::uint64_t solve_count = 0;  // banded solves performed through this operator
};

// Assemble and factor the patch operator.  The interior unknowns are ordered
// with the shorter patch dimension fastest so the Cholesky bandwidth equals
// the node count of that dimension.
inline PatchOperator assemble_patch(const GridSpec& g, const MediaField& m, const NodeRect& rect,
                                    const NodeRect& confine, int patch_id = 0) {
  if (!full_rect(g).contains(rect))
    throw error(errc::non_conforming_grid, "patch rect outside the grid");
  if (rect.ncols() < 3 || rect.nrows() < 3)
    throw error(errc::non_conforming_grid, "patch needs at least 3 nodes per side");
  if (!rect.contains(confine))
    throw error(errc::non_conforming_grid, "confine rect not inside the patch");

  PatchOperator op;
  op.patch_id = patch_id;
  op.rect = rect;
  op.confine = confine;

  const int ncols = rect.ncols(), nrows = rect.nrows();
  const int nix = ncols - 2, niy = nrows - 2;
  const bool y_fast = niy <= nix;
  const int bw = y_fast ? niy : nix;

  op.n_interior = nix * niy;
  op.interior_of_local.assign(rect.count(), -1);
  op.boundary_of_local.assign(rect.count(), -1);
  op.interior_local.resize(op.n_interior);

  auto interior_ordinal = [&](int li, int lj) {
    // li = 1..nix, lj = 1..niy are offsets from the patch corner
    return y_fast ? (li - 1) * niy + (lj - 1) : (lj - 1) * nix + (li - 1);
  };
  for (int lj = 1; lj <= niy; ++lj)
    for (int li = 1; li <= nix; ++li) {
      int ord = interior_ordinal(li, lj);
      int local = lj * ncols + li;
      op.interior_of_local[local] = ord;
      op.interior_local[ord] = local;
    }

  auto bnodes = boundary_nodes(rect);
  op.n_boundary = static_cast<int>(bnodes.size());
  op.boundary_ij = bnodes;
  for (int b = 0; b < op.n_boundary; ++b) {
    auto [i, j] = bnodes[b];
    op.boundary_of_local[rect.local(i, j)] = b;
  }

  // 5-point assembly; every interior node visits its four incident edges, so
  // the diagonal accumulates all of them while each off-diagonal pair is
  // entered once (from the lower ordinal side).
  op.chol = BandedSPD(op.n_interior, bw);
  const double inv_h2 = 1.0 / (g.h * g.h);
  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  for (int lj = 1; lj <= niy; ++lj)
    for (int li = 1; li <= nix; ++li) {
      int ord = interior_ordinal(li, lj);
      int gi = rect.i0 + li, gj = rect.j0 + lj;
      for (int e = 0; e < 4; ++e) {
        int ni = gi + di[e], nj = gj + dj[e];
        double ae = edge_coefficient(m, g, gi, gj, ni, nj) * inv_h2;
        op.chol.add(ord, ord, ae);
        int nlocal = rect.local(ni, nj);
        int nord = op.interior_of_local[nlocal];
        if (nord >= 0) {
          if (nord < ord) op.chol.add(ord, nord, -ae);
        } else {
          op.couplings.push_back({ord, op.boundary_of_local[nlocal], -ae});
        }
      }
    }
  op.chol.factor();

  // classify confine nodes once; scatter/gather lists drive R and R^T
  op.n_confine = confine.count();
  for (int j = confine.j0; j <= confine.j1; ++j)
    for (int i = confine.i0; i <= confine.i1; ++i) {
      int pos = confine.local(i, j);
      int local = rect.local(i, j);
      if (int ord = op.interior_of_local[local]; ord >= 0)
        op.conf_interior.emplace_back(pos, ord);
      else
        op.conf_boundary.emplace_back(pos, op.boundary_of_local[local]);
    }
  return op;
}

namespace detail {

// interior solution of A u = -B f
inline std::vector<double> interior_from_trace(const PatchOperator& op,
                                               const std::vector<double>& f) {
  std::vector<double> u(op.n_interior, 0.0);
  for (const auto& c : op.couplings) u[c.it] -= c.v * f[c.bd];
  op.chol.solve(u);
  ++op.solve_count;
  return u;
}

// interior solution of A v = R^T g
inline std::vector<double> interior_from_confined(const PatchOperator& op,
                                                  const std::vector<double>& gvals) {
  std::vector<double> v(op.n_interior, 0.0);
  for (auto [pos, ord] : op.conf_interior) v[ord] = gvals[pos];
  op.chol.solve(v);
  ++op.solve_count;
  return v;
}

inline void check_trace(const PatchOperator& op, const BoundaryTrace& f) {
  if (static_cast<int>(f.values.size()) != op.n_boundary)
    throw error(errc::config_error, "boundary trace length does not match the patch");
  for (double v : f.values)
    if (!std::isfinite(v)) throw error(errc::config_error, "boundary trace value not finite");
}

inline void check_confined(const PatchOperator& op, const InteriorField& gf) {
  if (static_cast<int>(gf.values.size()) != op.n_confine)
    throw error(errc::config_error, "confined field length does not match the patch");
}

}  // namespace detail

// Harmonic-type extension: solve the patch Dirichlet problem with trace f and
// return the full nodal field over the patch rect.
inline GridFunction solve_dirichlet(const PatchOperator& op, const BoundaryTrace& f) {
  detail::check_trace(op, f);
  auto u = detail::interior_from_trace(op, f.values);
  GridFunction out(op.rect);
  for (int b = 0; b < op.n_boundary; ++b) {
    auto [i, j] = op.boundary_ij[b];
    out.at(i, j) = f.values[b];
  }
  for (int ord = 0; ord < op.n_interior; ++ord) out.values[op.interior_local[ord]] = u[ord];
  return out;
}

// Restrict a patch field onto the confine rect.
inline InteriorField confine_field(const PatchOperator& op, const GridFunction& u) {
  if (!u.rect.contains(op.confine))
    throw error(errc::config_error, "field does not cover the confine rect");
  InteriorField out;
  out.patch_id = op.patch_id;
  out.values.resize(op.n_confine);
  for (int j = op.confine.j0; j <= op.confine.j1; ++j)
    for (int i = op.confine.i0; i <= op.confine.i1; ++i)
      out.values[op.confine.local(i, j)] = u.at(i, j);
  return out;
}

// Solve A v = R^T g with zero boundary values; the volume-source half of the
// adjoint identity.
inline GridFunction solve_sourced(const PatchOperator& op, const InteriorField& g) {
  detail::check_confined(op, g);
  auto v = detail::interior_from_confined(op, g.values);
  GridFunction out(op.rect);
  for (int ord = 0; ord < op.n_interior; ++ord) out.values[op.interior_local[ord]] = v[ord];
  return out;
}

// Exact transpose of the confined solution map: S^T g = -B^T A^{-1} R_int^T g
// plus the direct injection R_b^T g for confine nodes lying on the patch
// boundary.  One banded solve per call.
inline BoundaryTrace adjoint_apply(const PatchOperator& op, const InteriorField& g) {
  detail::check_confined(op, g);
  auto v = detail::interior_from_confined(op, g.values);
  BoundaryTrace out;
  out.patch_id = op.patch_id;
  out.values.assign(op.n_boundary, 0.0);
  for (const auto& c : op.couplings) out.values[c.bd] -= c.v * v[c.it];
  for (auto [pos, bd] : op.conf_boundary) out.values[bd] += g.values[pos];
  return out;
}

enum class MapKind { full, confined };

// Dense matrix of the (confined) solution map, one Dirichlet solve per
// boundary node.  `rows` optionally selects a subset of confine positions.
inline Matrix materialize(const PatchOperator& op, MapKind kind,
                          const std::vector<int>* rows = nullptr) {
  if (rows && kind != MapKind::confined)
    throw error(errc::config_error, "row selection only applies to the confined map");
  int m = kind == MapKind::full ? op.rect.count() : op.n_confine;
  if (rows) m = static_cast<int>(rows->size());
  Matrix out(m, op.n_boundary);
  BoundaryTrace e;
  e.patch_id = op.patch_id;
  e.values.assign(op.n_boundary, 0.0);
  for (int b = 0; b < op.n_boundary; ++b) {
    e.values[b] = 1.0;
    GridFunction u = solve_dirichlet(op, e);
    e.values[b] = 0.0;
    double* c = out.col(b);
    if (kind == MapKind::full) {
      for (int r = 0; r < m; ++r) c[r] = u.values[r];
    } else {
      InteriorField s = confine_field(op, u);
      if (rows)
        for (int r = 0; r < m; ++r) c[r] = s.values[(*rows)[r]];
      else
        for (int r = 0; r < m; ++r) c[r] = s.values[r];
    }
  }
  return out;
}

}  // namespace rsz

#endif
