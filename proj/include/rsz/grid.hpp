#ifndef RSZ_GRID_HPP
#define RSZ_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rsz/errors.hpp"

namespace rsz {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------------------
// Uniform tensor grid on [0,lx] x [0,ly], spacing h in both directions.
// Nodes are (i*h, j*h), i = 0..nx-1, j = 0..ny-1.
// ---------------------------------------------------------------------------
struct GridSpec {
  double lx = 0, ly = 0, h = 0;
  int nx = 0, ny = 0;
};

// Round len/h to the nearest integer cell count; reject if not within a 1e-12
// relative tolerance of an integer.
inline int cells_along(double len, double h, const char* axis) {
  double r = len / h;
  double n = std::nearbyint(r);
  if (n < 1 || std::abs(r - n) > 1e-12 * std::max(1.0, std::abs(r)))
    throw error(errc::non_conforming_grid,
                std::string("extent along ") + axis + " is not an integer multiple of h");
  return static_cast<int>(n);
}

inline GridSpec build_grid(double lx, double ly, double h) {
  if (!(h > 0) || !(lx > 0) || !(ly > 0))
    throw error(errc::non_conforming_grid, "extents and spacing must be positive");
  GridSpec g;
  g.lx = lx;
  g.ly = ly;
  g.h = h;
  g.nx = cells_along(lx, h, "x") + 1;
  g.ny = cells_along(ly, h, "y") + 1;
  if (g.nx < 3 || g.ny < 3)
    throw error(errc::non_conforming_grid, "grid needs at least two cells per direction");
  return g;
}

// ---------------------------------------------------------------------------
// Axis-aligned node-index rectangle [i0,i1] x [j0,j1], inclusive.
// ---------------------------------------------------------------------------
struct NodeRect {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

  int ncols() const { return i1 - i0 + 1; }
  int nrows() const { return j1 - j0 + 1; }
  int count() const { return ncols() * nrows(); }

  bool contains(int i, int j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
  bool contains(const NodeRect& o) const {
    return o.i0 >= i0 && o.i1 <= i1 && o.j0 >= j0 && o.j1 <= j1;
  }
  bool operator==(const NodeRect& o) const = default;

  // Row-major local index, bottom row first.
  int local(int i, int j) const { return (j - j0) * ncols() + (i - i0); }
};

inline NodeRect full_rect(const GridSpec& g) { return {0, g.nx - 1, 0, g.ny - 1}; }

// Boundary nodes of a rect in canonical order: counterclockwise from the
// lower-left corner, each corner listed once.  Bottom row left to right, right
// column bottom to top, top row right to left, left column top to bottom.
inline std::vector<std::pair<int, int>> boundary_nodes(const NodeRect& r) {
  if (r.ncols() < 2 || r.nrows() < 2)
    throw error(errc::non_conforming_grid, "boundary walk needs a 2x2 rect or larger");
  std::vector<std::pair<int, int>> out;
  out.reserve(2 * (r.ncols() + r.nrows()) - 4);
  for (int i = r.i0; i <= r.i1; ++i) out.emplace_back(i, r.j0);
  for (int j = r.j0 + 1; j <= r.j1; ++j) out.emplace_back(r.i1, j);
  for (int i = r.i1 - 1; i >= r.i0; --i) out.emplace_back(i, r.j1);
  for (int j = r.j1 - 1; j >= r.j0 + 1; --j) out.emplace_back(r.i0, j);
  return out;
}

// ---------------------------------------------------------------------------
// Nodal scalar field over a rect, row-major bottom row first.
// ---------------------------------------------------------------------------
struct GridFunction {
  NodeRect rect;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const NodeRect& r) : rect(r), values(r.count(), 0.0) {}

  double& at(int i, int j) { return values[rect.local(i, j)]; }
  double at(int i, int j) const { return values[rect.local(i, j)]; }
};

// ---------------------------------------------------------------------------
// Coefficient field a(x,y).  Either the built-in oscillatory medium with
// contrast scale epsilon, or a piecewise-constant raster.
// ---------------------------------------------------------------------------
struct MediaField {
  enum class Kind { builtin_oscillatory, raster };
  Kind kind = Kind::builtin_oscillatory;
  double epsilon = 0;

  // Raster payload: cells_x * cells_y values, row-major, bottom row first,
  // covering [x0,x1] x [y0,y1].
  int cells_x = 0, cells_y = 0;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  std::vector<double> cells;

  // Uniform bounds 0 < alpha <= a <= beta, set by finalize_media_bounds.
  double alpha = 0, beta = 0;
};

inline MediaField builtin_media(double epsilon) {
  if (!(epsilon > 0)) throw error(errc::config_error, "epsilon must be positive");
  MediaField m;
  m.kind = MediaField::Kind::builtin_oscillatory;
  m.epsilon = epsilon;
  return m;
}

inline MediaField raster_media(int ncx, int ncy, double x0, double y0, double x1, double y1,
                               std::vector<double> cells) {
  if (ncx < 1 || ncy < 1 || !(x1 > x0) || !(y1 > y0))
    throw error(errc::parse_error, "raster needs positive cell counts and extent");
  if (static_cast<long long>(ncx) * ncy != static_cast<long long>(cells.size()))
    throw error(errc::parse_error, "raster cell count does not match header");
  for (double v : cells) {
    if (!std::isfinite(v)) throw error(errc::parse_error, "raster cell value not finite");
    if (!(v > 0)) throw error(errc::non_positive_media, "raster cell value not positive");
  }
  MediaField m;
  m.kind = MediaField::Kind::raster;
  m.cells_x = ncx;
  m.cells_y = ncy;
  m.x0 = x0;
  m.y0 = y0;
  m.x1 = x1;
  m.y1 = y1;
  m.cells = std::move(cells);
  return m;
}

// Text format: header `RASTER <ncx> <ncy> <x0> <y0> <x1> <y1>` followed by
// ncx*ncy whitespace-separated values, row-major, bottom row first.
inline MediaField load_raster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_error, "cannot open raster file " + path);
  std::string magic;
  in >> magic;
  if (magic != "RASTER") throw error(errc::parse_error, "raster file missing RASTER header");
  long long ncx = 0, ncy = 0;
  double x0, y0, x1, y1;
  if (!(in >> ncx >> ncy >> x0 >> y0 >> x1 >> y1))
    throw error(errc::parse_error, "malformed raster header");
  if (ncx < 1 || ncy < 1 || ncx * ncy > (1LL << 28))
    throw error(errc::parse_error, "unreasonable raster dimensions");
  std::vector<double> cells(static_cast<size_t>(ncx * ncy));
  for (auto& v : cells)
    if (!(in >> v)) throw error(errc::parse_error, "raster file truncated");
  double extra;
  if (in >> extra) throw error(errc::parse_error, "raster file has trailing values");
  return raster_media(static_cast<int>(ncx), static_cast<int>(ncy), x0, y0, x1, y1,
                      std::move(cells));
}

// Built-in rough medium: oscillations at scale epsilon in both directions plus
// an O(1) background modulation.  Positive for any epsilon since every
// numerator/denominator stays within [0.2, 3.8].
inline double builtin_media_eval(double eps, double x, double y) {
  double t1 = (2.0 + 1.8 * std::sin(kPi * x / eps)) / (2.0 + 1.8 * std::cos(kPi * y / eps));
  double t2 = (2.0 + std::sin(kPi * y / eps)) / (2.0 + 1.8 * std::sin(kPi * x));
  return t1 + t2;
}

inline double media_eval(const MediaField& m, double x, double y) {
  if (m.kind == MediaField::Kind::builtin_oscillatory)
    return builtin_media_eval(m.epsilon, x, y);

  double tol_x = 1e-12 * (m.x1 - m.x0);
  double tol_y = 1e-12 * (m.y1 - m.y0);
  if (x < m.x0 - tol_x || x > m.x1 + tol_x || y < m.y0 - tol_y || y > m.y1 + tol_y)
    throw error(errc::out_of_domain, "point outside raster extent");

  // Piecewise-constant lookup; a point exactly on a cell boundary takes the
  // lower-index cell.
  auto cell_of = [](double v, double lo, double hi, int ncells) {
    double t = (v - lo) / (hi - lo) * ncells;
    int ix = static_cast<int>(std::floor(t));
    if (t == static_cast<double>(ix) && ix > 0) --ix;
    return std::clamp(ix, 0, ncells - 1);
  };
  int ix = cell_of(x, m.x0, m.x1, m.cells_x);
  int iy = cell_of(y, m.y0, m.y1, m.cells_y);
  return m.cells[static_cast<size_t>(iy) * m.cells_x + ix];
}

// Edge coefficient of the 5-point flux stencil: the medium sampled at the
// midpoint of the edge joining two adjacent nodes.  Symmetric in the endpoint
// order because the midpoint is.
inline double edge_coefficient(const MediaField& m, const GridSpec& g, int ia, int ja, int ib,
                               int jb) {
  int di = std::abs(ia - ib), dj = std::abs(ja - jb);
  if (di + dj != 1)
    throw error(errc::non_conforming_grid, "edge endpoints must be adjacent nodes");
  double mx = 0.5 * (ia + ib) * g.h;
  double my = 0.5 * (ja + jb) * g.h;
  return media_eval(m, mx, my);
}

// Fill alpha/beta.  Builtin media are bounded by sampling every edge midpoint
// of the grid (the only points the discretization ever evaluates); raster
// media take exact cell extrema.
inline void finalize_media_bounds(MediaField& m, const GridSpec& g) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (m.kind == MediaField::Kind::raster) {
    for (double v : m.cells) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  } else {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i + 1 < g.nx; ++i) {
        double v = media_eval(m, (i + 0.5) * g.h, j * g.h);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    for (int j = 0; j + 1 < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double v = media_eval(m, i * g.h, (j + 0.5) * g.h);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  if (!(lo > 0))
    throw error(errc::non_positive_media, "media not uniformly positive on the grid");
  m.alpha = lo;
  m.beta = hi;
}

}  // namespace rsz

#endif
