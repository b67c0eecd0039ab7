#ifndef RSZ_SOLVER_HPP
#define RSZ_SOLVER_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rsz/fingerprint.hpp"
#include "rsz/grid.hpp"
#include "rsz/layout.hpp"
#include "rsz/lowrank.hpp"
#include "rsz/patch.hpp"

namespace rsz {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Everything one experiment needs: grid, media, decomposition, partition of
// unity, boundary data, assembled patch operators, and the content identity
// that compressed maps are checked against.
// ---------------------------------------------------------------------------
struct SchwarzContext {
  GridSpec grid;
  MediaField media;
  Layout layout;
  PartitionOfUnity pou;
  DirichletData bc;
  std::vector<PatchOperator> patches;
  Fingerprint fingerprint{};
};

inline SchwarzContext build_context(const GridSpec& g, MediaField media, int n_patches,
                                    double patch_width, double stride, DirichletData bc) {
  SchwarzContext ctx;
  ctx.grid = g;
  finalize_media_bounds(media, g);
  ctx.media = std::move(media);
  ctx.layout = build_layout(g, n_patches, patch_width, stride);
  ctx.pou = build_pou(ctx.layout);
  ctx.bc = std::move(bc);
  ctx.patches.reserve(n_patches);
  for (int p = 0; p < n_patches; ++p)
    ctx.patches.push_back(
        assemble_patch(g, ctx.media, patch_rect(ctx.layout, p), confine_rect(ctx.layout, p), p));
  ctx.fingerprint = config_fingerprint(ctx.grid, ctx.media, ctx.layout);
  return ctx;
}

// Whole-domain direct solve: the independent oracle.  The domain is treated as
// one big patch whose boundary trace is the global Dirichlet data.
inline GridFunction solve_global(const GridSpec& g, const MediaField& m, const DirichletData& b) {
  PatchOperator op = assemble_patch(g, m, full_rect(g), full_rect(g), -1);
  BoundaryTrace f;
  f.patch_id = -1;
  f.values.reserve(op.n_boundary);
  for (auto [i, j] : op.boundary_ij) f.values.push_back(boundary_value(b, g, i, j));
  return solve_dirichlet(op, f);
}

inline double relative_error(const GridFunction& u, const GridFunction& ref) {
  if (!(u.rect == ref.rect))
    throw error(errc::config_error, "relative_error needs fields on the same rect");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i) {
    double d = u.values[i] - ref.values[i];
    num += d * d;
    den += ref.values[i] * ref.values[i];
  }
  if (den == 0.0) throw error(errc::zero_reference, "reference field is identically zero");
  return std::sqrt(num / den);
}

enum class Method { vanilla, reduced, global };

struct RunResult {
  Method method = Method::vanilla;
  int iterations = 0;
  // History rows cover t = 0..iterations: rel_error against the supplied
  // reference, and the successive-iterate difference (NaN at t = 0).
  std::vector<double> rel_error;
  std::vector<double> succ_diff;
  GridFunction final_field;
  double offline_seconds = 0, online_seconds = 0, reconstruct_seconds = 0;
  std::uint64_t loop_solves = 0;  // exact patch solves during the iteration loop
  std::vector<BoundaryState> states;  // filled when record_states is set
};

struct RunOptions {
  bool track_history = false;
  const GridFunction* reference = nullptr;  // needed for the rel_error column
  bool record_states = false;
  bool early_exit = false;  // stop when the successive difference < 1e-14 (tracked runs only)
};

namespace detail {

inline std::uint64_t total_patch_solves(const SchwarzContext& ctx) {
  std::uint64_t s = 0;
  for (const auto& op : ctx.patches) s += op.solve_count;
  return s;
}

// relative successive difference ||u - v|| / ||u||
inline double successive_diff(const GridFunction& u, const GridFunction& v) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i) {
    double d = u.values[i] - v.values[i];
    num += d * d;
    den += u.values[i] * u.values[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

struct HistoryRecorder {
  const RunOptions& opts;
  RunResult& rr;
  GridFunction prev;
  bool have_prev = false;

  void record(const GridFunction& global) {
    if (opts.reference) rr.rel_error.push_back(relative_error(global, *opts.reference));
    rr.succ_diff.push_back(have_prev ? successive_diff(global, prev)
                                     : std::numeric_limits<double>::quiet_NaN());
    prev = global;
    have_prev = true;
  }
  bool saturated() const {
    return opts.early_exit && have_prev && !rr.succ_diff.empty() &&
           rr.succ_diff.back() < 1e-14;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Vanilla Schwarz (Jacobi schedule): T sweeps of exact local solves with trace
// exchange, then a final sweep of solves assembled through the POU.
// ---------------------------------------------------------------------------
inline RunResult run_vanilla(const SchwarzContext& ctx, int T, const RunOptions& opts = {}) {
  if (T < 0) throw error(errc::config_error, "iteration count must be nonnegative");
  const int n = ctx.layout.n_patches;
  RunResult rr;
  rr.method = Method::vanilla;
  rr.iterations = T;
  detail::HistoryRecorder hist{opts, rr};

  BoundaryState state = init_state(ctx.layout, ctx.bc);
  if (opts.record_states) rr.states.push_back(state);

  std::vector<GridFunction> fields(n);
  std::vector<InteriorField> conf(n);
  std::uint64_t solves0 = detail::total_patch_solves(ctx);
  auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < T; ++t) {
    for (int p = 0; p < n; ++p) fields[p] = solve_dirichlet(ctx.patches[p], state.traces[p]);
    if (opts.track_history) {
      hist.record(assemble_global(ctx.layout, ctx.pou, fields));
      if (hist.saturated()) {
        rr.iterations = t;
        rr.final_field = hist.prev;
        rr.online_seconds = seconds_since(t0);
        rr.loop_solves = detail::total_patch_solves(ctx) - solves0;
        return rr;
      }
    }
    for (int p = 0; p < n; ++p) conf[p] = confine_field(ctx.patches[p], fields[p]);
    state = exchange(ctx.layout, conf, state);
    if (opts.record_states) rr.states.push_back(state);
  }
  rr.online_seconds = seconds_since(t0);
  rr.loop_solves = detail::total_patch_solves(ctx) - solves0;

  auto tr = std::chrono::steady_clock::now();
  for (int p = 0; p < n; ++p) fields[p] = solve_dirichlet(ctx.patches[p], state.traces[p]);
  rr.final_field = assemble_global(ctx.layout, ctx.pou, fields);
  rr.reconstruct_seconds = seconds_since(tr);
  if (opts.track_history) hist.record(rr.final_field);
  return rr;
}

// Schwarz reference protocol: vanilla with T = 100.
inline GridFunction reference_solution(const SchwarzContext& ctx) {
  return run_vanilla(ctx, 100).final_field;
}

// ---------------------------------------------------------------------------
// Offline stage: one randomized SVD of the confined solution map per patch,
// driven matrix-free through the patch's Dirichlet solve and its adjoint.
// ---------------------------------------------------------------------------
struct ReducedMap {
  int patch_id = 0;
  SVDTriple triple;
  int k = 0;               // stored rank
  std::uint64_t seed = 0;  // per-patch sampling seed
  Fingerprint fingerprint{};
};

inline std::vector<ReducedMap> offline_compress(const SchwarzContext& ctx, int k, int p,
                                                std::uint64_t seed) {
  std::vector<ReducedMap> maps;
  maps.reserve(ctx.patches.size());
  for (const auto& op : ctx.patches) {
    RsvdConfig cfg;
    cfg.k = k;
    cfg.p = p;
    cfg.seed = seed ^ static_cast<std::uint64_t>(op.patch_id);
    auto apply = [&op](std::span<const double> f, std::span<double> out) {
      BoundaryTrace tr;
      tr.patch_id = op.patch_id;
      tr.values.assign(f.begin(), f.end());
      InteriorField s = confine_field(op, solve_dirichlet(op, tr));
      std::copy(s.values.begin(), s.values.end(), out.begin());
    };
    auto adjoint = [&op](std::span<const double> g, std::span<double> out) {
      InteriorField gf;
      gf.patch_id = op.patch_id;
      gf.values.assign(g.begin(), g.end());
      BoundaryTrace tr = adjoint_apply(op, gf);
      std::copy(tr.values.begin(), tr.values.end(), out.begin());
    };
    ReducedMap rm;
    rm.patch_id = op.patch_id;
    try {
      rm.triple = rsvd_operator(op.n_confine, op.n_boundary, apply, adjoint, cfg);
    } catch (const error& e) {
      if (e.code() == errc::adjoint_inconsistent)
        throw error(errc::adjoint_inconsistent,
                    "patch " + std::to_string(op.patch_id) + ": " + e.what());
      throw;
    }
    rm.k = rm.triple.rank();
    rm.seed = cfg.seed;
    rm.fingerprint = ctx.fingerprint;
    maps.push_back(std::move(rm));
  }
  return maps;
}

namespace detail {

// Confine positions neighbors read from patch p during exchange: one column of
// rows j = 1..ny-2 per demanded edge, columns ascending.  Also the row set of
// the boundary-to-boundary map A.
inline std::vector<int> export_columns(const Layout& l, int p) {
  std::vector<int> cols;
  for (int q = 0; q < l.n_patches; ++q) {
    if (q != p) {
      if (l.left_owner[q] == p) cols.push_back(l.col_lo[q]);
      if (l.right_owner[q] == p) cols.push_back(l.col_hi[q]);
    }
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

inline std::vector<int> export_confine_positions(const Layout& l, int p) {
  NodeRect cr = confine_rect(l, p);
  std::vector<int> pos;
  for (int col : export_columns(l, p))
    for (int j = 1; j <= l.grid.ny - 2; ++j) pos.push_back(cr.local(col, j));
  return pos;
}

inline const ReducedMap& map_for_patch(const std::vector<ReducedMap>& maps, int p) {
  const ReducedMap* found = nullptr;
  for (const auto& m : maps)
    if (m.patch_id == p) {
      if (found) throw error(errc::config_error, "duplicate reduced map for a patch");
      found = &m;
    }
  if (!found)
    throw error(errc::config_error, "missing reduced map for patch " + std::to_string(p));
  return *found;
}

inline void check_maps(const SchwarzContext& ctx, const std::vector<ReducedMap>& maps) {
  for (int p = 0; p < ctx.layout.n_patches; ++p) {
    const ReducedMap& m = map_for_patch(maps, p);
    if (m.fingerprint != ctx.fingerprint)
      throw error(errc::fingerprint_mismatch,
                  "archive does not match this configuration: " +
                      fingerprint_mismatch_detail(m.fingerprint, ctx.fingerprint));
    const PatchOperator& op = ctx.patches[p];
    if (m.triple.u.rows() != op.n_confine || m.triple.v.rows() != op.n_boundary ||
        m.triple.u.cols() != m.triple.rank() || m.triple.v.cols() != m.triple.rank())
      throw error(errc::config_error,
                  "reduced map dimensions do not match patch " + std::to_string(p));
  }
}

// low-rank confined field U diag(s) V^T f
inline InteriorField lowrank_apply(const PatchOperator& op, const ReducedMap& m,
                                   const std::vector<double>& f) {
  int r = m.triple.rank();
  std::vector<double> w(r);
  matvec_t(m.triple.v, f, w);
  for (int c = 0; c < r; ++c) w[c] *= m.triple.s[c];
  InteriorField out;
  out.patch_id = op.patch_id;
  out.values.resize(op.n_confine);
  matvec(m.triple.u, w, out.values);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Online stage.  The untracked path runs the iteration with per-patch blocks
// C = (rows of U at exported positions) diag(s) (rows of V at updated
// positions)^T and constant part c0 from the pinned boundary data; this is the
// rank-k product with the fixed/variable split of f precomputed, touching no
// factorization.  The tracked path applies U diag(s) V^T literally and adds
// exact solves per iteration for the error history (never timed).
// ---------------------------------------------------------------------------
inline RunResult run_reduced(const SchwarzContext& ctx, const std::vector<ReducedMap>& maps,
                             int T, const RunOptions& opts = {}) {
  if (T < 0) throw error(errc::config_error, "iteration count must be nonnegative");
  detail::check_maps(ctx, maps);
  const int n = ctx.layout.n_patches;
  const Layout& l = ctx.layout;
  RunResult rr;
  rr.method = Method::reduced;
  rr.iterations = T;
  detail::HistoryRecorder hist{opts, rr};

  BoundaryState state0 = init_state(l, ctx.bc);

  if (opts.track_history || opts.record_states) {
    BoundaryState state = state0;
    if (opts.record_states) rr.states.push_back(state);
    std::vector<GridFunction> fields(n);
    std::vector<InteriorField> conf(n);
    for (int t = 0; t < T; ++t) {
      if (opts.track_history) {
        for (int p = 0; p < n; ++p)
          fields[p] = solve_dirichlet(ctx.patches[p], state.traces[p]);
        hist.record(assemble_global(l, ctx.pou, fields));
        if (hist.saturated()) {
          rr.iterations = t;
          rr.final_field = hist.prev;
          return rr;
        }
      }
      for (int p = 0; p < n; ++p)
        conf[p] = detail::lowrank_apply(ctx.patches[p],
                                        detail::map_for_patch(maps, p), state.traces[p].values);
      state = exchange(l, conf, state);
      if (opts.record_states) rr.states.push_back(state);
    }
    for (int p = 0; p < n; ++p) fields[p] = solve_dirichlet(ctx.patches[p], state.traces[p]);
    rr.final_field = assemble_global(l, ctx.pou, fields);
    if (opts.track_history) hist.record(rr.final_field);
    return rr;
  }

  // ---- untracked fast path ----
  struct Import {
    int owner, src_off, dst_off, len;
  };
  struct FastPatch {
    int nv = 0, ne = 0;
    std::vector<double> c;   // row-major ne x nv
    std::vector<double> c0;  // ne
    std::vector<Import> imports;
    std::vector<int> var_pos;  // trace positions of the variable entries
  };
  const int nrow = l.grid.ny - 2;
  std::vector<FastPatch> fp(n);
  std::vector<std::vector<int>> exp_cols(n);
  for (int p = 0; p < n; ++p) exp_cols[p] = detail::export_columns(l, p);
  auto export_offset = [&](int owner, int col) {
    for (size_t c = 0; c < exp_cols[owner].size(); ++c)
      if (exp_cols[owner][c] == col) return static_cast<int>(c) * nrow;
    throw error(errc::missing_owner, "demanded column is not exported by its owner");
  };

  for (int p = 0; p < n; ++p) {
    const ReducedMap& m = detail::map_for_patch(maps, p);
    const PatchOperator& op = ctx.patches[p];
    const int r = m.triple.rank();
    FastPatch& f = fp[p];

    if (l.col_lo[p] > 0)
      for (int j = 1; j <= nrow; ++j) f.var_pos.push_back(l.left_edge_pos[p][j - 1]);
    if (l.col_hi[p] < l.grid.nx - 1)
      for (int j = 1; j <= nrow; ++j) f.var_pos.push_back(l.right_edge_pos[p][j - 1]);
    f.nv = static_cast<int>(f.var_pos.size());

    std::vector<int> erows = detail::export_confine_positions(l, p);
    f.ne = static_cast<int>(erows.size());

    // y_fix = V^T f0; the variable entries of f0 are zero by construction
    std::vector<double> yfix(r);
    matvec_t(m.triple.v, state0.traces[p].values, yfix);

    // E = U[erows, :] diag(s)
    Matrix e(f.ne, r);
    for (int c = 0; c < r; ++c)
      for (int i = 0; i < f.ne; ++i) e(i, c) = m.triple.u(erows[i], c) * m.triple.s[c];

    f.c0.resize(f.ne);
    matvec(e, yfix, f.c0);

    f.c.assign(static_cast<size_t>(f.ne) * f.nv, 0.0);
    for (int i = 0; i < f.ne; ++i)
      for (int c = 0; c < r; ++c) {
        double ec = e(i, c);
        double* row = f.c.data() + static_cast<size_t>(i) * f.nv;
        for (int v = 0; v < f.nv; ++v) row[v] += ec * m.triple.v(f.var_pos[v], c);
      }

    int dst = 0;
    if (l.col_lo[p] > 0) {
      f.imports.push_back({l.left_owner[p], export_offset(l.left_owner[p], l.col_lo[p]), dst, nrow});
      dst += nrow;
    }
    if (l.col_hi[p] < l.grid.nx - 1)
      f.imports.push_back(
          {l.right_owner[p], export_offset(l.right_owner[p], l.col_hi[p]), dst, nrow});
  }

  std::vector<std::vector<double>> fvar(n), fnew(n), out(n);
  for (int p = 0; p < n; ++p) {
    fvar[p].assign(fp[p].nv, 0.0);
    fnew[p].assign(fp[p].nv, 0.0);
    out[p].assign(fp[p].ne, 0.0);
  }

  std::uint64_t solves0 = detail::total_patch_solves(ctx);
  auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < T; ++t) {
    for (int p = 0; p < n; ++p) {
      const FastPatch& f = fp[p];
      const double* cm = f.c.data();
      for (int i = 0; i < f.ne; ++i, cm += f.nv) {
        double s = f.c0[i];
        const double* x = fvar[p].data();
        for (int v = 0; v < f.nv; ++v) s += cm[v] * x[v];
        out[p][i] = s;
      }
    }
    for (int p = 0; p < n; ++p)
      for (const auto& im : fp[p].imports)
        std::copy(out[im.owner].begin() + im.src_off, out[im.owner].begin() + im.src_off + im.len,
                  fnew[p].begin() + im.dst_off);
    fvar.swap(fnew);
  }
  rr.online_seconds = seconds_since(t0);
  rr.loop_solves = detail::total_patch_solves(ctx) - solves0;

  auto tr = std::chrono::steady_clock::now();
  BoundaryState state = state0;
  state.iteration = T;
  for (int p = 0; p < n; ++p)
    for (int v = 0; v < fp[p].nv; ++v) state.traces[p].values[fp[p].var_pos[v]] = fvar[p][v];
  std::vector<GridFunction> fields(n);
  for (int p = 0; p < n; ++p) fields[p] = solve_dirichlet(ctx.patches[p], state.traces[p]);
  rr.final_field = assemble_global(l, ctx.pou, fields);
  rr.reconstruct_seconds = seconds_since(tr);
  return rr;
}

// ---------------------------------------------------------------------------
// Singular spectra of the three per-patch operators (full map, confined map,
// boundary-to-boundary map) through the dense SVD oracle.
// ---------------------------------------------------------------------------
struct SpectrumResult {
  std::vector<double> s_full, s_conf, s_amap;
};

inline SpectrumResult spectrum(const SchwarzContext& ctx, int patch_id) {
  if (patch_id < 0 || patch_id >= ctx.layout.n_patches)
    throw error(errc::config_error,
                "patch_id must be in [0, " + std::to_string(ctx.layout.n_patches - 1) + "]");
  const PatchOperator& op = ctx.patches[patch_id];
  SpectrumResult sr;
  sr.s_full = dense_svd(materialize(op, MapKind::full)).s;
  sr.s_conf = dense_svd(materialize(op, MapKind::confined)).s;
  std::vector<int> rows = detail::export_confine_positions(ctx.layout, patch_id);
  sr.s_amap = dense_svd(materialize(op, MapKind::confined, &rows)).s;
  return sr;
}

}  // namespace rsz

#endif
