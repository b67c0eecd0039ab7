#ifndef RSZ_COMMANDS_HPP
#define RSZ_COMMANDS_HPP

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "rsz/archive.hpp"
#include "rsz/config.hpp"
#include "rsz/solver.hpp"

namespace rsz {

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// spectrum: singular values of S, S_confined and A on one patch.
// ---------------------------------------------------------------------------
inline void cmd_spectrum(const ExperimentConfig& cfg, int patch_id, const std::string& out) {
  SchwarzContext ctx = make_context(cfg);
  SpectrumResult sr = spectrum(ctx, patch_id);
  auto at = [](const std::vector<double>& s, size_t i) { return i < s.size() ? s[i] : 0.0; };
  auto rel = [&](const std::vector<double>& s, size_t i) {
    return (!s.empty() && s[0] > 0.0) ? at(s, i) / s[0] : 0.0;
  };
  size_t rows = std::max({sr.s_full.size(), sr.s_conf.size(), sr.s_amap.size()});
  std::string csv = "index,sigma_S,sigma_Sconf,sigma_A,sigma_S_rel,sigma_Sconf_rel,sigma_A_rel\n";
  for (size_t i = 0; i < rows; ++i) {
    csv += std::to_string(i + 1);
    csv += ',';
    csv += fmt_g(at(sr.s_full, i));
    csv += ',';
    csv += fmt_g(at(sr.s_conf, i));
    csv += ',';
    csv += fmt_g(at(sr.s_amap, i));
    csv += ',';
    csv += fmt_g(rel(sr.s_full, i));
    csv += ',';
    csv += fmt_g(rel(sr.s_conf, i));
    csv += ',';
    csv += fmt_g(rel(sr.s_amap, i));
    csv += '\n';
  }
  atomic_write_file(out, csv);
  std::cout << "spectrum: patch " << patch_id << ", " << rows << " rows -> " << out << "\n";
}

// ---------------------------------------------------------------------------
// offline: compress all patches and persist the archive.
// ---------------------------------------------------------------------------
inline void cmd_offline(const ExperimentConfig& cfg, const std::string& archive) {
  SchwarzContext ctx = make_context(cfg);
  auto t0 = std::chrono::steady_clock::now();
  std::vector<ReducedMap> maps = offline_compress(ctx, cfg.k, cfg.p, cfg.seed);
  double secs = seconds_since(t0);
  save_maps(archive, maps);
  std::printf("offline wall time: %.3f s (k=%d, p=%d, %d patches) -> %s\n", secs, cfg.k, cfg.p,
              ctx.layout.n_patches, archive.c_str());
}

namespace cmddetail {

inline std::string history_csv(const RunResult& rr) {
  std::string csv = "iter,rel_error,succ_diff\n";
  size_t rows = std::max(rr.rel_error.size(), rr.succ_diff.size());
  for (size_t t = 0; t < rows; ++t) {
    csv += std::to_string(t);
    csv += ',';
    if (t < rr.rel_error.size()) csv += fmt_g(rr.rel_error[t]);
    csv += ',';
    // the t = 0 row has no predecessor; leave the field empty
    if (t < rr.succ_diff.size() && std::isfinite(rr.succ_diff[t])) csv += fmt_g(rr.succ_diff[t]);
    csv += '\n';
  }
  return csv;
}

inline std::string field_csv(const GridSpec& g, const GridFunction& u) {
  std::string csv = "x,y,u\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      csv += fmt_g(i * g.h);
      csv += ',';
      csv += fmt_g(j * g.h);
      csv += ',';
      csv += fmt_g(u.at(i, j));
      csv += '\n';
    }
  return csv;
}

}  // namespace cmddetail

// ---------------------------------------------------------------------------
// online: load the archive, run the reduced iteration, write solution (and
// history when tracking is on).  The printed online time covers the iteration
// loop; the final exact reconstruction is reported separately.
// ---------------------------------------------------------------------------
inline void cmd_online(const ExperimentConfig& cfg, const std::string& archive,
                       const std::string& prefix) {
  SchwarzContext ctx = make_context(cfg);
  std::vector<ReducedMap> maps = load_maps(archive);
  detail::check_maps(ctx, maps);  // fail fast before the reference run
  GridFunction ref = reference_solution(ctx);

  RunResult timed = run_reduced(ctx, maps, cfg.T);
  double final_err = relative_error(timed.final_field, ref);
  atomic_write_file(prefix + "_solution.csv", cmddetail::field_csv(ctx.grid, timed.final_field));
  std::printf("online wall time: %.6f s (loop), %.6f s reconstruction, final rel_error %.3e\n",
              timed.online_seconds, timed.reconstruct_seconds, final_err);

  if (cfg.track_history) {
    RunOptions opts;
    opts.track_history = true;
    opts.reference = &ref;
    RunResult tracked = run_reduced(ctx, maps, cfg.T, opts);
    atomic_write_file(prefix + "_history.csv", cmddetail::history_csv(tracked));
  }
}

// ---------------------------------------------------------------------------
// vanilla: exact Schwarz run with the same output schema.
// ---------------------------------------------------------------------------
inline void cmd_vanilla(const ExperimentConfig& cfg, const std::string& prefix) {
  SchwarzContext ctx = make_context(cfg);
  RunResult timed = run_vanilla(ctx, cfg.T);
  atomic_write_file(prefix + "_solution.csv", cmddetail::field_csv(ctx.grid, timed.final_field));
  std::printf("vanilla wall time: %.3f s (loop), %.3f s final sweep, T=%d\n",
              timed.online_seconds, timed.reconstruct_seconds, cfg.T);

  if (cfg.track_history) {
    GridFunction ref = cfg.T == 100 ? timed.final_field : reference_solution(ctx);
    RunOptions opts;
    opts.track_history = true;
    opts.reference = &ref;
    RunResult tracked = run_vanilla(ctx, cfg.T, opts);
    atomic_write_file(prefix + "_history.csv", cmddetail::history_csv(tracked));
    std::printf("vanilla final rel_error vs T=100 reference: %.3e\n",
                tracked.rel_error.empty() ? 0.0 : tracked.rel_error.back());
  }
}

// ---------------------------------------------------------------------------
// bench: Table-style timing rows.  The vanilla row follows the reference
// protocol (T = 100); reduced rows use the configured T.  online_s covers the
// iteration loop; total_s adds offline time and the final reconstruction.
// ---------------------------------------------------------------------------
inline void cmd_bench(const ExperimentConfig& cfg, const std::vector<int>& ranks, int repeat,
                      const std::string& out) {
  SchwarzContext ctx = make_context(cfg);
  int bnodes = ctx.patches.empty() ? 0 : ctx.patches[0].n_boundary;
  for (int k : ranks)
    if (k < 1 || k + cfg.p > bnodes)
      throw error(errc::config_error,
                  "bench rank " + std::to_string(k) + " is invalid for boundary dimension " +
                      std::to_string(bnodes));

  std::vector<double> v_loop, v_total;
  GridFunction ref;
  for (int r = 0; r < repeat; ++r) {
    RunResult rr = run_vanilla(ctx, 100);
    v_loop.push_back(rr.online_seconds);
    v_total.push_back(rr.online_seconds + rr.reconstruct_seconds);
    if (r == 0) ref = std::move(rr.final_field);
  }

  std::string csv = "method,k,offline_s,online_s,total_s,final_rel_error\n";
  csv += "vanilla,0,0," + fmt_g(median_of(v_loop)) + "," + fmt_g(median_of(v_total)) + ",0\n";
  std::printf("bench vanilla: loop %.3f s, total %.3f s (T=100)\n", median_of(v_loop),
              median_of(v_total));

  for (int k : ranks) {
    std::vector<double> off_s, on_s, tot_s;
    double err = 0;
    for (int r = 0; r < repeat; ++r) {
      auto t0 = std::chrono::steady_clock::now();
      std::vector<ReducedMap> maps = offline_compress(ctx, k, cfg.p, cfg.seed);
      off_s.push_back(seconds_since(t0));
      RunResult rr = run_reduced(ctx, maps, cfg.T);
      on_s.push_back(rr.online_seconds);
      tot_s.push_back(off_s.back() + rr.online_seconds + rr.reconstruct_seconds);
      if (r == 0) err = relative_error(rr.final_field, ref);
    }
    csv += "reduced," + std::to_string(k) + "," + fmt_g(median_of(off_s)) + "," +
           fmt_g(median_of(on_s)) + "," + fmt_g(median_of(tot_s)) + "," + fmt_g(err) + "\n";
    std::printf("bench reduced k=%d: offline %.3f s, online %.6f s, rel_error %.3e\n", k,
                median_of(off_s), median_of(on_s), err);
  }
  atomic_write_file(out, csv);
  std::cout << "bench table -> " << out << "\n";
}

// ---------------------------------------------------------------------------
// solution: write the configured method's global field for plotting.
// ---------------------------------------------------------------------------
inline void cmd_solution(const ExperimentConfig& cfg, const std::string& archive,
                         const std::string& out) {
  GridFunction u;
  GridSpec g = build_grid(cfg.lx, cfg.ly, cfg.h);
  if (cfg.method == Method::global) {
    MediaField media = cfg.media_kind == MediaField::Kind::builtin_oscillatory
                           ? builtin_media(cfg.epsilon)
                           : load_raster(resolve_path(cfg, cfg.raster_path));
    finalize_media_bounds(media, g);
    DirichletData bc = cfg.bc_kind == DirichletData::Kind::builtin_sine
                           ? builtin_sine_data(g)
                           : load_boundary(resolve_path(cfg, cfg.bc_file), g);
    u = solve_global(g, media, bc);
  } else {
    SchwarzContext ctx = make_context(cfg);
    if (cfg.method == Method::vanilla) {
      u = run_vanilla(ctx, cfg.T).final_field;
    } else {
      std::vector<ReducedMap> maps =
          archive.empty() ? offline_compress(ctx, cfg.k, cfg.p, cfg.seed) : load_maps(archive);
      u = run_reduced(ctx, maps, cfg.T).final_field;
    }
  }
  atomic_write_file(out, cmddetail::field_csv(g, u));
  std::cout << "solution field (" << g.nx * g.ny << " rows) -> " << out << "\n";
}

}  // namespace rsz

#endif
