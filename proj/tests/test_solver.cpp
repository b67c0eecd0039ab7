#include <catch2/catch_amalgamated.hpp>

#include <rsz/solver.hpp>

using namespace rsz;
using Catch::Approx;

namespace {

// quarter-length variant of the reference setup: same cell structure, 3 strips
SchwarzContext small_context() {
  GridSpec g = build_grid(2.5, 1.0, 0.025);
  return build_context(g, builtin_media(1.0 / 16.0), 3, 1.0, 0.75, builtin_sine_data(g));
}

double field_diff(const GridFunction& a, const GridFunction& b) {
  REQUIRE(a.rect == b.rect);
  double worst = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i)
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  return worst;
}

}  // namespace

TEST_CASE("global solve satisfies the stencil and pins the boundary", "[solver]") {
  GridSpec g = build_grid(2.5, 1.0, 0.025);
  MediaField m = builtin_media(1.0 / 16.0);
  finalize_media_bounds(m, g);
  DirichletData b = builtin_sine_data(g);
  GridFunction u = solve_global(g, m, b);
  REQUIRE(u.rect == full_rect(g));

  for (auto [i, j] : boundary_nodes(full_rect(g)))
    CHECK(u.at(i, j) == boundary_value(b, g, i, j));

  double worst = 0.0, scale = 0.0;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      double r = 0.0;
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int e = 0; e < 4; ++e) {
        double ae = edge_coefficient(m, g, i, j, i + di[e], j + dj[e]);
        r += ae * (u.at(i, j) - u.at(i + di[e], j + dj[e]));
        scale = std::max(scale, std::abs(ae));
      }
      worst = std::max(worst, std::abs(r));
    }
  CHECK(worst <= 1e-10 * scale);
}

TEST_CASE("a single full-width patch reproduces the direct solve at T=1", "[solver]") {
  GridSpec g = build_grid(1.0, 1.0, 0.05);
  MediaField m = builtin_media(0.25);
  DirichletData b = builtin_sine_data(g);
  SchwarzContext ctx = build_context(g, m, 1, 1.0, 1.0, b);
  finalize_media_bounds(m, g);
  RunResult rr = run_vanilla(ctx, 1);
  GridFunction ref = solve_global(g, m, b);
  CHECK(field_diff(rr.final_field, ref) <= 1e-12);
}

TEST_CASE("T=0 returns the assembly of the initial traces", "[solver]") {
  SchwarzContext ctx = small_context();
  RunResult rr = run_vanilla(ctx, 0);
  CHECK(rr.iterations == 0);
  CHECK(rr.loop_solves == 0);

  // build the expected field by hand from the initial state
  BoundaryState st = init_state(ctx.layout, ctx.bc);
  std::vector<GridFunction> fields;
  for (int p = 0; p < 3; ++p)
    fields.push_back(solve_dirichlet(ctx.patches[p], st.traces[p]));
  GridFunction want = assemble_global(ctx.layout, ctx.pou, fields);
  CHECK(field_diff(rr.final_field, want) == 0.0);
}

TEST_CASE("vanilla converges to the direct solve with tracked history", "[solver]") {
  SchwarzContext ctx = small_context();
  GridFunction ref = solve_global(ctx.grid, ctx.media, ctx.bc);
  RunOptions opts;
  opts.track_history = true;
  opts.reference = &ref;
  RunResult rr = run_vanilla(ctx, 60, opts);

  REQUIRE(rr.rel_error.size() == static_cast<size_t>(rr.iterations) + 1);
  REQUIRE(rr.succ_diff.size() == rr.rel_error.size());
  CHECK(std::isnan(rr.succ_diff[0]));
  CHECK(rr.rel_error.front() > 1e-3);
  CHECK(rr.rel_error.back() <= 1e-12);
  // monotone decay after the transient
  for (size_t t = 3; t < rr.rel_error.size(); ++t)
    CHECK(rr.rel_error[t] <= rr.rel_error[t - 1] * 1.05);
  CHECK(relative_error(rr.final_field, ref) <= 1e-12);
}

TEST_CASE("tracked runs stop early once machine precision is reached", "[solver]") {
  SchwarzContext ctx = small_context();
  GridFunction ref = solve_global(ctx.grid, ctx.media, ctx.bc);
  RunOptions opts;
  opts.track_history = true;
  opts.reference = &ref;
  opts.early_exit = true;
  RunResult rr = run_vanilla(ctx, 500, opts);
  CHECK(rr.iterations < 120);
  CHECK(rr.succ_diff.back() < 1e-14);
}

TEST_CASE("offline compression consumes exactly the advertised solves", "[solver]") {
  SchwarzContext ctx = small_context();
  const int k = 20, p = 5;
  std::vector<std::uint64_t> before;
  for (const auto& op : ctx.patches) before.push_back(op.solve_count);
  auto maps = offline_compress(ctx, k, p, 42);
  REQUIRE(maps.size() == 3);
  for (size_t i = 0; i < maps.size(); ++i) {
    // 3 probe pairs, then k+p sample applies and k+p adjoint applies
    CHECK(ctx.patches[i].solve_count - before[i] == 2 * (k + p) + 6);
    CHECK(maps[i].patch_id == static_cast<int>(i));
    CHECK(maps[i].k == k);
    CHECK(maps[i].seed == (42ull ^ i));
    CHECK(maps[i].triple.u.rows() == ctx.patches[i].n_confine);
    CHECK(maps[i].triple.u.cols() == k);
    CHECK(maps[i].triple.v.rows() == ctx.patches[i].n_boundary);
    CHECK(maps[i].triple.samples == k + p);
  }
}

TEST_CASE("full-rank reduced iteration shadows vanilla exactly", "[solver]") {
  SchwarzContext ctx = small_context();
  auto maps = offline_compress(ctx, 160, 0, 7);   // no truncation: whole boundary space

  RunOptions opts;
  opts.record_states = true;
  RunResult van = run_vanilla(ctx, 10, opts);
  RunResult red = run_reduced(ctx, maps, 10, opts);

  REQUIRE(van.states.size() == red.states.size());
  for (size_t t = 0; t < van.states.size(); ++t)
    for (int p = 0; p < 3; ++p) {
      const auto& a = van.states[t].traces[p].values;
      const auto& b = red.states[t].traces[p].values;
      REQUIRE(a.size() == b.size());
      for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Approx(b[i]).margin(1e-8));
    }
  CHECK(field_diff(van.final_field, red.final_field) <= 1e-8);
}

TEST_CASE("the untracked fast path performs zero loop solves", "[solver]") {
  SchwarzContext ctx = small_context();
  auto maps = offline_compress(ctx, 70, 10, 42);
  RunResult rr = run_reduced(ctx, maps, 50);
  CHECK(rr.loop_solves == 0);
  REQUIRE(rr.final_field.rect == full_rect(ctx.grid));

  // fast path agrees with the literal tracked application
  RunOptions opts;
  opts.record_states = true;
  RunResult lit = run_reduced(ctx, maps, 50, opts);
  CHECK(relative_error(rr.final_field, lit.final_field) <= 1e-10);

  // and lands close to the true solution at this rank
  GridFunction ref = reference_solution(ctx);
  CHECK(relative_error(rr.final_field, ref) <= 5e-5);
}

TEST_CASE("reduced runs reject maps from another configuration", "[solver]") {
  SchwarzContext ctx = small_context();
  auto maps = offline_compress(ctx, 20, 5, 1);
  maps[1].fingerprint[4] ^= 0xFF;
  try {
    run_reduced(ctx, maps, 3);
    FAIL("expected throw");
  } catch (const error& e) {
    CHECK(e.code() == errc::fingerprint_mismatch);
    CHECK(e.is_config());
  }

  auto maps2 = offline_compress(ctx, 20, 5, 1);
  maps2.pop_back();
  CHECK_THROWS_AS(run_reduced(ctx, maps2, 3), error);
}

TEST_CASE("relative error guards its inputs", "[solver]") {
  GridFunction a(NodeRect{0, 3, 0, 3});
  GridFunction b(NodeRect{0, 4, 0, 3});
  CHECK_THROWS_AS(relative_error(a, b), error);

  GridFunction z(NodeRect{0, 3, 0, 3});
  try {
    relative_error(a, z);
    FAIL("expected throw");
  } catch (const error& e) {
    CHECK(e.code() == errc::zero_reference);
    CHECK_FALSE(e.is_config());
  }
}

TEST_CASE("reference protocol is deterministic", "[solver]") {
  SchwarzContext ctx = small_context();
  GridFunction r1 = reference_solution(ctx);
  GridFunction r2 = reference_solution(ctx);
  CHECK(field_diff(r1, r2) == 0.0);
}

TEST_CASE("spectrum returns three nonincreasing sequences", "[solver]") {
  SchwarzContext ctx = small_context();
  SpectrumResult sp = spectrum(ctx, 1);
  CHECK(sp.s_full.size() == 160);
  CHECK(sp.s_conf.size() == 160);
  CHECK(sp.s_amap.size() == 78);
  for (size_t i = 1; i < sp.s_full.size(); ++i) CHECK(sp.s_full[i] <= sp.s_full[i - 1]);
  for (size_t i = 1; i < sp.s_conf.size(); ++i) CHECK(sp.s_conf[i] <= sp.s_conf[i - 1]);
  for (size_t i = 1; i < sp.s_amap.size(); ++i) CHECK(sp.s_amap[i] <= sp.s_amap[i - 1]);
  CHECK(sp.s_full[0] > 0.0);

  CHECK_THROWS_AS(spectrum(ctx, 3), error);
  CHECK_THROWS_AS(spectrum(ctx, -1), error);
}

TEST_CASE("reference-scale context has the advertised shape", "[solver]") {
  GridSpec g = build_grid(10.0, 1.0, 0.025);
  SchwarzContext ctx =
      build_context(g, builtin_media(1.0 / 16.0), 13, 1.0, 0.75, builtin_sine_data(g));
  REQUIRE(ctx.patches.size() == 13);
  for (const auto& op : ctx.patches) {
    CHECK(op.n_boundary == 160);
    CHECK(op.n_confine == 861);
    CHECK(op.n_interior == 1521);
  }
}
