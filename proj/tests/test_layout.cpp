#include <catch2/catch_amalgamated.hpp>

#include <rsz/layout.hpp>
#include <rsz/solver.hpp>

#include <filesystem>
#include <fstream>

using namespace rsz;
using Catch::Approx;

namespace {

GridSpec reference_grid() { return build_grid(10.0, 1.0, 0.025); }

std::filesystem::path scratch_file(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "rsz_layout_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("reference layout tiles 13 strips with 10-cell overlap", "[layout]") {
  Layout l = build_layout(reference_grid(), 13, 1.0, 0.75);
  CHECK(l.w_cells == 40);
  CHECK(l.s_cells == 30);
  CHECK(l.ov_cells == 10);
  for (int p = 0; p < 13; ++p) {
    CHECK(l.col_lo[p] == 30 * p);
    CHECK(l.col_hi[p] == 30 * p + 40);
    CHECK(l.int_col_lo[p] == 30 * p + 10);
    CHECK(l.int_col_hi[p] == 30 * p + 30);
  }
  CHECK(l.col_hi[12] == 400);
  CHECK(l.neighbors[0] == std::vector<int>{1});
  CHECK(l.neighbors[3] == std::vector<int>{2, 4});
  CHECK(l.neighbors[12] == std::vector<int>{11});

  CHECK(l.left_owner[0] == -1);                 // physical edge, nobody imports it
  CHECK(l.right_owner[0] == 1);
  CHECK(l.left_owner[3] == 2);
  CHECK(l.right_owner[3] == 4);
  CHECK(l.right_owner[12] == -1);

  // imported edges sit on the owner's confine boundary
  for (int p = 1; p < 13; ++p) CHECK(l.col_lo[p] == l.int_col_hi[p - 1]);
  for (int p = 0; p < 12; ++p) CHECK(l.col_hi[p] == l.int_col_lo[p + 1]);
}

TEST_CASE("layout rejects non-conforming tilings", "[layout]") {
  GridSpec g = reference_grid();
  CHECK_THROWS_AS(build_layout(g, 12, 1.0, 0.75), error);   // does not reach the far side
  CHECK_THROWS_AS(build_layout(g, 13, 1.0, 0.8), error);    // wrong stride
  CHECK_THROWS_AS(build_layout(g, 10, 1.0, 1.0), error);    // zero overlap
  CHECK_THROWS_AS(build_layout(g, 0, 1.0, 0.75), error);
  CHECK_THROWS_AS(build_layout(g, 37, 1.0, 0.25), error);   // stride < half width
  try {
    build_layout(g, 12, 1.0, 0.75);
    FAIL("expected throw");
  } catch (const error& e) {
    CHECK(e.code() == errc::non_conforming_layout);
  }
}

TEST_CASE("single patch layout covers the whole domain", "[layout]") {
  GridSpec g = build_grid(1.0, 1.0, 0.25);
  Layout l = build_layout(g, 1, 1.0, 0.5);                  // stride unused for n = 1
  CHECK(l.col_lo[0] == 0);
  CHECK(l.col_hi[0] == 4);
  CHECK(l.neighbors[0].empty());
  CHECK(patch_rect(l, 0) == full_rect(g));
}

TEST_CASE("partition of unity sums to one on every node", "[layout]") {
  Layout l = build_layout(reference_grid(), 13, 1.0, 0.75);
  PartitionOfUnity pou = build_pou(l);
  GridSpec g = l.grid;

  std::vector<double> sum(static_cast<size_t>(g.nx) * g.ny, 0.0);
  for (int p = 0; p < 13; ++p) {
    NodeRect r = patch_rect(l, p);
    for (int j = 0; j < r.nrows(); ++j)
      for (int i = 0; i < r.ncols(); ++i) {
        double w = pou.eta[p][static_cast<size_t>(j) * r.ncols() + i];
        CHECK(w >= 0.0);
        CHECK(w <= 1.0);
        sum[static_cast<size_t>(j + r.j0) * g.nx + (i + r.i0)] += w;
      }
  }
  for (double s : sum) CHECK(s == Approx(1.0).margin(1e-12));

  // overlap midpoint splits evenly; the far half of a neighbor carries nothing
  NodeRect r0 = patch_rect(l, 0);
  CHECK(pou.eta[0][r0.local(35, 0)] == Approx(0.5).margin(1e-12));
  CHECK(pou.eta[0][r0.local(40, 0)] == Approx(0.0).margin(1e-15));
  CHECK(pou.eta[0][r0.local(20, 17)] == Approx(1.0).margin(1e-15));
  NodeRect r1 = patch_rect(l, 1);
  CHECK(pou.eta[1][r1.local(35, 0)] == Approx(0.5).margin(1e-12));
  CHECK(pou.eta[1][r1.local(30, 5)] == Approx(0.0).margin(1e-15));
}

TEST_CASE("initial traces carry b on physical edges and zero elsewhere", "[layout]") {
  GridSpec g = reference_grid();
  Layout l = build_layout(g, 13, 1.0, 0.75);
  DirichletData b = builtin_sine_data(g);
  BoundaryState st = init_state(l, b);
  CHECK(st.iteration == 0);
  REQUIRE(st.traces.size() == 13);

  auto walk3 = boundary_nodes(patch_rect(l, 3));
  for (size_t k = 0; k < walk3.size(); ++k) {
    auto [i, j] = walk3[k];
    double want = on_domain_boundary(g, i, j) ? builtin_boundary_eval(i * g.h, j * g.h) : 0.0;
    CHECK(st.traces[3].values[k] == Approx(want).margin(1e-15));
  }
  // patch 0 keeps its physical left edge
  auto walk0 = boundary_nodes(patch_rect(l, 0));
  for (size_t k = 0; k < walk0.size(); ++k) {
    auto [i, j] = walk0[k];
    if (i == 0)
      CHECK(st.traces[0].values[k] == Approx(builtin_boundary_eval(0.0, j * g.h)).margin(1e-15));
  }
}

TEST_CASE("exchange pulls owner confine values onto artificial edges", "[layout]") {
  GridSpec g = build_grid(2.5, 1.0, 0.025);                 // 3 strips, same cell counts
  Layout l = build_layout(g, 3, 1.0, 0.75);
  DirichletData b = builtin_sine_data(g);
  MediaField m = builtin_media(1.0 / 16.0);
  finalize_media_bounds(m, g);

  std::vector<PatchOperator> ops;
  for (int p = 0; p < 3; ++p)
    ops.push_back(assemble_patch(g, m, patch_rect(l, p), confine_rect(l, p), p));

  BoundaryState st = init_state(l, b);
  std::vector<InteriorField> conf;
  for (int p = 0; p < 3; ++p)
    conf.push_back(confine_field(ops[p], solve_dirichlet(ops[p], st.traces[p])));

  BoundaryState nx = exchange(l, conf, st);
  CHECK(nx.iteration == 1);

  // patch 0's right edge (col 40) now equals patch 1's confined field there
  NodeRect cr1 = confine_rect(l, 1);
  for (int j = 1; j <= g.ny - 2; ++j) {
    double got = nx.traces[0].values[l.right_edge_pos[0][j - 1]];
    CHECK(got == conf[1].values[cr1.local(40, j)]);
  }
  // physical rows never change
  auto walk = boundary_nodes(patch_rect(l, 0));
  for (size_t k = 0; k < walk.size(); ++k) {
    auto [i, j] = walk[k];
    if (on_domain_boundary(g, i, j)) CHECK(nx.traces[0].values[k] == st.traces[0].values[k]);
  }
}

TEST_CASE("the restricted global solution is an exchange fixed point", "[layout]") {
  GridSpec g = build_grid(2.5, 1.0, 0.025);
  Layout l = build_layout(g, 3, 1.0, 0.75);
  DirichletData b = builtin_sine_data(g);
  MediaField m = builtin_media(1.0 / 16.0);
  finalize_media_bounds(m, g);
  GridFunction star = solve_global(g, m, b);

  std::vector<PatchOperator> ops;
  BoundaryState st;
  st.traces.resize(3);
  for (int p = 0; p < 3; ++p) {
    ops.push_back(assemble_patch(g, m, patch_rect(l, p), confine_rect(l, p), p));
    st.traces[p].patch_id = p;
    for (auto [i, j] : boundary_nodes(patch_rect(l, p)))
      st.traces[p].values.push_back(star.at(i, j));
  }
  std::vector<InteriorField> conf;
  for (int p = 0; p < 3; ++p)
    conf.push_back(confine_field(ops[p], solve_dirichlet(ops[p], st.traces[p])));
  BoundaryState nx = exchange(l, conf, st);
  for (int p = 0; p < 3; ++p)
    for (size_t k = 0; k < st.traces[p].values.size(); ++k)
      CHECK(nx.traces[p].values[k] == Approx(st.traces[p].values[k]).margin(1e-11));
}

TEST_CASE("assembly with a partition of unity is exact on shared fields", "[layout]") {
  GridSpec g = build_grid(2.5, 1.0, 0.125);
  Layout l = build_layout(g, 2, 1.5, 1.0);
  PartitionOfUnity pou = build_pou(l);
  auto lin = [&](int i, int j) { return 0.75 * i * g.h - 1.25 * j * g.h + 0.5; };

  std::vector<GridFunction> fields;
  for (int p = 0; p < 2; ++p) {
    GridFunction f(patch_rect(l, p));
    for (int j = f.rect.j0; j <= f.rect.j1; ++j)
      for (int i = f.rect.i0; i <= f.rect.i1; ++i) f.at(i, j) = lin(i, j);
    fields.push_back(std::move(f));
  }
  GridFunction u = assemble_global(l, pou, fields);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) CHECK(u.at(i, j) == Approx(lin(i, j)).margin(1e-13));
}

TEST_CASE("missing owner surfaces as a structured error", "[layout]") {
  GridSpec g = build_grid(2.5, 1.0, 0.025);
  Layout l = build_layout(g, 3, 1.0, 0.75);
  l.right_owner[0] = -1;                                    // sabotage the ownership table
  std::vector<InteriorField> conf(3);
  for (int p = 0; p < 3; ++p) {
    conf[p].patch_id = p;
    conf[p].values.assign(confine_rect(l, p).count(), 0.0);
  }
  BoundaryState st = init_state(l, builtin_sine_data(g));
  try {
    exchange(l, conf, st);
    FAIL("expected throw");
  } catch (const error& e) {
    CHECK(e.code() == errc::missing_owner);
    CHECK(e.is_config());
  }
}

TEST_CASE("boundary file round trip and validation", "[layout]") {
  GridSpec g = build_grid(1.0, 1.0, 0.25);
  auto walk = boundary_nodes(full_rect(g));

  auto good = scratch_file("ok.bnd");
  {
    std::ofstream out(good);
    out << "BND " << walk.size() << "\n";
    for (size_t k = 0; k < walk.size(); ++k) out << k << " " << 0.5 + 0.25 * k << "\n";
  }
  DirichletData d = load_boundary(good.string(), g);
  CHECK(d.kind == DirichletData::Kind::from_file);
  for (size_t k = 0; k < walk.size(); ++k) {
    auto [i, j] = walk[k];
    CHECK(boundary_value(d, g, i, j) == Approx(0.5 + 0.25 * k).margin(1e-15));
  }
  CHECK_THROWS_AS(boundary_value(d, g, 1, 1), error);       // interior lookup refused

  auto dup = scratch_file("dup.bnd");
  {
    std::ofstream out(dup);
    out << "BND " << walk.size() << "\n";
    for (size_t k = 0; k < walk.size(); ++k) out << 0 << " " << 1.0 << "\n";
  }
  CHECK_THROWS_AS(load_boundary(dup.string(), g), error);

  auto short_count = scratch_file("short.bnd");
  {
    std::ofstream out(short_count);
    out << "BND 4\n0 1\n1 1\n2 1\n3 1\n";
  }
  CHECK_THROWS_AS(load_boundary(short_count.string(), g), error);

  auto bad_magic = scratch_file("magic.bnd");
  {
    std::ofstream out(bad_magic);
    out << "BNDX " << walk.size() << "\n";
  }
  CHECK_THROWS_AS(load_boundary(bad_magic.string(), g), error);
  CHECK_THROWS_AS(load_boundary(scratch_file("absent.bnd").string(), g), error);
}

TEST_CASE("builtin boundary data matches hand-evaluated corners", "[layout]") {
  CHECK(builtin_boundary_eval(0.0, 0.0) == Approx(0.241844762647975).epsilon(1e-12));
  CHECK(builtin_boundary_eval(10.0, 1.0) == Approx(-0.454519477672044).epsilon(1e-12));
  GridSpec g = reference_grid();
  DirichletData d = builtin_sine_data(g);
  CHECK(boundary_value(d, g, 0, 0) == Approx(0.241844762647975).epsilon(1e-12));
  CHECK(boundary_value(d, g, 400, 40) == Approx(-0.454519477672044).epsilon(1e-12));
}
