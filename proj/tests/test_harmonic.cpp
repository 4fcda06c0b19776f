#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "halos/harmonic.hpp"

using namespace halos;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Index torus_vertex(int n, int i, int j) {
  return static_cast<Index>(((j % n + n) % n) * n + ((i % n + n) % n));
}

Cycle one_ring(int n, int i, int j) {
  auto id = [n](int a, int b) { return static_cast<Index>(((b + n) % n) * n + (a + n) % n); };
  return {{id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), id(i - 1, j), id(i - 1, j - 1), id(i, j - 1)}};
}

// Interior vertex nearest to (x, y) whose one-ring stays off the boundary.
Index deep_interior_near(const DiscreteSurface& s, double x, double y) {
  Index best = -1;
  double best_d = 1e300;
  for (Index v = 0; v < s.n_vertices; ++v) {
    if (s.is_boundary_vertex[static_cast<std::size_t>(v)]) continue;
    bool touches = false;
    for (Index nb : s.vertex_neighbors[static_cast<std::size_t>(v)])
      if (s.is_boundary_vertex[static_cast<std::size_t>(nb)]) touches = true;
    if (touches) continue;
    const auto& p = s.planar_coords[static_cast<std::size_t>(v)];
    const double d = std::hypot(p[0] - x, p[1] - y);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  REQUIRE(best >= 0);
  return best;
}

std::size_t outer_loop_index(const DiscreteSurface& s) {
  REQUIRE(s.boundary_loops.size() == 2);
  const auto r = [&](std::size_t k) {
    const auto& p = s.planar_coords[static_cast<std::size_t>(s.boundary_loops[k].front())];
    return std::hypot(p[0], p[1]);
  };
  return r(0) > r(1) ? 0 : 1;
}

Eigen::VectorXcd boundary_data(const DiscreteSurface& s,
                               const std::function<Complex(double, double)>& f) {
  const auto fixed = boundary_vertices(s);
  Eigen::VectorXcd data(static_cast<Eigen::Index>(fixed.size()));
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    const auto& p = s.planar_coords[static_cast<std::size_t>(fixed[k])];
    data[static_cast<Eigen::Index>(k)] = f(p[0], p[1]);
  }
  return data;
}

}  // namespace

TEST_CASE("boundary vertex list concatenates the loops in order") {
  const auto s = build_annulus(0.3, 5, 24);
  const auto fixed = boundary_vertices(s);
  std::vector<Index> expect;
  for (const auto& loop : s.boundary_loops) expect.insert(expect.end(), loop.begin(), loop.end());
  CHECK(fixed == expect);

  const auto torus = build_flat_torus(8, Complex(0.0, 1.0));
  CHECK(boundary_vertices(torus).empty());
}

TEST_CASE("harmonic extension pins boundary values and extends constants exactly") {
  const auto s = build_annulus(0.3, 6, 24);
  const SurfaceOperators ops(s);
  const auto fixed = boundary_vertices(s);

  const Complex k(0.4, -1.3);
  Eigen::VectorXcd data = Eigen::VectorXcd::Constant(static_cast<Eigen::Index>(fixed.size()), k);
  const auto u = harmonic_extension(ops, data);
  for (std::size_t i = 0; i < fixed.size(); ++i) CHECK(u.v[fixed[i]] == k);
  for (Index v = 0; v < s.n_vertices; ++v) CHECK(std::abs(u.v[v] - k) <= 1e-10);

  const auto torus = build_flat_torus(8, Complex(0.0, 1.0));
  const SurfaceOperators torus_ops(torus);
  CHECK_THROWS_AS(harmonic_extension(torus_ops, Eigen::VectorXcd()), std::runtime_error);
}

TEST_CASE("prescribed point residues are met exactly and the rest stays harmonic") {
  const auto s = build_annulus(0.25, 10, 40);
  const SurfaceOperators ops(s);

  const std::vector<PointCharge> charges = {
      {deep_interior_near(s, 0.6, 0.0), Complex(1.0, 0.0)},
      {deep_interior_near(s, -0.5, 0.3), Complex(-0.3, 0.7)},
  };
  const auto data = boundary_data(s, [](double x, double y) { return Complex(x, -y); });
  const auto u = extend_with_singularities(ops, data, charges);

  const auto rows = residues_report(ops, u, charges);
  REQUIRE(rows.size() == 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].vertex == charges[i].vertex);
    CHECK(rows[i].declared == charges[i].c);
    CHECK(std::abs(rows[i].measured - rows[i].declared) <= 1e-9);
  }

  // Off the charge sites the interior is discretely harmonic.
  const Eigen::VectorXcd lap = ops.stiffness_apply(u.v);
  double worst = 0.0;
  for (Index v = 0; v < s.n_vertices; ++v) {
    if (s.is_boundary_vertex[static_cast<std::size_t>(v)]) continue;
    if (v == charges[0].vertex || v == charges[1].vertex) continue;
    worst = std::max(worst, std::abs(lap[v]));
  }
  CHECK(worst <= 1e-9 * kTwoPi);

  // Boundary data is pinned exactly.
  const auto fixed = boundary_vertices(s);
  for (std::size_t i = 0; i < fixed.size(); ++i)
    CHECK(u.v[fixed[i]] == data[static_cast<Eigen::Index>(i)]);
}

TEST_CASE("singular extension rejects bad charge placement") {
  const auto s = build_annulus(0.3, 6, 24);
  const SurfaceOperators ops(s);
  const auto data = boundary_data(s, [](double, double) { return Complex(0.0, 0.0); });

  const Index on_boundary = s.boundary_loops[0][0];
  CHECK_THROWS_AS(extend_with_singularities(ops, data, {{on_boundary, 1.0}}), std::runtime_error);

  // A vertex whose ring touches the boundary.
  Index ring_toucher = -1;
  for (Index v = 0; v < s.n_vertices && ring_toucher < 0; ++v) {
    if (s.is_boundary_vertex[static_cast<std::size_t>(v)]) continue;
    for (Index nb : s.vertex_neighbors[static_cast<std::size_t>(v)])
      if (s.is_boundary_vertex[static_cast<std::size_t>(nb)]) ring_toucher = v;
  }
  REQUIRE(ring_toucher >= 0);
  CHECK_THROWS_AS(extend_with_singularities(ops, data, {{ring_toucher, 1.0}}), std::runtime_error);

  const Index deep = deep_interior_near(s, 0.6, 0.0);
  Index deep_nb = -1;
  for (Index nb : s.vertex_neighbors[static_cast<std::size_t>(deep)]) {
    bool touches = false;
    for (Index nb2 : s.vertex_neighbors[static_cast<std::size_t>(nb)])
      if (s.is_boundary_vertex[static_cast<std::size_t>(nb2)]) touches = true;
    if (!s.is_boundary_vertex[static_cast<std::size_t>(nb)] && !touches) deep_nb = nb;
  }
  REQUIRE(deep_nb >= 0);
  CHECK_THROWS_AS(extend_with_singularities(ops, data, {{deep, 1.0}, {deep_nb, 1.0}}),
                  std::runtime_error);
  CHECK_THROWS_AS(extend_with_singularities(ops, data, {{deep, 1.0}, {deep, 1.0}}),
                  std::runtime_error);
}

TEST_CASE("bipolar fields carry opposite unit residues and zero mean") {
  const int n = 16;
  const auto s = build_flat_torus(n, Complex(0.0, 1.0));
  const SurfaceOperators ops(s);
  const GreenEvaluator green(ops);

  const Complex c(0.3, -0.4);
  const Index a_plus = torus_vertex(n, 4, 4);
  const Index a_minus = torus_vertex(n, 12, 12);
  const auto u = bipolar_field(green, a_plus, a_minus, c);

  CHECK(std::abs(ops.mean(u.v)) <= 1e-10 * std::abs(c));
  CHECK(std::abs(residue(ops, u, a_plus) - c) <= 1e-9);
  CHECK(std::abs(residue(ops, u, a_minus) + c) <= 1e-9);

  // The dipole flux through the positive pole's one-ring is the full 2 pi c.
  const Complex circulation = contour_integral(ops, dc(ops, u), one_ring(n, 4, 4));
  CHECK(std::abs(circulation - kTwoPi * c) <= 1e-9 * kTwoPi * std::abs(c));

  CHECK_THROWS_AS(bipolar_field(green, a_plus, a_plus, c), std::runtime_error);
  CHECK_THROWS_AS(bipolar_field(green, a_plus, torus_vertex(n, 5, 4), c), std::runtime_error);
  CHECK_THROWS_AS(bipolar_field(green, a_plus, torus_vertex(n, 6, 4), c), std::runtime_error);
}

TEST_CASE("boundary flux conserves charge, pairs to the energy, and is symmetric") {
  const auto s = build_annulus(0.25, 8, 32);
  const SurfaceOperators ops(s);

  const auto u_data = boundary_data(s, [](double x, double) { return Complex(x, 0.0); });
  const auto v_data = boundary_data(s, [](double x, double y) {
    return Complex(std::log(std::hypot(x, y)) + 0.2 * y, 0.0);
  });

  const auto flux_u = dirichlet_to_neumann(ops, u_data);
  const auto flux_v = dirichlet_to_neumann(ops, v_data);

  // Interior entries are exactly zero; the total flux vanishes.
  Complex total = 0.0;
  for (Index v = 0; v < s.n_vertices; ++v) {
    if (!s.is_boundary_vertex[static_cast<std::size_t>(v)]) CHECK(flux_u.v[v] == Complex(0.0, 0.0));
    total += flux_u.v[v];
  }
  CHECK(std::abs(total) <= 1e-10);

  // Pairing with the data equals the Dirichlet energy of the fill.
  const auto fill_u = harmonic_extension(ops, u_data);
  const Eigen::VectorXcd lap_u = ops.stiffness_apply(fill_u.v);
  const double energy = fill_u.v.real().dot(lap_u.real());
  double pairing = 0.0;
  for (Index v = 0; v < s.n_vertices; ++v) pairing += (flux_u.v[v] * fill_u.v[v]).real();
  CHECK(energy > 0.0);
  CHECK(std::abs(pairing - energy) <= 1e-8 * energy);

  // Symmetry of the flux map, paired against the other data set.
  const auto fill_v = harmonic_extension(ops, v_data);
  Complex uv = 0.0, vu = 0.0;
  for (Index v = 0; v < s.n_vertices; ++v) {
    uv += flux_u.v[v] * fill_v.v[v];
    vu += flux_v.v[v] * fill_u.v[v];
  }
  CHECK(std::abs(uv - vu) <= 1e-8 * std::max(1.0, std::abs(uv)));

  // Constants produce no flux at all.
  const auto fixed = boundary_vertices(s);
  const auto flux_c = dirichlet_to_neumann(
      ops, Eigen::VectorXcd::Constant(static_cast<Eigen::Index>(fixed.size()), Complex(2.0, 1.0)));
  double worst = 0.0;
  for (Index v = 0; v < s.n_vertices; ++v) worst = std::max(worst, std::abs(flux_c.v[v]));
  CHECK(worst <= 1e-10);
}

TEST_CASE("log boundary data yields opposite unit fluxes through the two loops") {
  const auto s = build_annulus(0.25, 10, 40);
  const SurfaceOperators ops(s);
  const auto data = boundary_data(s, [](double x, double y) {
    return Complex(std::log(std::hypot(x, y)), 0.0);
  });
  const auto flux = dirichlet_to_neumann(ops, data);

  const std::size_t outer = outer_loop_index(s);
  const std::size_t inner = 1 - outer;
  CHECK(std::abs(loop_sum(s, flux, outer) - Complex(kTwoPi, 0.0)) <= 0.01 * kTwoPi);
  CHECK(std::abs(loop_sum(s, flux, inner) + Complex(kTwoPi, 0.0)) <= 0.01 * kTwoPi);
  CHECK_THROWS_AS(loop_sum(s, flux, 2), std::runtime_error);
}
