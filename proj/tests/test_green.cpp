#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "halos/green.hpp"
#include "halos/random.hpp"

using namespace halos;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Grid-aligned pole/evaluation offsets used at every resolution (scaled so
// the fractional separations are identical), all at least two cells from the
// pole at the coarsest grid.
struct PairSpec {
  int pole_i, pole_j, off_i, off_j;
};
const PairSpec kPairs[] = {
    {4, 6, 4, 0}, {4, 6, 3, 5}, {4, 6, 8, 8}, {1, 12, 2, 7}, {9, 3, 6, 14},
};

Index torus_vertex(int n, int i, int j) {
  return static_cast<Index>(((j % n + n) % n) * n + ((i % n + n) % n));
}

// Slowly-converging planewave sum for the lattice Poisson kernel, truncated
// to a box; independent of the row-summed closed form under test.
double fourier_brute_force(Complex tau, double d1, double d2, int box) {
  double sum = 0.0;
  for (int k1 = -box; k1 <= box; ++k1) {
    for (int k2 = -box; k2 <= box; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double transverse = (static_cast<double>(k2) - k1 * tau.real()) / tau.imag();
      const double denom = 4.0 * M_PI * M_PI * (static_cast<double>(k1) * k1 + transverse * transverse);
      sum += std::cos(kTwoPi * (k1 * d1 + k2 * d2)) / denom;
    }
  }
  return sum / tau.imag();
}

double oracle_error(int n, Complex tau) {
  const int scale = n / 16;
  const auto s = build_flat_torus(n, tau);
  const SurfaceOperators ops(s);
  const GreenEvaluator green(ops);

  double worst = 0.0;
  for (const auto& p : kPairs) {
    const Index pole = torus_vertex(n, p.pole_i * scale, p.pole_j * scale);
    const Index eval = torus_vertex(n, (p.pole_i + p.off_i) * scale, (p.pole_j + p.off_j) * scale);
    const double ref = torus_green_reference(tau, p.off_i / 16.0, p.off_j / 16.0);
    worst = std::max(worst, std::abs(green.column(pole)[eval] - ref));
  }
  return worst;
}

}  // namespace

TEST_CASE("green columns require a closed surface") {
  const auto s = build_annulus(0.3, 4, 16);
  const SurfaceOperators ops(s);
  CHECK_THROWS_AS(GreenEvaluator(ops), std::runtime_error);
}

TEST_CASE("green columns are mean-free, symmetric, and carry the unit pole") {
  const int n = 16;
  const auto s = build_flat_torus(n, Complex(0.0, 1.0));
  const SurfaceOperators ops(s);
  const GreenEvaluator green(ops);

  const Index a = torus_vertex(n, 3, 4);
  const Index b = torus_vertex(n, 11, 9);
  const Eigen::VectorXd& ga = green.column(a);
  const Eigen::VectorXd& gb = green.column(b);

  CHECK(std::abs(ga.dot(ops.mass())) <= 1e-10);
  CHECK(std::abs(gb.dot(ops.mass())) <= 1e-10);
  CHECK(std::abs(ga[b] - gb[a]) <= 1e-9);

  // The cut flux around the pole's closed star accounts for the full unit
  // charge minus the background mass sitting inside the star.
  std::set<Index> star{a};
  for (const auto& e : s.edges) {
    if (e[0] == a) star.insert(e[1]);
    if (e[1] == a) star.insert(e[0]);
  }
  double enclosed_mass = 0.0;
  for (Index v : star) enclosed_mass += ops.mass()[v];

  const Complex res = residue(ops, green.column_cochain(a), a);
  CHECK(std::abs(res.real() + (1.0 - enclosed_mass) / kTwoPi) <= 1e-12);
  CHECK(std::abs(res.imag()) <= 1e-12);
  CHECK(res.real() == doctest::Approx(-1.0 / kTwoPi).epsilon(0.05));
}

TEST_CASE("green columns converge to the closed-form reference") {
  const Complex tau(0.0, 1.0);
  const double err16 = oracle_error(16, tau);
  const double err32 = oracle_error(32, tau);
  CHECK(err16 <= 2e-2);
  CHECK(err32 <= err16 / 3.0);  // second-order drop when the grid doubles
}

TEST_CASE("green columns track the reference on a skew lattice") {
  CHECK(oracle_error(16, Complex(0.3, 0.8)) <= 2e-2);
}

TEST_CASE("reference row sums are stable under doubling the term count") {
  const Complex taus[] = {Complex(0.0, 1.0), Complex(0.3, 0.8)};
  const double pts[][2] = {{0.5, 0.5}, {0.25, 0.125}, {0.31, 0.17}, {0.05, 0.9}};
  for (const Complex tau : taus)
    for (const auto& d : pts) {
      const double a = torus_green_reference(tau, d[0], d[1], 32);
      const double b = torus_green_reference(tau, d[0], d[1], 64);
      CHECK(std::abs(a - b) <= 1e-10);
    }
  CHECK_THROWS_AS(torus_green_reference(Complex(0.0, 1.0), 0.0, 0.0), std::runtime_error);
  CHECK_THROWS_AS(torus_green_reference(Complex(0.0, -1.0), 0.3, 0.3), std::runtime_error);
}

TEST_CASE("reference row sums agree with a planewave brute force") {
  const Complex taus[] = {Complex(0.0, 1.0), Complex(0.3, 0.8)};
  const double pts[][2] = {{0.5, 0.5}, {0.31, 0.17}};
  for (const Complex tau : taus)
    for (const auto& d : pts) {
      const double closed = torus_green_reference(tau, d[0], d[1]);
      const double brute = fourier_brute_force(tau, d[0], d[1], 512);
      CHECK(std::abs(closed - brute) <= 2e-3);
    }
}

TEST_CASE("hodge split reproduces the field and separates the mean") {
  const auto s = build_flat_torus(20, Complex(0.1, 1.2));
  const SurfaceOperators ops(s);

  Cochain0 phi;
  phi.v.resize(s.n_vertices);
  for (Index v = 0; v < s.n_vertices; ++v) {
    const auto& p = s.planar_coords[static_cast<std::size_t>(v)];
    // Smooth periodic field in the lattice coordinates plus a constant.
    const double x = p[0] - p[1] * 0.1 / 1.2, y = p[1] / 1.2;
    phi.v[v] = Complex(std::sin(kTwoPi * x), std::cos(kTwoPi * y)) + Complex(0.7, -0.2);
  }

  const auto parts = hodge_decompose(ops, phi);
  CHECK(std::abs(parts.mean - ops.mean(phi.v)) <= 1e-12);
  CHECK(std::abs(ops.mean(parts.potential.v)) <= 1e-10);

  const auto back = hodge_reconstruct(ops, parts);
  double worst = 0.0, scale = 0.0;
  for (Index v = 0; v < s.n_vertices; ++v) {
    worst = std::max(worst, std::abs(back.v[v] - phi.v[v]));
    scale = std::max(scale, std::abs(phi.v[v]));
  }
  CHECK(worst <= 1e-8 * scale);
}

TEST_CASE("column cache evicts least-recently-used entries") {
  const auto s = build_flat_torus(8, Complex(0.0, 1.0));
  const SurfaceOperators ops(s);
  const GreenEvaluator green(ops, {}, 2);

  green.column(0);  // miss
  green.column(1);  // miss
  green.column(2);  // miss, evicts 0
  CHECK(green.cache_size() == 2);
  green.column(1);  // hit
  green.column(0);  // miss again, evicts 2
  CHECK(green.cache_hits() == 1);
  CHECK(green.cache_misses() == 4);
  CHECK(green.cache_size() == 2);

  CHECK_THROWS_AS(green.column(-1), std::runtime_error);
  CHECK_THROWS_AS(green.column(ops.n_vertices()), std::runtime_error);
}
