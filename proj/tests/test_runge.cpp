#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <queue>
#include <unordered_map>

#include "halos/runge.hpp"

using namespace halos;

namespace {

Index torus_vertex(int n, int i, int j) {
  return static_cast<Index>(((j % n + n) % n) * n + ((i % n + n) % n));
}

struct Fixture {
  DiscreteSurface s;
  SurfaceOperators ops;
  GreenEvaluator green;
  Subdomain region;
  ExtensionConfig cfg;
  Cochain0 phi;

  explicit Fixture(int n = 32)
      : s(build_flat_torus(n, Complex(0.0, 1.0))),
        ops(s),
        green(ops),
        region(disc_subdomain(s, torus_vertex(n, n / 2, n / 2), 0.2)),
        cfg(make_extension_config(ops, region)),
        phi(bipolar_field(green, torus_vertex(n, n / 2 + 2, n / 2), torus_vertex(n, n / 2 - 2, n / 2),
                          Complex(1.0, 0.0))) {}
};

// Dijkstra distances from `source`, restricted to closure vertices.
std::unordered_map<Index, double> closure_distances(const DiscreteSurface& s, const Subdomain& region,
                                                    Index source) {
  std::unordered_map<Index, double> dist;
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  dist[source] = 0.0;
  q.push({0.0, source});
  while (!q.empty()) {
    const auto [d, v] = q.top();
    q.pop();
    if (d > dist[v]) continue;
    for (Index u : s.vertex_neighbors[static_cast<std::size_t>(v)]) {
      if (!region.vertex_mark[static_cast<std::size_t>(u)]) continue;
      const double nd = d + s.edge_length(v, u);
      auto it = dist.find(u);
      if (it == dist.end() || nd < it->second) {
        dist[u] = nd;
        q.push({nd, u});
      }
    }
  }
  return dist;
}

}  // namespace

TEST_CASE("extension copies the field off the region and zeroes the mean") {
  Fixture fx;
  const auto ext = extend_harmonic(fx.ops, fx.cfg, fx.phi);

  std::vector<bool> interior(static_cast<std::size_t>(fx.s.n_vertices), false);
  for (Index v : fx.region.interior_vertices) interior[static_cast<std::size_t>(v)] = true;
  for (Index v = 0; v < fx.s.n_vertices; ++v)
    if (!interior[static_cast<std::size_t>(v)]) CHECK(ext.v[v] == fx.phi.v[v]);

  CHECK(std::abs(fx.ops.mean(ext.v)) <= 1e-12);

  // All non-harmonicity is concentrated on the closure.
  const Eigen::VectorXcd rho = fx.ops.stiffness_apply(ext.v);
  double off = 0.0, scale = 0.0;
  for (Index v = 0; v < fx.s.n_vertices; ++v) {
    scale = std::max(scale, std::abs(rho[v]));
    if (!fx.region.vertex_mark[static_cast<std::size_t>(v)]) off = std::max(off, std::abs(rho[v]));
  }
  CHECK(scale > 0.0);
  CHECK(off <= 1e-9 * scale);
}

TEST_CASE("extension is linear") {
  Fixture fx;
  const int n = 32;
  Cochain0 psi = bipolar_field(fx.green, torus_vertex(n, n / 2, n / 2 + 2),
                               torus_vertex(n, n / 2, n / 2 - 2), Complex(0.0, 1.0));
  const Complex alpha(0.7, -1.1);

  Cochain0 mix;
  mix.v = alpha * fx.phi.v + psi.v;
  const auto ext_mix = extend_harmonic(fx.ops, fx.cfg, mix);
  const auto ext_phi = extend_harmonic(fx.ops, fx.cfg, fx.phi);
  const auto ext_psi = extend_harmonic(fx.ops, fx.cfg, psi);

  const Eigen::VectorXcd diff = ext_mix.v - (alpha * ext_phi.v + ext_psi.v);
  CHECK(diff.cwiseAbs().maxCoeff() <= 1e-10 * mix.v.cwiseAbs().maxCoeff());
}

TEST_CASE("cutoff construction rejects regions too shallow for the ramp") {
  const auto s = build_flat_torus(32, Complex(0.0, 1.0));
  const SurfaceOperators ops(s);
  const auto thin = disc_subdomain(s, torus_vertex(32, 16, 16), 0.05);  // one-ring deep
  CHECK_THROWS_AS(make_extension_config(ops, thin), std::runtime_error);
}

TEST_CASE("partition covers the closure with tight disjoint clusters") {
  Fixture fx;
  const double eps = 0.2;
  const auto part = partition_subdomain(fx.ops, fx.region, eps);
  CHECK(part.epsilon == eps);
  CHECK(part.clusters.size() == part.sites.size());
  CHECK(part.clusters.size() >= 2);

  // Every closure vertex in exactly one cluster, nothing off the closure.
  std::vector<int> seen(static_cast<std::size_t>(fx.s.n_vertices), 0);
  for (const auto& cluster : part.clusters)
    for (Index v : cluster) ++seen[static_cast<std::size_t>(v)];
  for (Index v = 0; v < fx.s.n_vertices; ++v) {
    if (fx.region.vertex_mark[static_cast<std::size_t>(v)]) {
      CHECK(seen[static_cast<std::size_t>(v)] == 1);
      CHECK(part.cluster_of[static_cast<std::size_t>(v)] >= 0);
    } else {
      CHECK(seen[static_cast<std::size_t>(v)] == 0);
      CHECK(part.cluster_of[static_cast<std::size_t>(v)] == -1);
    }
  }

  // Each member lies within epsilon of its cluster site along closure paths,
  // and sites prefer strictly interior vertices.
  std::vector<bool> interior(static_cast<std::size_t>(fx.s.n_vertices), false);
  for (Index v : fx.region.interior_vertices) interior[static_cast<std::size_t>(v)] = true;
  for (std::size_t k = 0; k < part.clusters.size(); ++k) {
    const auto dist = closure_distances(fx.s, fx.region, part.sites[k]);
    bool has_interior = false;
    for (Index v : part.clusters[k]) {
      has_interior = has_interior || interior[static_cast<std::size_t>(v)];
      REQUIRE(dist.count(v) == 1);
      CHECK(dist.at(v) <= eps * (1.0 + 1e-12));
    }
    if (has_interior) CHECK(interior[static_cast<std::size_t>(part.sites[k])]);
    CHECK(part.cluster_of[static_cast<std::size_t>(part.sites[k])] == static_cast<Index>(k));
  }
}

TEST_CASE("partition rejects radii under three mesh lengths") {
  Fixture fx;
  CHECK_THROWS_AS(partition_subdomain(fx.ops, fx.region, 0.1), std::runtime_error);
}

TEST_CASE("charge clusters are exactly neutral and reproduce the reported error") {
  Fixture fx;
  const auto result = runge_approximate(fx.green, fx.phi, fx.cfg, 0.2);

  CHECK(result.charges.q.size() >= 2);
  CHECK(std::abs(result.charges.q.sum()) <= 1e-12);
  CHECK(result.report.epsilon == 0.2);
  CHECK(result.report.n_charges == static_cast<int>(result.charges.q.size()));
  CHECK(result.report.l1_residue ==
        doctest::Approx(result.charges.q.cwiseAbs().sum() / (2.0 * M_PI)).epsilon(1e-14));

  // The approximation is a mean-free superposition of unit-pole columns.
  CHECK(std::abs(fx.ops.mean(result.approximation.v)) <= 1e-9);

  // Recompute the off-closure C0 error independently.
  const auto ext = extend_harmonic(fx.ops, fx.cfg, fx.phi);
  double sup = 0.0;
  for (Index v = 0; v < fx.s.n_vertices; ++v)
    if (!fx.region.vertex_mark[static_cast<std::size_t>(v)])
      sup = std::max(sup, std::abs(ext.v[v] - result.approximation.v[v]));
  CHECK(result.report.sup_c0 == doctest::Approx(sup).epsilon(1e-12));
  CHECK(result.report.sup_c1 > 0.0);
}

TEST_CASE("fields with sources outside the region are rejected") {
  Fixture fx;
  Cochain0 bad = fx.phi;
  // A hard point defect far from the region makes the field non-harmonic there.
  bad.v[torus_vertex(32, 2, 2)] += Complex(1.0, 0.0);
  CHECK_THROWS_AS(runge_approximate(fx.green, bad, fx.cfg, 0.2), std::runtime_error);
}

TEST_CASE("halving the partition radius contracts the off-region error") {
  Fixture fx;
  const auto results = convergence_study(fx.green, fx.phi, fx.cfg, {0.14, 0.28});
  REQUIRE(results.size() == 2);
  CHECK(results[0].report.epsilon == 0.28);  // coarse to fine
  CHECK(results[1].report.epsilon == 0.14);
  CHECK(results[1].report.n_charges > results[0].report.n_charges);

  const double ratio = results[1].report.sup_c0 / results[0].report.sup_c0;
  CHECK(ratio >= 0.2);
  CHECK(ratio <= 0.8);
  CHECK(results[1].report.l1_residue <= 1.6 * results[0].report.l1_residue);
}
