#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "halos/surface.hpp"

using namespace halos;

TEST_CASE("square flat torus structure") {
  const auto s = build_flat_torus(8, Complex(0.0, 1.0));
  CHECK(s.n_vertices == 64);
  CHECK(s.n_triangles() == 128);
  CHECK(s.n_edges() == 192);
  CHECK(s.euler_characteristic() == 0);
  CHECK(s.boundary_loops.empty());
  CHECK(s.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_NOTHROW(validate(s));
}

TEST_CASE("skewed torus wraps consistently") {
  const auto s = build_flat_torus(6, Complex(0.3, 0.8));
  CHECK(s.total_area() == doctest::Approx(0.8).epsilon(1e-12));
  CHECK_NOTHROW(validate(s));

  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    const Index a = s.edges[e][0], b = s.edges[e][1];
    const auto pa = s.planar_coords[static_cast<std::size_t>(a)];
    const auto pb = s.planar_near(a, b);
    CHECK(std::hypot(pb[0] - pa[0], pb[1] - pa[1]) ==
          doctest::Approx(s.edge_lengths[e]).epsilon(1e-9));
  }
}

TEST_CASE("torus rejects bad parameters") {
  CHECK_THROWS_AS(build_flat_torus(3, Complex(0.0, 1.0)), std::runtime_error);
  CHECK_THROWS_AS(build_flat_torus(8, Complex(1.0, 0.0)), std::runtime_error);
  CHECK_THROWS_AS(build_flat_torus(8, Complex(0.0, -1.0)), std::runtime_error);
}

TEST_CASE("annulus carries two oriented boundary loops") {
  const auto s = build_annulus(0.25, 6, 24);
  REQUIRE(s.boundary_loops.size() == 2);
  CHECK(s.euler_characteristic() == 0);
  CHECK(s.boundary_loops[0].size() == 24);
  CHECK(s.boundary_loops[1].size() == 24);
  CHECK_NOTHROW(validate(s));

  // Total area close to the smooth annulus, inscribed so slightly below.
  const double smooth = M_PI * (1.0 - 0.25 * 0.25);
  CHECK(s.total_area() < smooth);
  CHECK(s.total_area() == doctest::Approx(smooth).epsilon(0.05));
}

TEST_CASE("icosahedral sphere closes up") {
  const auto s = build_sphere(2);
  CHECK(s.euler_characteristic() == 2);
  CHECK(s.boundary_loops.empty());
  CHECK(s.n_triangles() == 320);
  CHECK_NOTHROW(validate(s));
  CHECK(s.total_area() == doctest::Approx(4.0 * M_PI).epsilon(0.03));
}

TEST_CASE("refinement preserves the polyhedral metric") {
  const auto check_refine = [](const DiscreteSurface& s) {
    const auto r = refine(s);
    CHECK(r.n_vertices == s.n_vertices + s.n_edges());
    CHECK(r.n_triangles() == 4 * s.n_triangles());
    CHECK(r.total_area() == doctest::Approx(s.total_area()).epsilon(1e-12));
    CHECK(r.boundary_loops.size() == s.boundary_loops.size());
    for (std::size_t l = 0; l < s.boundary_loops.size(); ++l)
      CHECK(r.boundary_loops[l].size() == 2 * s.boundary_loops[l].size());
    CHECK_NOTHROW(validate(r));
  };
  check_refine(build_flat_torus(6, Complex(0.3, 0.8)));
  check_refine(build_annulus(0.3, 4, 12));
  check_refine(build_sphere(1));
}

TEST_CASE("disc subdomain marks interior and frontier consistently") {
  const auto s = build_flat_torus(16, Complex(0.0, 1.0));
  const Index center = 8 * 16 + 8;
  const auto sub = disc_subdomain(s, center, 0.25);
  CHECK(!sub.faces.empty());
  CHECK(sub.faces.size() < static_cast<std::size_t>(s.n_triangles()));

  for (Index v : sub.interior_vertices) {
    for (Index f : s.vertex_triangles[static_cast<std::size_t>(v)]) CHECK(sub.face_mark[static_cast<std::size_t>(f)]);
  }
  for (Index v : sub.frontier_vertices) {
    bool inside = false, outside = false;
    for (Index f : s.vertex_triangles[static_cast<std::size_t>(v)])
      (sub.face_mark[static_cast<std::size_t>(f)] ? inside : outside) = true;
    CHECK(inside);
    CHECK(outside);
  }
}

TEST_CASE("removing a disc from the torus yields one boundary loop") {
  const auto s = build_flat_torus(16, Complex(0.0, 1.0));
  const auto sub = disc_subdomain(s, 8 * 16 + 8, 0.25);
  std::vector<Index> old_to_new;
  const auto out = remove_subdomain(s, sub, &old_to_new);

  CHECK(out.euler_characteristic() == -1);  // torus minus an open disc
  CHECK(out.boundary_loops.size() == 1);
  CHECK_NOTHROW(validate(out));

  Index kept = 0;
  for (Index v = 0; v < s.n_vertices; ++v)
    if (old_to_new[static_cast<std::size_t>(v)] >= 0) ++kept;
  CHECK(kept == out.n_vertices);

  // Frontier vertices survive, disc interior vertices do not.
  for (Index v : sub.frontier_vertices) CHECK(old_to_new[static_cast<std::size_t>(v)] >= 0);
  for (Index v : sub.interior_vertices) CHECK(old_to_new[static_cast<std::size_t>(v)] < 0);
}

TEST_CASE("removing a disc from the annulus yields three loops") {
  const auto s = build_annulus(0.25, 9, 36);
  // A vertex near the middle ring.
  const Index center = 4 * 36;
  const auto sub = disc_subdomain(s, center, 0.12);
  const auto out = remove_subdomain(s, sub);
  CHECK(out.boundary_loops.size() == 3);
  CHECK(out.euler_characteristic() == -1);
  CHECK_NOTHROW(validate(out));
}

TEST_CASE("remove_subdomain rejects non-disc regions and marked vertices") {
  const auto s = build_flat_torus(12, Complex(0.0, 1.0));

  // A full horizontal band is an annulus, not a disc.
  std::vector<Index> band;
  for (Index f = 0; f < s.n_triangles(); ++f) {
    bool in_band = true;
    for (Index v : s.triangles[static_cast<std::size_t>(f)]) {
      const int j = v / 12;
      if (j < 3 || j > 5) in_band = false;
    }
    if (in_band) band.push_back(f);
  }
  const auto band_sub = make_subdomain(s, band);
  CHECK_THROWS_AS(remove_subdomain(s, band_sub), std::runtime_error);

  // A marked vertex inside the region blocks removal.
  auto marked = s;
  marked.node_classes = {{static_cast<Index>(6 * 12 + 6)}};
  marked.finalize();
  const auto sub = disc_subdomain(marked, 6 * 12 + 6, 0.2);
  CHECK_THROWS_AS(remove_subdomain(marked, sub), std::runtime_error);
}

TEST_CASE("geodesic distances respect the flat metric") {
  const int n = 12;
  const auto s = build_flat_torus(n, Complex(0.0, 1.0));
  const auto d = geodesic_distances(s, 0);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(1.0 / n).epsilon(1e-12));
  // Wrap: the last vertex of the row is one step the other way.
  CHECK(d[static_cast<std::size_t>(n - 1)] == doctest::Approx(1.0 / n).epsilon(1e-12));
  // Path metric dominates the straight-line distance.
  const auto far = static_cast<std::size_t>((n / 2) * n + n / 2);
  CHECK(d[far] >= std::sqrt(2.0) / 2 - 1e-9);
}
