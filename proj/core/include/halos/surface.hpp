#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace halos {

using Index = std::int32_t;
using Complex = std::complex<double>;

// Triangulated surface with an intrinsic metric: the connectivity plus one
// length per edge. Planar coordinates are optional extra data (present for
// the flat torus and the annulus); every geometric quantity downstream is
// computed from edge lengths alone, so the coordinates never disagree with
// the metric unless the mesh is broken, which validate() reports.
struct DiscreteSurface {
  Index n_vertices = 0;
  std::vector<std::array<Index, 3>> triangles;  // ccw w.r.t. the surface orientation

  // Canonical edge enumeration: all unordered pairs {a,b} that appear in a
  // triangle, sorted lexicographically as (min,max). edge_lengths is parallel
  // to this ordering, which makes the serialized form self-describing.
  std::vector<std::array<Index, 2>> edges;
  std::vector<double> edge_lengths;

  // Boundary loops as closed vertex cycles, oriented with the surface on the
  // left. Empty for closed surfaces.
  std::vector<std::vector<Index>> boundary_loops;

  // Marked vertex classes (kept stable under refinement, protected from
  // subdomain removal). Often empty.
  std::vector<std::vector<Index>> node_classes;

  // Optional planar coordinates, one per vertex. For a flat torus these live
  // in a fundamental domain and planar_periods holds the two lattice vectors;
  // periods are zero otherwise.
  std::vector<std::array<double, 2>> planar_coords;
  std::array<std::array<double, 2>, 2> planar_periods{{{0.0, 0.0}, {0.0, 0.0}}};

  // Derived connectivity, rebuilt by finalize().
  std::unordered_map<std::uint64_t, Index> edge_lookup;
  std::vector<std::array<Index, 3>> triangle_edges;    // edge ids of sides (0-1, 1-2, 2-0)
  std::vector<std::array<Index, 2>> edge_triangles;    // incident faces, -1 when boundary
  std::vector<std::vector<Index>> vertex_triangles;
  std::vector<std::vector<Index>> vertex_neighbors;
  std::vector<bool> is_boundary_vertex;

  bool has_planar() const { return !planar_coords.empty(); }
  bool is_periodic() const {
    return planar_periods[0][0] != 0.0 || planar_periods[0][1] != 0.0 ||
           planar_periods[1][0] != 0.0 || planar_periods[1][1] != 0.0;
  }

  Index n_edges() const { return static_cast<Index>(edges.size()); }
  Index n_triangles() const { return static_cast<Index>(triangles.size()); }
  int euler_characteristic() const {
    return static_cast<int>(n_vertices) - static_cast<int>(edges.size()) +
           static_cast<int>(triangles.size());
  }

  Index edge_id(Index a, Index b) const;
  double edge_length(Index a, Index b) const;
  std::array<double, 3> triangle_lengths(Index f) const;  // (l01, l12, l20)
  double triangle_area(Index f) const;                    // Heron from lengths
  double total_area() const;
  double max_edge_length() const;

  // Nearest periodic copy of planar_coords[b] relative to planar_coords[a].
  std::array<double, 2> planar_near(Index a, Index b) const;

  // Enumerate edges from the triangles (lexicographic low-high pairs) and
  // rebuild edge_lookup; a no-op on the edge list itself when edges is
  // already set. Builders call this to learn the canonical edge order before
  // the lengths exist.
  void enumerate_edges();

  // Rebuild the derived tables from n_vertices/triangles/edge data. If edges
  // is empty it is enumerated from the triangles (edge_lengths must then be
  // supplied in canonical order or filled from planar coordinates). If
  // boundary_loops is empty, loops are detected from the connectivity.
  void finalize();
};

// Uniform n-by-n triangulated flat torus with modulus tau (Im tau > 0), unit
// cell spanned by 1 and tau, total area Im(tau). Requires n >= 4.
DiscreteSurface build_flat_torus(int n, Complex tau);

// Planar annulus r <= |z| <= 1 with geometrically spaced radial rings.
// Requires 0 < r < 1, radial >= 3 rings, angular >= 8 spokes.
DiscreteSurface build_annulus(double inner_radius, int radial, int angular);

// Icosahedral sphere, `level` rounds of 1-to-4 subdivision with projection to
// the unit sphere; the metric is the chordal (polyhedral) one. level >= 1.
DiscreteSurface build_sphere(int level);

// Global 1-to-4 refinement. New vertices sit at edge midpoints and child edge
// lengths are the exact midsegment lengths of the flat parent faces, so the
// refined metric is the metric of the same polyhedral surface.
DiscreteSurface refine(const DiscreteSurface& s);

// Structural validation: triangle inequalities, positive areas, each edge in
// at most two faces with opposite orientations, boundary loops that match the
// connectivity, disjoint node classes, and (when planar coordinates are
// present) agreement of coordinates with edge lengths. Throws
// std::runtime_error with a description of the first violation.
void validate(const DiscreteSurface& s);

// Face-supported open subdomain with its derived vertex sets.
struct Subdomain {
  std::vector<Index> faces;              // sorted unique face ids
  std::vector<Index> interior_vertices;  // every incident face in the subdomain
  std::vector<Index> frontier_vertices;  // incident to faces on both sides
  std::vector<bool> face_mark;           // size n_triangles
  std::vector<bool> vertex_mark;         // touches some subdomain face
};

Subdomain make_subdomain(const DiscreteSurface& s, std::vector<Index> faces);

// Faces whose three vertices all lie within intrinsic (Dijkstra) distance
// `radius` of `center`. Throws if the result is empty.
Subdomain disc_subdomain(const DiscreteSurface& s, Index center, double radius);

// Delete the subdomain's faces, producing a bordered surface whose new
// boundary is the subdomain frontier. Requires the removed region to be a
// combinatorial disc that contains no marked vertices and leaves the rest
// connected. old_to_new (optional) receives the vertex index map, -1 for
// removed vertices.
DiscreteSurface remove_subdomain(const DiscreteSurface& s, const Subdomain& sub,
                                 std::vector<Index>* old_to_new = nullptr);

// Single-source Dijkstra distances along mesh edges.
std::vector<double> geodesic_distances(const DiscreteSurface& s, Index source);

}  // namespace halos
