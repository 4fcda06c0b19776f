#pragma once

#include "halos/green.hpp"

namespace halos {

struct PointCharge {
  Index vertex;
  Complex c;
};

// Boundary vertices of a bordered surface, loops concatenated in order.
std::vector<Index> boundary_vertices(const DiscreteSurface& s);

// Harmonic interior fill of the given boundary data (listed in
// boundary_vertices order).
Cochain0 harmonic_extension(const SurfaceOperators& ops, const Eigen::VectorXcd& boundary_values,
                            const SolveOptions& opts = {});

// Harmonic function on a bordered surface with prescribed boundary values
// and point residues: discretely harmonic away from the charge vertices,
// residue(u, a_k) = c_k exactly up to solver tolerance. Charges must be
// strictly interior with interior one-rings, pairwise non-adjacent.
Cochain0 extend_with_singularities(const SurfaceOperators& ops, const Eigen::VectorXcd& boundary_values,
                                   const std::vector<PointCharge>& charges,
                                   const SolveOptions& opts = {});

// Difference of Green columns scaled to unit dipole strength:
// U = 2 pi c (g_{a_minus} - g_{a_plus}), harmonic off the poles with
// residue +c at a_plus and -c at a_minus. Poles must not share an edge or a
// one-ring.
Cochain0 bipolar_field(const GreenEvaluator& green, Index a_plus, Index a_minus, Complex c);

// Dirichlet-to-Neumann flux of the harmonic extension: the integrated
// conormal flux (L u)_v at each boundary vertex, zero at interior vertices.
// Positive pairing <flux(u), u> equals the Dirichlet energy, total flux per
// surface vanishes, and the map is symmetric.
Cochain0 dirichlet_to_neumann(const SurfaceOperators& ops, const Eigen::VectorXcd& boundary_values,
                              const SolveOptions& opts = {});

// Sum of a flux cochain over one boundary loop.
Complex loop_sum(const DiscreteSurface& s, const Cochain0& flux, std::size_t loop);

// Declared-versus-measured residue table for a field with point charges.
struct ResidueRow {
  Index vertex;
  Complex declared;
  Complex measured;
};
std::vector<ResidueRow> residues_report(const SurfaceOperators& ops, const Cochain0& u,
                                        const std::vector<PointCharge>& charges);

}  // namespace halos
