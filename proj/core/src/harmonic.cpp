#include "halos/harmonic.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

namespace halos {

std::vector<Index> boundary_vertices(const DiscreteSurface& s) {
  std::vector<Index> out;
  for (const auto& loop : s.boundary_loops) out.insert(out.end(), loop.begin(), loop.end());
  return out;
}

Cochain0 harmonic_extension(const SurfaceOperators& ops, const Eigen::VectorXcd& boundary_values,
                            const SolveOptions& opts) {
  const auto fixed = boundary_vertices(ops.surface());
  if (fixed.empty()) throw std::runtime_error("harmonic_extension needs a bordered surface");
  return dirichlet_solve(ops, fixed, boundary_values, nullptr, opts);
}

Cochain0 extend_with_singularities(const SurfaceOperators& ops, const Eigen::VectorXcd& boundary_values,
                                   const std::vector<PointCharge>& charges, const SolveOptions& opts) {
  const auto& s = ops.surface();
  const auto fixed = boundary_vertices(s);
  if (fixed.empty()) throw std::runtime_error("extend_with_singularities needs a bordered surface");

  std::unordered_set<Index> charge_sites;
  for (const auto& ch : charges) {
    if (ch.vertex < 0 || ch.vertex >= s.n_vertices)
      throw std::runtime_error("charge vertex out of range");
    if (s.is_boundary_vertex[static_cast<std::size_t>(ch.vertex)])
      throw std::runtime_error(fmt::format("charge vertex {} lies on the boundary", ch.vertex));
    for (Index nb : s.vertex_neighbors[static_cast<std::size_t>(ch.vertex)]) {
      if (s.is_boundary_vertex[static_cast<std::size_t>(nb)])
        throw std::runtime_error(fmt::format("charge vertex {} touches the boundary one-ring", ch.vertex));
      if (charge_sites.count(nb))
        throw std::runtime_error("charge vertices must be pairwise non-adjacent");
    }
    if (!charge_sites.insert(ch.vertex).second)
      throw std::runtime_error(fmt::format("duplicate charge vertex {}", ch.vertex));
  }

  // A vertex charge c is the point source L u = -2 pi c e_a: the cut flux
  // around the closed star then integrates to exactly +c.
  Eigen::VectorXcd src = Eigen::VectorXcd::Zero(s.n_vertices);
  for (const auto& ch : charges) src[ch.vertex] += Complex(-2.0 * M_PI, 0.0) * ch.c;
  return dirichlet_solve(ops, fixed, boundary_values, &src, opts);
}

Cochain0 bipolar_field(const GreenEvaluator& green, Index a_plus, Index a_minus, Complex c) {
  const auto& s = green.ops().surface();
  if (a_plus == a_minus) throw std::runtime_error("bipolar poles must differ");
  const auto& nb = s.vertex_neighbors[static_cast<std::size_t>(a_plus)];
  if (std::find(nb.begin(), nb.end(), a_minus) != nb.end())
    throw std::runtime_error("bipolar poles must not be adjacent");
  for (Index r : nb) {
    const auto& nb2 = s.vertex_neighbors[static_cast<std::size_t>(r)];
    if (std::find(nb2.begin(), nb2.end(), a_minus) != nb2.end())
      throw std::runtime_error("bipolar poles must not share a one-ring");
  }

  const Eigen::VectorXd& gp = green.column(a_plus);
  const Eigen::VectorXd& gm = green.column(a_minus);
  Eigen::VectorXcd u = (2.0 * M_PI * c) * (gm - gp).cast<Complex>();
  return {std::move(u)};
}

Cochain0 dirichlet_to_neumann(const SurfaceOperators& ops, const Eigen::VectorXcd& boundary_values,
                              const SolveOptions& opts) {
  const auto& s = ops.surface();
  Cochain0 fill = harmonic_extension(ops, boundary_values, opts);
  Eigen::VectorXcd flux = ops.stiffness_apply(fill.v);
  for (Index v = 0; v < s.n_vertices; ++v)
    if (!s.is_boundary_vertex[static_cast<std::size_t>(v)]) flux[v] = 0.0;
  return {std::move(flux)};
}

Complex loop_sum(const DiscreteSurface& s, const Cochain0& flux, std::size_t loop) {
  if (loop >= s.boundary_loops.size()) throw std::runtime_error("loop index out of range");
  Complex total = 0.0;
  for (Index v : s.boundary_loops[loop]) total += flux.v[v];
  return total;
}

std::vector<ResidueRow> residues_report(const SurfaceOperators& ops, const Cochain0& u,
                                        const std::vector<PointCharge>& charges) {
  std::vector<ResidueRow> rows;
  rows.reserve(charges.size());
  for (const auto& ch : charges) rows.push_back({ch.vertex, ch.c, residue(ops, u, ch.vertex)});
  return rows;
}

}  // namespace halos
