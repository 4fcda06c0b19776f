#include "halos/green.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace halos {

GreenEvaluator::GreenEvaluator(const SurfaceOperators& ops, SolveOptions opts, std::size_t cache_capacity)
    : ops_(&ops), opts_(opts), capacity_(std::max<std::size_t>(1, cache_capacity)) {
  if (!ops.surface().boundary_loops.empty())
    throw std::runtime_error("GreenEvaluator needs a closed surface");
}

const Eigen::VectorXd& GreenEvaluator::column(Index z) const {
  if (z < 0 || z >= ops_->n_vertices()) throw std::runtime_error("green column: invalid vertex");
  auto it = cache_.find(z);
  if (it != cache_.end()) {
    ++hits_;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }
  ++misses_;

  Eigen::VectorXd b = -ops_->mass();
  b[z] += 1.0;
  Eigen::VectorXcd bc = b.cast<Complex>();
  Cochain0 g = stiffness_solve_mean_zero(*ops_, bc, opts_, nullptr);

  order_.emplace_front(z, g.v.real());
  cache_[z] = order_.begin();
  if (cache_.size() > capacity_) {
    cache_.erase(order_.back().first);
    order_.pop_back();
  }
  return order_.front().second;
}

Cochain0 GreenEvaluator::column_cochain(Index z) const {
  return {column(z).cast<Complex>()};
}

HarmonicParts hodge_decompose(const SurfaceOperators& ops, const Cochain0& phi, const SolveOptions& opts) {
  HarmonicParts parts;
  parts.mean = ops.mean(phi.v);
  Eigen::VectorXcd b = (phi.v.array() - parts.mean).matrix();
  b = b.array() * ops.lumped_areas().array().cast<Complex>();
  parts.potential = stiffness_solve_mean_zero(ops, b, opts, nullptr);
  return parts;
}

Cochain0 hodge_reconstruct(const SurfaceOperators& ops, const HarmonicParts& parts) {
  Cochain0 lap = laplacian(ops, parts.potential);
  return {(lap.v.array() + parts.mean).matrix()};
}

double torus_green_reference(Complex tau, double d1, double d2, int j_terms) {
  if (tau.imag() <= 0.0) throw std::runtime_error("torus reference needs Im(tau) > 0");

  auto frac = [](double x) { return x - std::floor(x); };
  const double y = frac(d2);
  const double x = frac(d1);
  if (std::abs(x) < 1e-15 && std::abs(y) < 1e-15)
    throw std::runtime_error("torus reference evaluated at the pole");

  // Mean-zero solution of the lattice Poisson problem, row-summed over the
  // dual lattice: the row transverse to the tau direction contributes a
  // Bernoulli polynomial, every other row a log distance to a translate of
  // the evaluation point, with geometrically decaying weight.
  auto bernoulli2 = [](double t) { return t * t - t + 1.0 / 6.0; };
  double g = 0.5 * tau.imag() * bernoulli2(y);

  for (int j = -j_terms; j <= j_terms; ++j) {
    const double dist = std::abs(j - y);
    const Complex zeta(d1 - (j - y) * tau.real(), dist * tau.imag());
    const Complex q = std::exp(Complex(0.0, 2.0 * M_PI) * zeta);
    const double mod = std::abs(1.0 - q);
    if (mod == 0.0) throw std::runtime_error("torus reference evaluated at a lattice pole");
    g -= std::log(mod) / (2.0 * M_PI);
  }
  return g;
}

}  // namespace halos
