#pragma once

#include <list>
#include <unordered_map>

#include "halos/calculus.hpp"

namespace halos {

// Green columns of a closed surface: g_z solves L g = e_z - w with
// <g, w> = 0, where w is the unit-mass area weight vector. The column is a
// real vertex function with logarithmic coefficient -1/(2 pi) at the pole,
// symmetric in pole and evaluation point. Columns are cached with LRU
// eviction so sweeps over nearby poles stay cheap.
class GreenEvaluator {
 public:
  explicit GreenEvaluator(const SurfaceOperators& ops, SolveOptions opts = {},
                          std::size_t cache_capacity = 64);

  const SurfaceOperators& ops() const { return *ops_; }
  const SolveOptions& options() const { return opts_; }

  const Eigen::VectorXd& column(Index z) const;
  Cochain0 column_cochain(Index z) const;

  std::size_t cache_size() const { return cache_.size(); }
  std::size_t cache_hits() const { return hits_; }
  std::size_t cache_misses() const { return misses_; }

 private:
  const SurfaceOperators* ops_;
  SolveOptions opts_;
  std::size_t capacity_;
  mutable std::list<std::pair<Index, Eigen::VectorXd>> order_;  // front = most recent
  mutable std::unordered_map<Index, std::list<std::pair<Index, Eigen::VectorXd>>::iterator> cache_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

// Splitting of a vertex function into its mass-weighted mean and a potential:
// phi = mean + laplacian(potential) up to solver accuracy, <potential, w> = 0.
struct HarmonicParts {
  Complex mean;
  Cochain0 potential;
};

HarmonicParts hodge_decompose(const SurfaceOperators& ops, const Cochain0& phi,
                              const SolveOptions& opts = {});
Cochain0 hodge_reconstruct(const SurfaceOperators& ops, const HarmonicParts& parts);

// Closed-form reference for the flat-torus Green function in the unit-flux,
// mean-zero normalization: value at lattice-coordinate separation (d1, d2)
// from the pole, for modulus tau. The lattice row sums are evaluated in
// closed form (products of log distances to lattice translates plus a
// Bernoulli term), so truncation error decays geometrically in j_terms.
double torus_green_reference(Complex tau, double d1, double d2, int j_terms = 32);

}  // namespace halos
