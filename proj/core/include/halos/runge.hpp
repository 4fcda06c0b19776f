#pragma once

#include "halos/harmonic.hpp"

namespace halos {

// Point charges produced by clustering an integrated source; the strengths
// sum to zero exactly by construction (neutrality is enforced, not hoped for).
struct ChargeSet {
  std::vector<Index> vertices;
  Eigen::VectorXcd q;
};

// Cutoff data for the extension operator on a face subdomain. chi1 is 1 on
// the frontier and outside, decays linearly (in ring depth) to 0 inside;
// chi2 is a [0,1] bump supported strictly deeper than the chi1 ramp. Since a
// bump with values in [0,1] cannot also have unit mass, the unit-mass role
// is carried by the stored normalization 1/<chi2, w>.
struct ExtensionConfig {
  Subdomain region;
  Eigen::VectorXd chi1;
  Eigen::VectorXd chi2;
  double chi2_normalization = 0.0;
  std::vector<int> ring_depth;  // hops from the frontier, 0 on frontier and outside
  int ramp_depth = 0;
  int bump_ramp = 0;
};

// Build cutoffs from ring depths inside the subdomain. Throws when the
// subdomain is too shallow to fit the ramp plus a nonempty bump.
ExtensionConfig make_extension_config(const SurfaceOperators& ops, const Subdomain& region,
                                      int ramp_depth = 0, int bump_ramp = 1);

// Extension operator: given phi harmonic outside the closure of the region,
// produce a global field that agrees with phi there exactly, has exactly
// zero mass-weighted mean, and concentrates all non-harmonicity in the
// region's closure. Linear in phi.
Cochain0 extend_harmonic(const SurfaceOperators& ops, const ExtensionConfig& cfg, const Cochain0& phi,
                         const SolveOptions& opts = {});

// Covering of the subdomain closure by vertex clusters of radius at most
// epsilon/2 around deterministic seeds; sites are the clusters'
// area-weighted medoid vertices, preferring strictly interior ones.
struct Partition {
  double epsilon = 0.0;
  std::vector<Index> cluster_of;  // per vertex, -1 off the closure
  std::vector<std::vector<Index>> clusters;
  std::vector<Index> sites;
};

// Requires epsilon >= 3 * (longest edge touching the closure).
Partition partition_subdomain(const SurfaceOperators& ops, const Subdomain& region, double epsilon);

struct ErrorReport {
  double sup_c0 = 0.0;      // max vertex error off the closure
  double sup_c1 = 0.0;      // max first-difference error per unit length off the closure
  double l1_residue = 0.0;  // sum |q| / (2 pi)
  double epsilon = 0.0;
  int n_charges = 0;
};

struct RungeResult {
  ChargeSet charges;
  Cochain0 approximation;  // sum of Green columns weighted by the charges
  ErrorReport report;
};

// Replace a field harmonic outside the region by a finite superposition of
// Green columns with poles inside it: extend, integrate the source over the
// partition clusters, enforce exact neutrality, and superpose columns at the
// cluster sites. The input must be discretely harmonic off the closure up to
// harmonic_pre_tol (relative to its integrated-source scale).
RungeResult runge_approximate(const GreenEvaluator& green, const Cochain0& phi,
                              const ExtensionConfig& cfg, double epsilon,
                              double harmonic_pre_tol = 1e-8);

// One runge_approximate per radius, coarse to fine.
std::vector<RungeResult> convergence_study(const GreenEvaluator& green, const Cochain0& phi,
                                           const ExtensionConfig& cfg, const std::vector<double>& radii,
                                           double harmonic_pre_tol = 1e-8);

}  // namespace halos
