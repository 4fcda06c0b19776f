#pragma once

#include <string>

#include "halos/calculus.hpp"

namespace halos {

// Tuple of face-wise (1,0)-forms defining a face-sampled map to projective
// space: face f goes to [c_0(f) : ... : c_{m-1}(f)]. Per-face frame rotation
// multiplies the whole tuple by one unit complex number, so the projective
// point is frame-independent.
struct CanonicalMap {
  std::vector<FaceOneForm> forms;

  std::size_t arity() const { return forms.size(); }
  Index n_faces() const { return forms.empty() ? 0 : static_cast<Index>(forms[0].c.size()); }
};

CanonicalMap canonical_map(const SurfaceOperators& ops, const std::vector<Cochain0>& potentials);
CanonicalMap canonical_map_from_forms(std::vector<FaceOneForm> forms);

// One face's image: unit-normalized tuple, dominant chart, and affine
// coordinates (ratios against the chart component, chart entry dropped).
struct ProjectiveSample {
  Index face = -1;
  Eigen::VectorXcd normalized;
  int chart = 0;
  Eigen::VectorXcd affine;
};

ProjectiveSample projective_sample(const CanonicalMap& map, Index face);
std::vector<ProjectiveSample> projective_samples(const CanonicalMap& map);

// Chordal Fubini-Study distance sqrt(1 - |<p,q>|^2) of unit tuples.
double fs_distance(const ProjectiveSample& a, const ProjectiveSample& b);

struct PredicateOptions {
  double boundary_tol = 1e-3;    // min boundary tuple norm over median tuple norm
  double immersion_tol = 1e-3;   // min face derivative indicator over median
  double injective_tol = 0.3;    // boundary pair distance per arc step
  double proper_tol = 0.5;       // far-pair distance over collision threshold
  double collision_rel = 0.05;   // collision threshold as a share of median distance
  int min_arc_separation = 2;    // boundary arc distance (edges) below which pairs are near
  int surface_far_hops = 3;      // face-hop distance at which pairs count as far
  int max_exceptional_clusters = 12;
  int arc_cap = 8;               // arc separations are credited only up to this many steps
};

enum class Verdict { fail, almost_embedding, embedding };

struct ExceptionalCluster {
  std::vector<Index> faces;       // surface-adjacent faces involved in collisions
  bool touches_boundary = false;  // any distance-capped boundary involvement
  double min_distance = 0.0;      // closest collision inside the cluster
};

struct PredicateReport {
  bool boundary_nonvanishing = false;
  bool immersion = false;
  bool boundary_injective = false;
  bool proper = false;
  double boundary_margin = 0.0;
  double immersion_margin = 0.0;
  double injective_margin = 0.0;
  double proper_margin = 0.0;
  double collision_threshold = 0.0;
  std::vector<ExceptionalCluster> exceptional;
  int n_interior_clusters = 0;
  Verdict verdict = Verdict::fail;
  std::string reason;  // first failing predicate, or the cluster-cap breach
};

// Face-sampled embedding diagnostics. On a closed surface the boundary
// predicates pass vacuously. Verdict: embedding when every predicate holds
// and no exceptional cluster exists; almost_embedding when every predicate
// holds and at most max_exceptional_clusters interior clusters exist.
PredicateReport embedding_predicates(const SurfaceOperators& ops, const CanonicalMap& map,
                                     const PredicateOptions& opts = {});

// Deterministic probe-based covering degree: number of preimage clusters of
// a spread of interior target samples, median over probes.
int degree_estimate(const SurfaceOperators& ops, const CanonicalMap& map,
                    const PredicateOptions& opts = {});

// Reduce an m > 3 tuple to 3 forms through a seeded generic complex matrix
// with orthonormal rows; each reduced form is an exact linear combination of
// the inputs. Maps with arity <= 3 are returned unchanged.
CanonicalMap bishop_reduce(const CanonicalMap& map, std::uint64_t seed = 1);

struct SearchResult {
  bool success = false;
  std::vector<Cochain0> fields;       // perturbed potentials
  Eigen::MatrixXcd coefficients;      // fields x dictionary, |entry| <= delta
  int draws_used = 0;
  PredicateReport report;             // report of the accepted (or best) draw
};

// Try the unperturbed potentials first, then seeded dictionary perturbations
// with a radius ramp up to delta, until the predicates accept. Deterministic
// in (seed, max_draws).
SearchResult perturbation_search(const SurfaceOperators& ops, const std::vector<Cochain0>& base,
                                 const std::vector<Cochain0>& dictionary, double delta, int max_draws,
                                 std::uint64_t seed, const PredicateOptions& opts = {});

const char* verdict_name(Verdict v);

}  // namespace halos
