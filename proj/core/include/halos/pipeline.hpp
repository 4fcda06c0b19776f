#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "halos/canonical.hpp"
#include "halos/runge.hpp"

namespace halos {

// End-to-end construction on a flat torus: three dipole fields with poles
// inside a disc region, a seeded search over dictionary perturbations until
// the induced projective map passes the embedding predicates on the torus
// minus the disc, then replacement of every field by finitely many point
// charges inside the disc, with the predicates re-checked on the replaced
// map and the total charge held under a budget.
struct ExperimentConfig {
  int n = 48;                      // torus resolution
  Complex tau = Complex(0.0, 1.0); // torus modulus
  Index disc_center = 0;           // seed vertex of the removed disc
  double disc_radius = 0.2;
  std::array<Index, 6> dipoles{};  // plus, minus vertex per field
  std::array<Complex, 3> strengths{};
  std::uint64_t seed = 1;
  double delta = 0.25;             // perturbation coefficient radius
  int max_draws = 16;
  double charge_budget = 0.5;      // allowed total |q|_1 / (2 pi) over all fields
  double runge_epsilon = 0.0;      // charge cluster radius; 0 picks the smallest admissible
  int dictionary_size = 4;         // perturbation dictionary entries
  std::string out_dir;             // empty writes nothing
};

struct ExperimentResult {
  bool success = false;
  std::string reason;              // first failing stage, empty on success
  Verdict verdict = Verdict::fail;
  PredicateReport predicates;
  SearchResult search;
  std::vector<ErrorReport> errors;   // per field
  std::vector<ChargeSet> charges;    // per field
  double total_charge = 0.0;         // sum of per-field l1 residues
  double runge_epsilon = 0.0;        // radius actually used
};

// Copy a vertex field through a vertex renumbering (old_to_new as produced
// by remove_subdomain); dropped vertices contribute nothing.
Cochain0 transfer_field(const Cochain0& u, const std::vector<Index>& old_to_new, Index n_new);

// Runs the whole construction. Deterministic in the config; writes
// result.json, charges_<k>.csv, predicates.json and samples.csv into
// out_dir when set. Progress goes to stderr. Configuration errors throw;
// honest negative outcomes return success = false with a reason.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// The frozen reference configuration exercised by the tests.
ExperimentConfig default_experiment();

}  // namespace halos
