#include "halos/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "halos/green.hpp"
#include "halos/harmonic.hpp"
#include "halos/io.hpp"

namespace halos {

namespace {

void stage(const char* name, const std::string& msg) { fmt::print(stderr, "[{}] {}\n", name, msg); }

// Smallest cluster radius the partition precondition admits.
double smallest_admissible_epsilon(const DiscreteSurface& s, const Subdomain& region) {
  double longest = 0.0;
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    if (region.vertex_mark[static_cast<std::size_t>(s.edges[e][0])] ||
        region.vertex_mark[static_cast<std::size_t>(s.edges[e][1])])
      longest = std::max(longest, s.edge_lengths[e]);
  }
  return 3.0 * longest * 1.0005;
}

std::vector<Index> dictionary_poles(const Subdomain& region, const std::array<Index, 6>& dipoles,
                                    int count) {
  std::vector<Index> pool;
  for (Index v : region.interior_vertices)
    if (std::find(dipoles.begin(), dipoles.end(), v) == dipoles.end()) pool.push_back(v);
  const int want = count + 1;  // one base pole plus `count` difference partners
  if (static_cast<int>(pool.size()) < want)
    throw std::runtime_error("disc region too small for the perturbation dictionary");
  std::vector<Index> picks;
  for (int k = 0; k < want; ++k)
    picks.push_back(pool[static_cast<std::size_t>(k) * (pool.size() - 1) / static_cast<std::size_t>(want - 1)]);
  std::sort(picks.begin(), picks.end());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  if (static_cast<int>(picks.size()) < 2)
    throw std::runtime_error("disc region too small for the perturbation dictionary");
  return picks;
}

void write_result_json(const std::string& path, const ExperimentConfig& cfg,
                       const ExperimentResult& res) {
  using nlohmann::json;
  json j;
  j["success"] = res.success;
  j["reason"] = res.reason;
  j["verdict"] = verdict_name(res.verdict);
  j["total_charge"] = res.total_charge;
  j["runge_epsilon"] = res.runge_epsilon;
  j["draws_used"] = res.search.draws_used;

  json conf;
  conf["n"] = cfg.n;
  conf["tau"] = {cfg.tau.real(), cfg.tau.imag()};
  conf["disc_center"] = cfg.disc_center;
  conf["disc_radius"] = cfg.disc_radius;
  conf["dipoles"] = cfg.dipoles;
  json strengths = json::array();
  for (const Complex& c : cfg.strengths) strengths.push_back({c.real(), c.imag()});
  conf["strengths"] = strengths;
  conf["seed"] = cfg.seed;
  conf["delta"] = cfg.delta;
  conf["max_draws"] = cfg.max_draws;
  conf["charge_budget"] = cfg.charge_budget;
  conf["runge_epsilon"] = cfg.runge_epsilon;
  conf["dictionary_size"] = cfg.dictionary_size;
  j["config"] = conf;

  json fields = json::array();
  for (const auto& r : res.errors)
    fields.push_back({{"sup_c0", r.sup_c0},
                      {"sup_c1", r.sup_c1},
                      {"l1_residue", r.l1_residue},
                      {"epsilon", r.epsilon},
                      {"n_charges", r.n_charges}});
  j["fields"] = fields;

  std::ofstream f(path);
  if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  f << j.dump(1) << '\n';
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res,
                   const DiscreteSurface* bordered, const std::vector<Cochain0>* final_fields) {
  if (cfg.out_dir.empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const auto path = [&](const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); };

  write_result_json(path("result.json"), cfg, res);

  for (std::size_t l = 0; l < res.charges.size(); ++l) {
    std::ofstream f(path(fmt::format("charges_{}.csv", l + 1)));
    write_charges_csv(f, res.charges[l]);
  }
  if (!res.search.fields.empty() || res.verdict != Verdict::fail || !res.predicates.reason.empty()) {
    std::ofstream f(path("predicates.json"));
    write_predicates_json(f, res.predicates);
  }
  if (bordered && final_fields) {
    std::vector<std::pair<std::string, Cochain0>> named;
    for (std::size_t l = 0; l < final_fields->size(); ++l)
      named.emplace_back(fmt::format("w{}", l + 1), (*final_fields)[l]);
    std::ofstream f(path("samples.csv"));
    write_fields_csv(f, *bordered, named);
  }
}

}  // namespace

Cochain0 transfer_field(const Cochain0& u, const std::vector<Index>& old_to_new, Index n_new) {
  Cochain0 out;
  out.v = Eigen::VectorXcd::Zero(n_new);
  for (std::size_t v = 0; v < old_to_new.size(); ++v)
    if (old_to_new[v] >= 0) out.v[old_to_new[v]] = u.v[static_cast<Eigen::Index>(v)];
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;

  stage("surface", fmt::format("torus n={} tau=({},{})", cfg.n, cfg.tau.real(), cfg.tau.imag()));
  const DiscreteSurface s = build_flat_torus(cfg.n, cfg.tau);
  const SurfaceOperators ops(s);
  const GreenEvaluator green(ops, {}, 128);

  const Subdomain disc = disc_subdomain(s, cfg.disc_center, cfg.disc_radius);
  stage("surface", fmt::format("disc region: {} faces, {} interior vertices", disc.faces.size(),
                               disc.interior_vertices.size()));

  std::unordered_set<Index> frontier(disc.frontier_vertices.begin(), disc.frontier_vertices.end());
  for (Index a : cfg.dipoles) {
    if (a < 0 || a >= s.n_vertices || !disc.vertex_mark[static_cast<std::size_t>(a)] || frontier.count(a))
      throw std::runtime_error(fmt::format("dipole vertex {} is not strictly inside the disc", a));
  }

  bool all_zero = true;
  for (const Complex& c : cfg.strengths)
    if (c != Complex(0.0, 0.0)) all_zero = false;
  if (all_zero) {
    // Every field vanishes identically, so the projective tuple is zero on
    // the whole boundary. Report the earliest detectable failure.
    stage("search", "all strengths are zero; nothing to search");
    res.reason = "boundary_nonvanishing";
    write_outputs(cfg, res, nullptr, nullptr);
    return res;
  }

  stage("fields", "building dipole potentials");
  std::vector<Cochain0> base;
  for (int l = 0; l < 3; ++l)
    base.push_back(bipolar_field(green, cfg.dipoles[static_cast<std::size_t>(2 * l)],
                                 cfg.dipoles[static_cast<std::size_t>(2 * l + 1)],
                                 cfg.strengths[static_cast<std::size_t>(l)]));

  const auto poles = dictionary_poles(disc, cfg.dipoles, cfg.dictionary_size);
  std::vector<Cochain0> dictionary;
  for (std::size_t k = 1; k < poles.size(); ++k) {
    Cochain0 d;
    d.v = (green.column(poles[k]) - green.column(poles[0])).cast<Complex>();
    dictionary.push_back(std::move(d));
  }
  stage("fields", fmt::format("dictionary: {} difference fields", dictionary.size()));

  std::vector<Index> old_to_new;
  const DiscreteSurface bordered = remove_subdomain(s, disc, &old_to_new);
  const SurfaceOperators ops_b(bordered);

  std::vector<Cochain0> base_b, dict_b;
  for (const auto& u : base) base_b.push_back(transfer_field(u, old_to_new, bordered.n_vertices));
  for (const auto& u : dictionary) dict_b.push_back(transfer_field(u, old_to_new, bordered.n_vertices));

  stage("search", fmt::format("perturbation search: delta={} max_draws={} seed={}", cfg.delta,
                              cfg.max_draws, cfg.seed));
  res.search = perturbation_search(ops_b, base_b, dict_b, cfg.delta, cfg.max_draws, cfg.seed);
  stage("search", fmt::format("{} after {} draws",
                              verdict_name(res.search.report.verdict), res.search.draws_used));
  if (!res.search.success) {
    res.reason = "perturbation_search";
    res.predicates = res.search.report;
    write_outputs(cfg, res, nullptr, nullptr);
    return res;
  }

  // Reassemble the accepted fields on the closed surface from the draw's
  // coefficients; they stay harmonic off the disc closure.
  std::vector<Cochain0> fields = base;
  for (std::size_t l = 0; l < fields.size(); ++l)
    for (std::size_t k = 0; k < dictionary.size(); ++k)
      fields[l].v += res.search.coefficients(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) *
                     dictionary[k].v;

  res.runge_epsilon = cfg.runge_epsilon > 0.0 ? cfg.runge_epsilon : smallest_admissible_epsilon(s, disc);
  stage("runge", fmt::format("charge replacement at epsilon={}", res.runge_epsilon));
  const ExtensionConfig ext = make_extension_config(ops, disc);

  std::vector<Cochain0> replaced;
  for (std::size_t l = 0; l < fields.size(); ++l) {
    RungeResult r = runge_approximate(green, fields[l], ext, res.runge_epsilon);
    stage("runge", fmt::format("field {}: {} charges, sup error {:.3e}, |q|_1/2pi = {:.6f}", l + 1,
                               r.report.n_charges, r.report.sup_c0, r.report.l1_residue));
    res.total_charge += r.report.l1_residue;
    res.errors.push_back(r.report);
    res.charges.push_back(std::move(r.charges));
    replaced.push_back(std::move(r.approximation));
  }

  bool charges_inside = true;
  for (const auto& c : res.charges)
    for (Index v : c.vertices)
      if (!disc.vertex_mark[static_cast<std::size_t>(v)]) charges_inside = false;

  std::vector<Cochain0> replaced_b;
  for (const auto& u : replaced) replaced_b.push_back(transfer_field(u, old_to_new, bordered.n_vertices));
  stage("predicates", "embedding diagnostics of the replaced map");
  const CanonicalMap map = canonical_map(ops_b, replaced_b);
  res.predicates = embedding_predicates(ops_b, map);
  res.verdict = res.predicates.verdict;
  stage("predicates", fmt::format("{} (reason: {})", verdict_name(res.verdict),
                                  res.predicates.reason.empty() ? "-" : res.predicates.reason));

  if (!charges_inside)
    res.reason = "charges_outside_region";
  else if (res.total_charge > cfg.charge_budget)
    res.reason = "charge_budget";
  else if (res.verdict == Verdict::fail)
    res.reason = res.predicates.reason;
  res.success = res.reason.empty();

  write_outputs(cfg, res, &bordered, &replaced_b);
  return res;
}

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  cfg.n = 64;
  cfg.tau = Complex(0.0, 1.0);
  cfg.disc_center = 32 * 64 + 32;
  cfg.disc_radius = 0.22;
  cfg.dipoles = {32 * 64 + 36, 32 * 64 + 28,   // horizontal pair
                 36 * 64 + 32, 28 * 64 + 32,   // vertical pair
                 35 * 64 + 35, 29 * 64 + 29};  // diagonal pair
  cfg.strengths = {Complex(0.06, 0.0), Complex(0.0, 0.06), Complex(0.04, 0.04)};
  cfg.seed = 1;
  cfg.delta = 0.02;
  cfg.max_draws = 12;
  cfg.charge_budget = 0.5;
  cfg.runge_epsilon = 0.0;
  cfg.dictionary_size = 4;
  return cfg;
}

}  // namespace halos
