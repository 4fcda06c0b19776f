#include "halos/runge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

namespace halos {

namespace {

std::vector<int> ring_depths(const DiscreteSurface& s, const Subdomain& region) {
  std::vector<int> depth(static_cast<std::size_t>(s.n_vertices), 0);
  std::vector<bool> interior(static_cast<std::size_t>(s.n_vertices), false);
  for (Index v : region.interior_vertices) interior[static_cast<std::size_t>(v)] = true;
  std::queue<Index> q;
  for (Index v : region.frontier_vertices) q.push(v);
  while (!q.empty()) {
    const Index v = q.front();
    q.pop();
    for (Index u : s.vertex_neighbors[static_cast<std::size_t>(v)]) {
      if (!interior[static_cast<std::size_t>(u)] || depth[static_cast<std::size_t>(u)] > 0) continue;
      depth[static_cast<std::size_t>(u)] = depth[static_cast<std::size_t>(v)] + 1;
      q.push(u);
    }
  }
  return depth;
}

}  // namespace

ExtensionConfig make_extension_config(const SurfaceOperators& ops, const Subdomain& region,
                                      int ramp_depth, int bump_ramp) {
  const auto& s = ops.surface();
  ExtensionConfig cfg;
  cfg.region = region;
  cfg.ring_depth = ring_depths(s, region);

  int max_depth = 0;
  for (Index v : region.interior_vertices)
    max_depth = std::max(max_depth, cfg.ring_depth[static_cast<std::size_t>(v)]);
  if (ramp_depth <= 0) ramp_depth = std::max(2, (max_depth + 1) / 2);
  if (bump_ramp <= 0) bump_ramp = 1;
  if (max_depth <= ramp_depth)
    throw std::runtime_error(
        fmt::format("subdomain too shallow for cutoffs: interior depth {} but the chi1 ramp needs more than {}",
                    max_depth, ramp_depth));
  cfg.ramp_depth = ramp_depth;
  cfg.bump_ramp = bump_ramp;

  cfg.chi1 = Eigen::VectorXd::Ones(s.n_vertices);
  cfg.chi2 = Eigen::VectorXd::Zero(s.n_vertices);
  for (Index v = 0; v < s.n_vertices; ++v) {
    const int d = cfg.ring_depth[static_cast<std::size_t>(v)];
    if (d > 0) {
      cfg.chi1[v] = std::max(0.0, 1.0 - static_cast<double>(d) / ramp_depth);
      if (d > ramp_depth)
        cfg.chi2[v] = std::min(1.0, static_cast<double>(d - ramp_depth) / bump_ramp);
    }
  }

  const double bump_mass = ops.mass().dot(cfg.chi2);
  if (bump_mass <= 0.0) throw std::runtime_error("cutoff bump has no mass");
  cfg.chi2_normalization = 1.0 / bump_mass;
  return cfg;
}

Cochain0 extend_harmonic(const SurfaceOperators& ops, const ExtensionConfig& cfg, const Cochain0& phi,
                         const SolveOptions& opts) {
  const auto& s = ops.surface();
  if (phi.v.size() != s.n_vertices) throw std::runtime_error("extend_harmonic: field size mismatch");

  // Harmonic fill of the region interior from the frontier data, then the
  // chi1 taper, then an exact mean correction against the interior bump.
  std::vector<Index> fixed;
  std::vector<bool> interior(static_cast<std::size_t>(s.n_vertices), false);
  for (Index v : cfg.region.interior_vertices) interior[static_cast<std::size_t>(v)] = true;
  for (Index v = 0; v < s.n_vertices; ++v)
    if (!interior[static_cast<std::size_t>(v)]) fixed.push_back(v);
  Eigen::VectorXcd fixed_values(fixed.size());
  for (std::size_t k = 0; k < fixed.size(); ++k) fixed_values[static_cast<Eigen::Index>(k)] = phi.v[fixed[k]];

  Cochain0 fill = dirichlet_solve(ops, fixed, fixed_values, nullptr, opts);
  Eigen::VectorXcd tapered = cfg.chi1.cast<Complex>().asDiagonal() * fill.v;
  const Complex m = ops.mean(tapered);
  tapered -= (m * cfg.chi2_normalization) * cfg.chi2.cast<Complex>();
  return {std::move(tapered)};
}

Partition partition_subdomain(const SurfaceOperators& ops, const Subdomain& region, double epsilon) {
  const auto& s = ops.surface();

  double max_edge = 0.0;
  for (Index e = 0; e < s.n_edges(); ++e) {
    const auto& ends = s.edges[static_cast<std::size_t>(e)];
    if (region.vertex_mark[static_cast<std::size_t>(ends[0])] &&
        region.vertex_mark[static_cast<std::size_t>(ends[1])])
      max_edge = std::max(max_edge, s.edge_lengths[static_cast<std::size_t>(e)]);
  }
  if (epsilon < 3.0 * max_edge)
    throw std::runtime_error(fmt::format(
        "partition radius {} too small: needs at least three times the longest edge ({}) in the region",
        epsilon, max_edge));

  Partition part;
  part.epsilon = epsilon;
  part.cluster_of.assign(static_cast<std::size_t>(s.n_vertices), -1);

  std::vector<Index> members;  // vertices of the closure in id order
  for (Index v = 0; v < s.n_vertices; ++v)
    if (region.vertex_mark[static_cast<std::size_t>(v)]) members.push_back(v);

  // Greedy covering: lowest unassigned vertex seeds a Dijkstra ball of radius
  // epsilon/2 within the closure; everything newly reached joins the cluster.
  for (Index seed : members) {
    if (part.cluster_of[static_cast<std::size_t>(seed)] >= 0) continue;
    const Index label = static_cast<Index>(part.clusters.size());
    std::vector<Index> cluster;
    using Item = std::pair<double, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    std::unordered_map<Index, double> dist;
    dist[seed] = 0.0;
    q.push({0.0, seed});
    while (!q.empty()) {
      const auto [d, v] = q.top();
      q.pop();
      if (d > dist[v]) continue;
      if (part.cluster_of[static_cast<std::size_t>(v)] >= 0) continue;
      part.cluster_of[static_cast<std::size_t>(v)] = label;
      cluster.push_back(v);
      for (Index u : s.vertex_neighbors[static_cast<std::size_t>(v)]) {
        if (!region.vertex_mark[static_cast<std::size_t>(u)]) continue;
        if (part.cluster_of[static_cast<std::size_t>(u)] >= 0) continue;
        const double nd = d + s.edge_length(v, u);
        if (nd > epsilon / 2.0) continue;
        auto itd = dist.find(u);
        if (itd == dist.end() || nd < itd->second) {
          dist[u] = nd;
          q.push({nd, u});
        }
      }
    }
    part.clusters.push_back(std::move(cluster));
  }

  // Medoid site per cluster: minimize the area-weighted sum of in-cluster
  // graph distances, restricted to strictly interior candidates when any
  // exist. Ties break to the lowest vertex id.
  std::vector<bool> interior(static_cast<std::size_t>(s.n_vertices), false);
  for (Index v : region.interior_vertices) interior[static_cast<std::size_t>(v)] = true;
  for (const auto& cluster : part.clusters) {
    std::vector<Index> candidates;
    for (Index v : cluster)
      if (interior[static_cast<std::size_t>(v)]) candidates.push_back(v);
    if (candidates.empty()) candidates = cluster;

    Index best = candidates.front();
    double best_cost = std::numeric_limits<double>::infinity();
    for (Index cand : candidates) {
      // Dijkstra within the cluster only.
      std::unordered_map<Index, double> d;
      using Item = std::pair<double, Index>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
      d[cand] = 0.0;
      q.push({0.0, cand});
      const Index label = part.cluster_of[static_cast<std::size_t>(cand)];
      while (!q.empty()) {
        const auto [dd, v] = q.top();
        q.pop();
        if (dd > d[v]) continue;
        for (Index u : s.vertex_neighbors[static_cast<std::size_t>(v)]) {
          if (part.cluster_of[static_cast<std::size_t>(u)] != label) continue;
          const double nd = dd + s.edge_length(v, u);
          auto itd = d.find(u);
          if (itd == d.end() || nd < itd->second) {
            d[u] = nd;
            q.push({nd, u});
          }
        }
      }
      double cost = 0.0;
      for (Index v : cluster) {
        auto itd = d.find(v);
        // Unreachable within the cluster (can happen for a frontier-pinched
        // cover): fall back to the full-radius bound.
        cost += ops.lumped_areas()[v] * (itd == d.end() ? epsilon : itd->second);
      }
      if (cost < best_cost - 1e-15 || (std::abs(cost - best_cost) <= 1e-15 && cand < best)) {
        best_cost = cost;
        best = cand;
      }
    }
    part.sites.push_back(best);
  }
  return part;
}

RungeResult runge_approximate(const GreenEvaluator& green, const Cochain0& phi,
                              const ExtensionConfig& cfg, double epsilon, double harmonic_pre_tol) {
  const SurfaceOperators& ops = green.ops();
  const auto& s = ops.surface();

  Cochain0 extended = extend_harmonic(ops, cfg, phi, green.options());
  Eigen::VectorXcd rho = ops.stiffness_apply(extended.v);

  // The input must be discretely harmonic off the closure: there the
  // extension agrees with it, so its integrated source must vanish there.
  double off_src = 0.0, scale = 0.0;
  for (Index v = 0; v < s.n_vertices; ++v) {
    const double a = std::abs(rho[v]);
    scale = std::max(scale, a);
    if (!cfg.region.vertex_mark[static_cast<std::size_t>(v)]) off_src = std::max(off_src, a);
  }
  if (scale > 0.0 && off_src > harmonic_pre_tol * scale)
    throw std::runtime_error(fmt::format(
        "runge_approximate: field is not harmonic off the region (residual {} of scale {})", off_src, scale));

  Partition part = partition_subdomain(ops, cfg.region, epsilon);

  RungeResult out;
  const Index nc = static_cast<Index>(part.clusters.size());
  out.charges.vertices = part.sites;
  out.charges.q = Eigen::VectorXcd::Zero(nc);
  Eigen::VectorXd cluster_area = Eigen::VectorXd::Zero(nc);
  for (Index k = 0; k < nc; ++k) {
    for (Index v : part.clusters[static_cast<std::size_t>(k)]) {
      out.charges.q[k] += rho[v];
      cluster_area[k] += ops.lumped_areas()[v];
    }
  }

  // Neutrality, exactly: spread the closure defect area-proportionally, then
  // push the floating-point dust onto the strongest charge.
  Complex defect = out.charges.q.sum();
  const double total_cluster_area = cluster_area.sum();
  for (Index k = 0; k < nc; ++k) out.charges.q[k] -= defect * (cluster_area[k] / total_cluster_area);
  Complex dust = out.charges.q.sum();
  Index strongest = 0;
  for (Index k = 1; k < nc; ++k)
    if (std::abs(out.charges.q[k]) > std::abs(out.charges.q[strongest])) strongest = k;
  out.charges.q[strongest] -= dust;

  out.approximation.v = Eigen::VectorXcd::Zero(s.n_vertices);
  for (Index k = 0; k < nc; ++k)
    out.approximation.v += out.charges.q[k] * green.column(out.charges.vertices[static_cast<std::size_t>(k)]).cast<Complex>();

  out.report.epsilon = epsilon;
  out.report.n_charges = static_cast<int>(nc);
  out.report.l1_residue = out.charges.q.cwiseAbs().sum() / (2.0 * M_PI);
  const Eigen::VectorXcd err = extended.v - out.approximation.v;
  for (Index v = 0; v < s.n_vertices; ++v)
    if (!cfg.region.vertex_mark[static_cast<std::size_t>(v)])
      out.report.sup_c0 = std::max(out.report.sup_c0, std::abs(err[v]));
  for (Index e = 0; e < s.n_edges(); ++e) {
    const Index a = s.edges[static_cast<std::size_t>(e)][0], b = s.edges[static_cast<std::size_t>(e)][1];
    if (cfg.region.vertex_mark[static_cast<std::size_t>(a)] || cfg.region.vertex_mark[static_cast<std::size_t>(b)])
      continue;
    out.report.sup_c1 = std::max(out.report.sup_c1,
                                 std::abs(err[a] - err[b]) / s.edge_lengths[static_cast<std::size_t>(e)]);
  }
  return out;
}

std::vector<RungeResult> convergence_study(const GreenEvaluator& green, const Cochain0& phi,
                                           const ExtensionConfig& cfg, const std::vector<double>& radii,
                                           double harmonic_pre_tol) {
  std::vector<double> sorted = radii;
  std::sort(sorted.rbegin(), sorted.rend());
  std::vector<RungeResult> out;
  out.reserve(sorted.size());
  for (double eps : sorted) out.push_back(runge_approximate(green, phi, cfg, eps, harmonic_pre_tol));
  return out;
}

}  // namespace halos
