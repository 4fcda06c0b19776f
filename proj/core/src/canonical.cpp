#include "halos/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "halos/random.hpp"

namespace halos {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Faces within `hops` steps of vertex-sharing adjacency, self included,
// sorted. Vertex-sharing (rather than edge-sharing) adjacency makes a whole
// vertex star one hop, which is the right notion of "surface-near" here.
std::vector<std::vector<Index>> face_neighborhoods(const DiscreteSurface& s, int hops) {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(s.n_triangles()));
  for (Index f = 0; f < s.n_triangles(); ++f) {
    std::unordered_set<Index> set;
    for (Index v : s.triangles[static_cast<std::size_t>(f)])
      for (Index g : s.vertex_triangles[static_cast<std::size_t>(v)])
        if (g != f) set.insert(g);
    adj[static_cast<std::size_t>(f)] = std::vector<Index>(set.begin(), set.end());
  }

  std::vector<std::vector<Index>> out(static_cast<std::size_t>(s.n_triangles()));
  std::vector<int> mark(static_cast<std::size_t>(s.n_triangles()), -1);
  for (Index f = 0; f < s.n_triangles(); ++f) {
    std::vector<Index> frontier = {f};
    mark[static_cast<std::size_t>(f)] = f;
    std::vector<Index> all = {f};
    for (int h = 0; h < hops; ++h) {
      std::vector<Index> next;
      for (Index u : frontier) {
        for (Index g : adj[static_cast<std::size_t>(u)]) {
          if (mark[static_cast<std::size_t>(g)] == f) continue;
          mark[static_cast<std::size_t>(g)] = f;
          next.push_back(g);
          all.push_back(g);
        }
      }
      frontier = std::move(next);
    }
    std::sort(all.begin(), all.end());
    out[static_cast<std::size_t>(f)] = std::move(all);
  }
  return out;
}

bool contains_sorted(const std::vector<Index>& sorted, Index x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

// Intrinsic distance between the barycenters of two edge-adjacent faces:
// unfold g across the shared edge into f's frame.
double hinge_distance(const SurfaceOperators& ops, Index f, Index g) {
  const auto& s = ops.surface();
  Index shared = -1;
  for (Index ef : s.triangle_edges[static_cast<std::size_t>(f)])
    for (Index eg : s.triangle_edges[static_cast<std::size_t>(g)])
      if (ef == eg) shared = ef;
  if (shared < 0) throw std::runtime_error("hinge_distance: faces do not share an edge");
  const Index a = s.edges[static_cast<std::size_t>(shared)][0], b = s.edges[static_cast<std::size_t>(shared)][1];

  auto corner_pos = [&](Index face, Index v) -> Complex {
    const auto& t = s.triangles[static_cast<std::size_t>(face)];
    const auto& fr = ops.frame(face);
    for (int k = 0; k < 3; ++k)
      if (t[static_cast<std::size_t>(k)] == v)
        return Complex(fr[static_cast<std::size_t>(k)].x(), fr[static_cast<std::size_t>(k)].y());
    throw std::runtime_error("hinge_distance: vertex not in face");
  };
  auto barycenter = [&](Index face) -> Complex {
    const auto& fr = ops.frame(face);
    return Complex((fr[0].x() + fr[1].x() + fr[2].x()) / 3.0, (fr[0].y() + fr[1].y() + fr[2].y()) / 3.0);
  };

  const Complex wa = corner_pos(f, a), wb = corner_pos(f, b);
  const Complex za = corner_pos(g, a), zb = corner_pos(g, b);
  // Orientation-preserving similarity gluing the edge; consistent surface
  // orientation already places g on the far side of the edge.
  const Complex rot = (wb - wa) / (zb - za);
  const Complex mapped = wa + rot * (barycenter(g) - za);
  return std::abs(barycenter(f) - mapped);
}

struct BoundaryMark {
  std::size_t loop;
  std::size_t pos;
  Index face;
};

std::vector<BoundaryMark> boundary_marks(const DiscreteSurface& s) {
  std::vector<BoundaryMark> marks;
  for (std::size_t l = 0; l < s.boundary_loops.size(); ++l) {
    const auto& loop = s.boundary_loops[l];
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Index a = loop[k], b = loop[(k + 1) % loop.size()];
      const Index e = s.edge_id(a, b);
      Index face = s.edge_triangles[static_cast<std::size_t>(e)][0];
      if (face < 0) face = s.edge_triangles[static_cast<std::size_t>(e)][1];
      marks.push_back({l, k, face});
    }
  }
  return marks;
}

double sample_median_distance(const std::vector<ProjectiveSample>& samples) {
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;
  std::vector<double> d;
  const std::size_t want = std::min<std::size_t>(4096, n * (n - 1) / 2);
  d.reserve(want);
  std::uint64_t state = 0x853c49e6748fea9bull;
  for (std::size_t k = 0; k < want; ++k) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    const std::size_t i = static_cast<std::size_t>((state >> 33) % n);
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    const std::size_t j = static_cast<std::size_t>((state >> 33) % n);
    if (i == j) continue;
    d.push_back(fs_distance(samples[i], samples[j]));
  }
  return median_of(std::move(d));
}

struct DisjointSet {
  std::vector<Index> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<Index>(i);
  }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

// All face pairs that are image-close (chordal distance <= tol) yet far on
// the surface. Hashed on the phase-normalized tuple for arity <= 3, direct
// otherwise.
std::vector<std::tuple<Index, Index, double>> collision_pairs(
    const std::vector<ProjectiveSample>& samples, double tol,
    const std::vector<std::vector<Index>>& neighborhoods) {
  std::vector<std::tuple<Index, Index, double>> bad;
  const Index nf = static_cast<Index>(samples.size());
  if (tol <= 0.0 || nf < 2) return bad;
  const std::size_t m = static_cast<std::size_t>(samples[0].normalized.size());

  auto consider = [&](Index f, Index g) {
    if (f > g) std::swap(f, g);
    if (f == g) return;
    if (contains_sorted(neighborhoods[static_cast<std::size_t>(f)], g)) return;
    const double d = fs_distance(samples[static_cast<std::size_t>(f)], samples[static_cast<std::size_t>(g)]);
    if (d <= tol) bad.emplace_back(f, g, d);
  };

  if (m > 3) {
    for (Index f = 0; f < nf; ++f)
      for (Index g = f + 1; g < nf; ++g) consider(f, g);
  } else {
    // Bucket the phase-normalized representative on a grid of pitch tol; a
    // colliding pair lands within one cell in every coordinate. Components
    // near the dominant magnitude each contribute a representative so chart
    // ties cannot hide a pair.
    const double cell = tol;
    std::unordered_multimap<std::uint64_t, Index> buckets;
    std::vector<std::vector<std::pair<std::uint64_t, std::vector<long>>>> keys(static_cast<std::size_t>(nf));

    auto key_of = [&](const std::vector<long>& cells) {
      std::uint64_t h = 1469598103934665603ull;
      for (long c : cells) {
        h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ull;
        h *= 1099511628211ull;
      }
      return h;
    };

    for (Index f = 0; f < nf; ++f) {
      const auto& p = samples[static_cast<std::size_t>(f)].normalized;
      if (p.size() == 0 || p.norm() == 0.0) continue;
      double maxmag = 0.0;
      for (std::size_t j = 0; j < m; ++j) maxmag = std::max(maxmag, std::abs(p[static_cast<Eigen::Index>(j)]));
      for (std::size_t j = 0; j < m; ++j) {
        const Complex pj = p[static_cast<Eigen::Index>(j)];
        if (std::abs(pj) < 0.7 * maxmag) continue;
        const Complex phase = std::conj(pj) / std::abs(pj);
        std::vector<long> cells(2 * m);
        for (std::size_t k = 0; k < m; ++k) {
          const Complex v = p[static_cast<Eigen::Index>(k)] * phase;
          cells[2 * k] = std::lround(std::floor(v.real() / cell));
          cells[2 * k + 1] = std::lround(std::floor(v.imag() / cell));
        }
        const std::uint64_t h = key_of(cells);
        buckets.emplace(h, f);
        keys[static_cast<std::size_t>(f)].push_back({h, std::move(cells)});
      }
    }

    std::unordered_set<std::uint64_t> seen_pairs;
    std::vector<long> probe(2 * m);
    for (Index f = 0; f < nf; ++f) {
      for (const auto& [h0, cells] : keys[static_cast<std::size_t>(f)]) {
        const std::size_t dims = cells.size();
        std::vector<int> off(dims, -1);
        while (true) {
          for (std::size_t d = 0; d < dims; ++d) probe[d] = cells[d] + off[d];
          const std::uint64_t h = key_of(probe);
          auto range = buckets.equal_range(h);
          for (auto it = range.first; it != range.second; ++it) {
            const Index g = it->second;
            if (g == f) continue;
            const std::uint64_t pk =
                (static_cast<std::uint64_t>(static_cast<std::uint32_t>(std::min(f, g))) << 32) |
                static_cast<std::uint32_t>(std::max(f, g));
            if (seen_pairs.insert(pk).second) consider(f, g);
          }
          std::size_t d = 0;
          while (d < dims && off[d] == 1) off[d++] = -1;
          if (d == dims) break;
          ++off[d];
        }
      }
    }
  }

  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  return bad;
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::fail: return "fail";
    case Verdict::almost_embedding: return "almost_embedding";
    case Verdict::embedding: return "embedding";
  }
  return "fail";
}

CanonicalMap canonical_map(const SurfaceOperators& ops, const std::vector<Cochain0>& potentials) {
  if (potentials.size() < 2) throw std::runtime_error("canonical map needs at least two potentials");
  CanonicalMap map;
  map.forms.reserve(potentials.size());
  for (const auto& u : potentials) {
    if (u.v.size() != ops.n_vertices()) throw std::runtime_error("potential size mismatch");
    map.forms.push_back(del(ops, u));
  }
  return map;
}

CanonicalMap canonical_map_from_forms(std::vector<FaceOneForm> forms) {
  if (forms.size() < 2) throw std::runtime_error("canonical map needs at least two forms");
  for (const auto& f : forms)
    if (f.c.size() != forms[0].c.size()) throw std::runtime_error("form size mismatch");
  return {std::move(forms)};
}

ProjectiveSample projective_sample(const CanonicalMap& map, Index face) {
  const std::size_t m = map.arity();
  ProjectiveSample s;
  s.face = face;
  s.normalized.resize(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) s.normalized[static_cast<Eigen::Index>(j)] = map.forms[j].c[face];
  const double norm = s.normalized.norm();
  s.chart = 0;
  double best = -1.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double a = std::abs(s.normalized[static_cast<Eigen::Index>(j)]);
    if (a > best) {
      best = a;
      s.chart = static_cast<int>(j);
    }
  }
  s.affine = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m - 1));
  if (norm > 0.0) {
    const Complex pivot = s.normalized[s.chart];
    Eigen::Index out = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (static_cast<int>(j) == s.chart) continue;
      s.affine[out++] = s.normalized[static_cast<Eigen::Index>(j)] / pivot;
    }
    s.normalized /= norm;
  }
  return s;
}

std::vector<ProjectiveSample> projective_samples(const CanonicalMap& map) {
  std::vector<ProjectiveSample> out;
  const Index nf = map.n_faces();
  out.reserve(static_cast<std::size_t>(nf));
  for (Index f = 0; f < nf; ++f) out.push_back(projective_sample(map, f));
  return out;
}

double fs_distance(const ProjectiveSample& a, const ProjectiveSample& b) {
  Complex inner = 0.0;
  for (Eigen::Index j = 0; j < a.normalized.size(); ++j) inner += a.normalized[j] * std::conj(b.normalized[j]);
  const double c = std::min(1.0, std::abs(inner));
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

PredicateReport embedding_predicates(const SurfaceOperators& ops, const CanonicalMap& map,
                                     const PredicateOptions& opts) {
  const auto& s = ops.surface();
  if (map.n_faces() != s.n_triangles()) throw std::runtime_error("map does not match the surface");
  PredicateReport rep;

  const auto samples = projective_samples(map);
  std::vector<double> tuple_norms(static_cast<std::size_t>(s.n_triangles()));
  for (Index f = 0; f < s.n_triangles(); ++f) {
    double sq = 0.0;
    for (const auto& form : map.forms) sq += std::norm(form.c[f]);
    tuple_norms[static_cast<std::size_t>(f)] = std::sqrt(sq);
  }
  const double norm_scale = median_of(tuple_norms);

  // Boundary nonvanishing: tuple norm on boundary-touching faces, relative
  // to the overall scale. Vacuous (margin 1) on closed surfaces.
  bool has_boundary_faces = false;
  double min_boundary_norm = std::numeric_limits<double>::infinity();
  for (Index f = 0; f < s.n_triangles(); ++f) {
    bool touches = false;
    for (Index v : s.triangles[static_cast<std::size_t>(f)])
      if (s.is_boundary_vertex[static_cast<std::size_t>(v)]) touches = true;
    if (!touches) continue;
    has_boundary_faces = true;
    min_boundary_norm = std::min(min_boundary_norm, tuple_norms[static_cast<std::size_t>(f)]);
  }
  if (!has_boundary_faces)
    rep.boundary_margin = 1.0;
  else
    rep.boundary_margin = norm_scale > 0.0 ? min_boundary_norm / norm_scale : 0.0;
  rep.boundary_nonvanishing = rep.boundary_margin >= opts.boundary_tol;

  // Immersion: first differences of affine coordinates across edge-adjacent
  // same-chart faces, per unit intrinsic distance.
  std::vector<double> indicators;
  double min_indicator = std::numeric_limits<double>::infinity();
  for (Index f = 0; f < s.n_triangles(); ++f) {
    double ind = -1.0;
    for (Index e : s.triangle_edges[static_cast<std::size_t>(f)]) {
      for (Index g : s.edge_triangles[static_cast<std::size_t>(e)]) {
        if (g < 0 || g == f) continue;
        if (samples[static_cast<std::size_t>(g)].chart != samples[static_cast<std::size_t>(f)].chart) continue;
        const double num =
            (samples[static_cast<std::size_t>(f)].affine - samples[static_cast<std::size_t>(g)].affine).norm();
        ind = std::max(ind, num / hinge_distance(ops, f, g));
      }
    }
    if (ind >= 0.0) {
      indicators.push_back(ind);
      min_indicator = std::min(min_indicator, ind);
    }
  }
  const double ind_scale = median_of(indicators);
  rep.immersion_margin = indicators.empty() ? 0.0 : (ind_scale > 0.0 ? min_indicator / ind_scale : 0.0);
  rep.immersion = rep.immersion_margin >= opts.immersion_tol;

  const double median_fs = sample_median_distance(samples);
  rep.collision_threshold = opts.collision_rel * median_fs;

  // Boundary injectivity: image distance of arc-separated boundary samples,
  // credited per arc step (capped; chordal distances saturate).
  const auto marks = boundary_marks(s);
  std::vector<double> loop_steps(s.boundary_loops.size(), 0.0);
  {
    std::vector<std::vector<double>> per_loop(s.boundary_loops.size());
    for (std::size_t i = 0; i < marks.size(); ++i) {
      const auto& a = marks[i];
      for (std::size_t j = i + 1; j < marks.size(); ++j) {
        const auto& b = marks[j];
        if (a.loop != b.loop) continue;
        const std::size_t len = s.boundary_loops[a.loop].size();
        const std::size_t diff = a.pos > b.pos ? a.pos - b.pos : b.pos - a.pos;
        if (std::min(diff, len - diff) == 1)
          per_loop[a.loop].push_back(fs_distance(samples[static_cast<std::size_t>(a.face)],
                                                 samples[static_cast<std::size_t>(b.face)]));
      }
    }
    for (std::size_t l = 0; l < per_loop.size(); ++l) loop_steps[l] = median_of(per_loop[l]);
  }
  double inj_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < marks.size(); ++i) {
    for (std::size_t j = i + 1; j < marks.size(); ++j) {
      const auto& a = marks[i];
      const auto& b = marks[j];
      double denom = 0.0;
      if (a.loop == b.loop) {
        const std::size_t len = s.boundary_loops[a.loop].size();
        const std::size_t diff = a.pos > b.pos ? a.pos - b.pos : b.pos - a.pos;
        const std::size_t sep = std::min(diff, len - diff);
        if (sep < static_cast<std::size_t>(opts.min_arc_separation)) continue;
        denom = std::min<double>(static_cast<double>(sep), opts.arc_cap) * loop_steps[a.loop];
      } else {
        denom = opts.arc_cap * std::max(loop_steps[a.loop], loop_steps[b.loop]);
      }
      if (denom <= 0.0) continue;
      const double d =
          fs_distance(samples[static_cast<std::size_t>(a.face)], samples[static_cast<std::size_t>(b.face)]);
      inj_margin = std::min(inj_margin, d / denom);
    }
  }
  if (marks.empty() || !std::isfinite(inj_margin)) inj_margin = marks.empty() ? 1.0 : 1e3;
  rep.injective_margin = std::min(inj_margin, 1e3);
  rep.boundary_injective = rep.injective_margin >= opts.injective_tol;

  // Collision scan: image-close, surface-far pairs.
  const auto neighborhoods = face_neighborhoods(s, opts.surface_far_hops);
  const auto bad = collision_pairs(samples, rep.collision_threshold, neighborhoods);

  std::vector<bool> face_on_boundary(static_cast<std::size_t>(s.n_triangles()), false);
  for (const auto& mk : marks) face_on_boundary[static_cast<std::size_t>(mk.face)] = true;

  // Properness: no surface-far collision may involve a boundary-sample face.
  double proper_margin = 1e3;
  for (const auto& [f, g, d] : bad) {
    if (face_on_boundary[static_cast<std::size_t>(f)] || face_on_boundary[static_cast<std::size_t>(g)])
      proper_margin = std::min(proper_margin, rep.collision_threshold > 0.0 ? d / rep.collision_threshold : 0.0);
  }
  rep.proper_margin = proper_margin;
  rep.proper = proper_margin >= opts.proper_tol;

  // Cluster the collision faces by surface proximity.
  {
    std::vector<Index> involved;
    for (const auto& [f, g, d] : bad) {
      involved.push_back(f);
      involved.push_back(g);
    }
    std::sort(involved.begin(), involved.end());
    involved.erase(std::unique(involved.begin(), involved.end()), involved.end());
    std::unordered_map<Index, Index> local;
    for (std::size_t i = 0; i < involved.size(); ++i) local[involved[i]] = static_cast<Index>(i);
    DisjointSet ds(involved.size());
    for (std::size_t i = 0; i < involved.size(); ++i)
      for (std::size_t j = i + 1; j < involved.size(); ++j)
        if (contains_sorted(neighborhoods[static_cast<std::size_t>(involved[i])], involved[j]))
          ds.unite(static_cast<Index>(i), static_cast<Index>(j));

    std::unordered_map<Index, std::size_t> root_to_cluster;
    for (std::size_t i = 0; i < involved.size(); ++i) {
      const Index r = ds.find(static_cast<Index>(i));
      auto it = root_to_cluster.find(r);
      std::size_t ci;
      if (it == root_to_cluster.end()) {
        ci = rep.exceptional.size();
        root_to_cluster[r] = ci;
        rep.exceptional.push_back({});
        rep.exceptional.back().min_distance = std::numeric_limits<double>::infinity();
      } else {
        ci = it->second;
      }
      rep.exceptional[ci].faces.push_back(involved[i]);
      if (face_on_boundary[static_cast<std::size_t>(involved[i])]) rep.exceptional[ci].touches_boundary = true;
    }
    for (const auto& [f, g, d] : bad) {
      const std::size_t ci = root_to_cluster[ds.find(local[f])];
      rep.exceptional[ci].min_distance = std::min(rep.exceptional[ci].min_distance, d);
    }
    for (const auto& cl : rep.exceptional)
      if (!cl.touches_boundary) ++rep.n_interior_clusters;
  }

  if (!rep.boundary_nonvanishing)
    rep.reason = "boundary_nonvanishing";
  else if (!rep.immersion)
    rep.reason = "immersion";
  else if (!rep.boundary_injective)
    rep.reason = "boundary_injective";
  else if (!rep.proper)
    rep.reason = "proper";

  if (!rep.reason.empty()) {
    rep.verdict = Verdict::fail;
  } else if (rep.exceptional.empty()) {
    rep.verdict = Verdict::embedding;
  } else if (static_cast<int>(rep.exceptional.size()) <= opts.max_exceptional_clusters) {
    rep.verdict = Verdict::almost_embedding;
  } else {
    rep.verdict = Verdict::fail;
    rep.reason = "exceptional_set";
  }
  return rep;
}

int degree_estimate(const SurfaceOperators& ops, const CanonicalMap& map, const PredicateOptions& opts) {
  const auto& s = ops.surface();
  if (map.n_faces() != s.n_triangles()) throw std::runtime_error("map does not match the surface");
  const auto samples = projective_samples(map);
  const auto neighborhoods = face_neighborhoods(s, opts.surface_far_hops);

  std::vector<Index> candidates;  // interior, off the boundary collar
  for (Index f = 0; f < s.n_triangles(); ++f) {
    bool touches = false;
    for (Index v : s.triangles[static_cast<std::size_t>(f)])
      if (s.is_boundary_vertex[static_cast<std::size_t>(v)]) touches = true;
    if (!touches) candidates.push_back(f);
  }
  if (candidates.empty()) candidates.push_back(0);

  const std::size_t n_probes = std::min<std::size_t>(9, candidates.size());
  std::vector<int> counts;
  for (std::size_t p = 0; p < n_probes; ++p) {
    const Index probe =
        candidates[p * (candidates.size() - 1) / std::max<std::size_t>(1, n_probes - 1)];

    // Mesh-local threshold: a few times the image distance to the adjacent
    // faces, so the preimage capture scales with the sampling density.
    double local = 0.0;
    for (Index e : s.triangle_edges[static_cast<std::size_t>(probe)])
      for (Index g : s.edge_triangles[static_cast<std::size_t>(e)])
        if (g >= 0 && g != probe)
          local = std::max(local, fs_distance(samples[static_cast<std::size_t>(probe)],
                                              samples[static_cast<std::size_t>(g)]));
    const double thr = 3.0 * local;

    std::vector<Index> close;
    for (Index f = 0; f < s.n_triangles(); ++f)
      if (fs_distance(samples[static_cast<std::size_t>(f)], samples[static_cast<std::size_t>(probe)]) <= thr)
        close.push_back(f);

    DisjointSet ds(close.size());
    for (std::size_t i = 0; i < close.size(); ++i)
      for (std::size_t j = i + 1; j < close.size(); ++j)
        if (contains_sorted(neighborhoods[static_cast<std::size_t>(close[i])], close[j]))
          ds.unite(static_cast<Index>(i), static_cast<Index>(j));
    std::unordered_set<Index> roots;
    for (std::size_t i = 0; i < close.size(); ++i) roots.insert(ds.find(static_cast<Index>(i)));
    counts.push_back(static_cast<int>(roots.size()));
  }
  std::sort(counts.begin(), counts.end());
  return counts[counts.size() / 2];
}

CanonicalMap bishop_reduce(const CanonicalMap& map, std::uint64_t seed) {
  const std::size_t m = map.arity();
  if (m <= 3) return map;
  Rng rng(seed);

  // Generic matrix with orthonormal rows; orthonormality is only for
  // conditioning, genericity is what matters.
  std::vector<Eigen::VectorXcd> rows;
  for (int r = 0; r < 3; ++r) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) v[static_cast<Eigen::Index>(j)] = rng.gaussian();
    for (const auto& prev : rows) {
      Complex proj = 0.0;
      for (Eigen::Index j = 0; j < v.size(); ++j) proj += std::conj(prev[j]) * v[j];
      v -= proj * prev;
    }
    v /= v.norm();
    rows.push_back(v);
  }

  CanonicalMap out;
  const Index nf = map.n_faces();
  for (int r = 0; r < 3; ++r) {
    FaceOneForm form;
    form.c = Eigen::VectorXcd::Zero(nf);
    for (std::size_t j = 0; j < m; ++j) form.c += rows[static_cast<std::size_t>(r)][static_cast<Eigen::Index>(j)] * map.forms[j].c;
    out.forms.push_back(std::move(form));
  }
  return out;
}

SearchResult perturbation_search(const SurfaceOperators& ops, const std::vector<Cochain0>& base,
                                 const std::vector<Cochain0>& dictionary, double delta, int max_draws,
                                 std::uint64_t seed, const PredicateOptions& opts) {
  if (base.size() < 2) throw std::runtime_error("perturbation_search needs at least two potentials");
  if (max_draws < 1) throw std::runtime_error("perturbation_search needs at least one draw");
  Rng rng(seed);

  const std::size_t L = base.size(), D = dictionary.size();
  SearchResult best;
  best.report.verdict = Verdict::fail;

  for (int draw = 0; draw < max_draws; ++draw) {
    Eigen::MatrixXcd eps = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(D));
    if (draw > 0) {
      // Radius ramp: early draws stay close to the input, later ones use the
      // whole budget.
      const double radius = delta * std::sqrt(static_cast<double>(draw) / std::max(1, max_draws - 1));
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t k = 0; k < D; ++k)
          eps(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = rng.disc(radius);
    }

    std::vector<Cochain0> fields = base;
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t k = 0; k < D; ++k)
        fields[l].v += eps(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) * dictionary[k].v;

    CanonicalMap map = canonical_map(ops, fields);
    if (map.arity() > 3) map = bishop_reduce(map, seed ^ 0x517cc1b727220a95ull);
    PredicateReport rep = embedding_predicates(ops, map, opts);

    const bool accept = rep.verdict != Verdict::fail;
    if (accept || best.fields.empty() ||
        static_cast<int>(rep.verdict) > static_cast<int>(best.report.verdict)) {
      best.fields = std::move(fields);
      best.coefficients = eps;
      best.report = rep;
      best.draws_used = draw + 1;
      best.success = accept;
    }
    if (accept) break;
  }
  return best;
}

}  // namespace halos
