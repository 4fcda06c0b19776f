#include "halos/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>

namespace halos {

namespace {

std::uint64_t edge_key(Index a, Index b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

double kahan_area(double a, double b, double c) {
  // Numerically stable Heron (Kahan): requires a >= b >= c.
  if (a < b) std::swap(a, b);
  if (b < c) std::swap(b, c);
  if (a < b) std::swap(a, b);
  const double s = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  if (s <= 0.0) return 0.0;
  return 0.25 * std::sqrt(s);
}

}  // namespace

Index DiscreteSurface::edge_id(Index a, Index b) const {
  auto it = edge_lookup.find(edge_key(a, b));
  if (it == edge_lookup.end())
    throw std::runtime_error(fmt::format("no edge between vertices {} and {}", a, b));
  return it->second;
}

double DiscreteSurface::edge_length(Index a, Index b) const {
  return edge_lengths[static_cast<std::size_t>(edge_id(a, b))];
}

std::array<double, 3> DiscreteSurface::triangle_lengths(Index f) const {
  const auto& t = triangles[static_cast<std::size_t>(f)];
  return {edge_length(t[0], t[1]), edge_length(t[1], t[2]), edge_length(t[2], t[0])};
}

double DiscreteSurface::triangle_area(Index f) const {
  const auto l = triangle_lengths(f);
  return kahan_area(l[0], l[1], l[2]);
}

double DiscreteSurface::total_area() const {
  double a = 0.0;
  for (Index f = 0; f < n_triangles(); ++f) a += triangle_area(f);
  return a;
}

double DiscreteSurface::max_edge_length() const {
  double m = 0.0;
  for (double l : edge_lengths) m = std::max(m, l);
  return m;
}

std::array<double, 2> DiscreteSurface::planar_near(Index a, Index b) const {
  const auto& pa = planar_coords[static_cast<std::size_t>(a)];
  const auto& pb = planar_coords[static_cast<std::size_t>(b)];
  if (!is_periodic()) return pb;
  // Among the nine lattice copies of pb, pick the one whose distance to pa
  // best matches the stored edge length; ties go to the unshifted copy. The
  // plain nearest copy can be wrong for skewed lattices, the length-matched
  // one cannot as long as the mesh is valid.
  const double target = edge_length(a, b);
  std::array<double, 2> best = pb;
  double best_err = std::numeric_limits<double>::infinity();
  double best_shift = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      const double sx = i * planar_periods[0][0] + j * planar_periods[1][0];
      const double sy = i * planar_periods[0][1] + j * planar_periods[1][1];
      const double dx = pb[0] + sx - pa[0];
      const double dy = pb[1] + sy - pa[1];
      const double err = std::abs(std::hypot(dx, dy) - target);
      const double shift = std::hypot(sx, sy);
      if (err < best_err - 1e-14 || (std::abs(err - best_err) <= 1e-14 && shift < best_shift)) {
        best_err = err;
        best_shift = shift;
        best = {pb[0] + sx, pb[1] + sy};
      }
    }
  }
  return best;
}

void DiscreteSurface::enumerate_edges() {
  if (edges.empty()) {
    std::vector<std::array<Index, 2>> pairs;
    pairs.reserve(3 * triangles.size());
    for (const auto& t : triangles) {
      for (int k = 0; k < 3; ++k) {
        Index a = t[static_cast<std::size_t>(k)];
        Index b = t[static_cast<std::size_t>((k + 1) % 3)];
        if (a > b) std::swap(a, b);
        pairs.push_back({a, b});
      }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    edges = std::move(pairs);
  }

  edge_lookup.clear();
  edge_lookup.reserve(edges.size() * 2);
  for (std::size_t e = 0; e < edges.size(); ++e)
    edge_lookup[edge_key(edges[e][0], edges[e][1])] = static_cast<Index>(e);
}

void DiscreteSurface::finalize() {
  const std::size_t nf = triangles.size();
  enumerate_edges();

  if (edge_lengths.empty()) {
    if (!has_planar())
      throw std::runtime_error("finalize: no edge lengths and no planar coordinates");
    if (is_periodic())
      throw std::runtime_error("finalize: periodic surfaces need explicit edge lengths");
    edge_lengths.resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& pa = planar_coords[static_cast<std::size_t>(edges[e][0])];
      const auto& pb = planar_coords[static_cast<std::size_t>(edges[e][1])];
      edge_lengths[e] = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
    }
  }

  triangle_edges.assign(nf, {0, 0, 0});
  edge_triangles.assign(edges.size(), {-1, -1});
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& t = triangles[f];
    for (int k = 0; k < 3; ++k) {
      const Index e = edge_id(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)]);
      triangle_edges[f][static_cast<std::size_t>(k)] = e;
      auto& inc = edge_triangles[static_cast<std::size_t>(e)];
      if (inc[0] < 0)
        inc[0] = static_cast<Index>(f);
      else if (inc[1] < 0)
        inc[1] = static_cast<Index>(f);
      else
        throw std::runtime_error(fmt::format("edge {} has more than two incident faces", e));
    }
  }

  vertex_triangles.assign(static_cast<std::size_t>(n_vertices), {});
  for (std::size_t f = 0; f < nf; ++f)
    for (Index v : triangles[f]) vertex_triangles[static_cast<std::size_t>(v)].push_back(static_cast<Index>(f));

  vertex_neighbors.assign(static_cast<std::size_t>(n_vertices), {});
  for (const auto& e : edges) {
    vertex_neighbors[static_cast<std::size_t>(e[0])].push_back(e[1]);
    vertex_neighbors[static_cast<std::size_t>(e[1])].push_back(e[0]);
  }
  for (auto& nb : vertex_neighbors) std::sort(nb.begin(), nb.end());

  // Boundary edges, each traversed by exactly one face. The directed edge as
  // the face walks it keeps the surface on the left, so chaining outgoing
  // directed boundary edges yields correctly oriented loops.
  std::vector<Index> next_on_boundary(static_cast<std::size_t>(n_vertices), -1);
  std::size_t n_bedges = 0;
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& t = triangles[f];
    for (int k = 0; k < 3; ++k) {
      const Index a = t[static_cast<std::size_t>(k)];
      const Index b = t[static_cast<std::size_t>((k + 1) % 3)];
      const Index e = triangle_edges[f][static_cast<std::size_t>(k)];
      if (edge_triangles[static_cast<std::size_t>(e)][1] < 0) {
        if (next_on_boundary[static_cast<std::size_t>(a)] >= 0)
          throw std::runtime_error(fmt::format("vertex {} has two outgoing boundary edges", a));
        next_on_boundary[static_cast<std::size_t>(a)] = b;
        ++n_bedges;
      }
    }
  }

  is_boundary_vertex.assign(static_cast<std::size_t>(n_vertices), false);
  for (Index v = 0; v < n_vertices; ++v)
    if (next_on_boundary[static_cast<std::size_t>(v)] >= 0) is_boundary_vertex[static_cast<std::size_t>(v)] = true;

  if (boundary_loops.empty() && n_bedges > 0) {
    std::vector<bool> seen(static_cast<std::size_t>(n_vertices), false);
    std::vector<Index> starts;
    for (Index v = 0; v < n_vertices; ++v)
      if (next_on_boundary[static_cast<std::size_t>(v)] >= 0) starts.push_back(v);
    for (Index start : starts) {
      if (seen[static_cast<std::size_t>(start)]) continue;
      std::vector<Index> loop;
      Index v = start;
      do {
        loop.push_back(v);
        seen[static_cast<std::size_t>(v)] = true;
        v = next_on_boundary[static_cast<std::size_t>(v)];
        if (v < 0 || loop.size() > static_cast<std::size_t>(n_vertices))
          throw std::runtime_error("boundary loop does not close");
      } while (v != start);
      boundary_loops.push_back(std::move(loop));
    }
  }
}

DiscreteSurface build_flat_torus(int n, Complex tau) {
  if (n < 4) throw std::runtime_error("flat torus needs n >= 4");
  if (tau.imag() <= 0.0) throw std::runtime_error("flat torus needs Im(tau) > 0");

  DiscreteSurface s;
  s.n_vertices = n * n;
  const double e1x = 1.0, e1y = 0.0;
  const double e2x = tau.real(), e2y = tau.imag();
  s.planar_periods = {{{e1x, e1y}, {e2x, e2y}}};
  s.planar_coords.resize(static_cast<std::size_t>(s.n_vertices));
  auto id = [n](int i, int j) { return static_cast<Index>((j % n + n) % n * n + (i % n + n) % n); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      s.planar_coords[static_cast<std::size_t>(id(i, j))] = {(i * e1x + j * e2x) / n, (i * e1y + j * e2y) / n};

  s.triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      s.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      s.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }

  // Edge lengths from the actual grid step vectors; every edge is one of the
  // three steps e1/n, e2/n, (e1+e2)/n. Wrap-reduction of coordinates is never
  // consulted, so skewed moduli are safe.
  const double lh = std::hypot(e1x, e1y) / n;
  const double lv = std::hypot(e2x, e2y) / n;
  const double ld = std::hypot(e1x + e2x, e1y + e2y) / n;
  s.enumerate_edges();
  s.edge_lengths.assign(s.edges.size(), 0.0);
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    const Index a = s.edges[e][0], b = s.edges[e][1];
    const int ia = a % n, ja = a / n, ib = b % n, jb = b / n;
    int di = (ib - ia + n) % n;
    int dj = (jb - ja + n) % n;
    if (di == n - 1) di = -1;
    if (dj == n - 1) dj = -1;
    if (di != 0 && dj == 0)
      s.edge_lengths[e] = lh;
    else if (di == 0 && dj != 0)
      s.edge_lengths[e] = lv;
    else if (di == dj)
      s.edge_lengths[e] = ld;
    else
      throw std::runtime_error("unexpected torus edge step");
  }
  s.finalize();
  return s;
}

DiscreteSurface build_annulus(double inner_radius, int radial, int angular) {
  if (!(inner_radius > 0.0 && inner_radius < 1.0))
    throw std::runtime_error("annulus needs 0 < inner radius < 1");
  if (radial < 3) throw std::runtime_error("annulus needs at least 3 radial rings");
  if (angular < 8) throw std::runtime_error("annulus needs at least 8 angular spokes");

  DiscreteSurface s;
  const int R = radial, m = angular;
  s.n_vertices = R * m;
  s.planar_coords.resize(static_cast<std::size_t>(s.n_vertices));
  auto id = [m](int k, int j) { return static_cast<Index>(k * m + (j % m + m) % m); };
  for (int k = 0; k < R; ++k) {
    // Geometric ring spacing keeps the radial-to-angular cell aspect uniform.
    const double r = std::pow(inner_radius, static_cast<double>(R - 1 - k) / (R - 1));
    for (int j = 0; j < m; ++j) {
      const double th = 2.0 * M_PI * j / m;
      s.planar_coords[static_cast<std::size_t>(id(k, j))] = {r * std::cos(th), r * std::sin(th)};
    }
  }
  for (int k = 0; k + 1 < R; ++k) {
    for (int j = 0; j < m; ++j) {
      s.triangles.push_back({id(k, j), id(k + 1, j), id(k + 1, j + 1)});
      s.triangles.push_back({id(k, j), id(k + 1, j + 1), id(k, j + 1)});
    }
  }

  // Outer circle counterclockwise, inner circle clockwise: surface on the
  // left in both cases.
  std::vector<Index> outer, inner;
  for (int j = 0; j < m; ++j) outer.push_back(id(R - 1, j));
  inner.push_back(id(0, 0));
  for (int j = m - 1; j >= 1; --j) inner.push_back(id(0, j));
  s.boundary_loops = {outer, inner};

  s.finalize();
  return s;
}

DiscreteSurface build_sphere(int level) {
  if (level < 1) throw std::runtime_error("sphere needs subdivision level >= 1");

  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<std::array<double, 3>> pos = {
      {-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : pos) {
    const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    p = {p[0] / n, p[1] / n, p[2] / n};
  }
  std::vector<std::array<Index, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int lv = 0; lv < level; ++lv) {
    std::unordered_map<std::uint64_t, Index> mid;
    auto midpoint = [&](Index a, Index b) {
      const auto key = edge_key(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const auto &pa = pos[static_cast<std::size_t>(a)], &pb = pos[static_cast<std::size_t>(b)];
      std::array<double, 3> p = {(pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2, (pa[2] + pb[2]) / 2};
      const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      p = {p[0] / n, p[1] / n, p[2] / n};
      const Index idx = static_cast<Index>(pos.size());
      pos.push_back(p);
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<Index, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const Index ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  DiscreteSurface s;
  s.n_vertices = static_cast<Index>(pos.size());
  s.triangles = std::move(faces);
  s.enumerate_edges();
  s.edge_lengths.resize(s.edges.size());
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    const auto &pa = pos[static_cast<std::size_t>(s.edges[e][0])], &pb = pos[static_cast<std::size_t>(s.edges[e][1])];
    s.edge_lengths[e] =
        std::sqrt((pa[0] - pb[0]) * (pa[0] - pb[0]) + (pa[1] - pb[1]) * (pa[1] - pb[1]) +
                  (pa[2] - pb[2]) * (pa[2] - pb[2]));
  }
  s.finalize();
  return s;
}

DiscreteSurface refine(const DiscreteSurface& s) {
  DiscreteSurface r;
  r.n_vertices = s.n_vertices + s.n_edges();
  r.node_classes = s.node_classes;
  r.planar_periods = s.planar_periods;

  auto mid_id = [&](Index e) { return s.n_vertices + e; };

  if (s.has_planar()) {
    r.planar_coords.resize(static_cast<std::size_t>(r.n_vertices));
    for (Index v = 0; v < s.n_vertices; ++v)
      r.planar_coords[static_cast<std::size_t>(v)] = s.planar_coords[static_cast<std::size_t>(v)];
    for (Index e = 0; e < s.n_edges(); ++e) {
      const Index a = s.edges[static_cast<std::size_t>(e)][0], b = s.edges[static_cast<std::size_t>(e)][1];
      const auto pa = s.planar_coords[static_cast<std::size_t>(a)];
      const auto pb = s.planar_near(a, b);
      r.planar_coords[static_cast<std::size_t>(mid_id(e))] = {(pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2};
    }
  }

  r.triangles.reserve(s.triangles.size() * 4);
  for (Index f = 0; f < s.n_triangles(); ++f) {
    const auto& t = s.triangles[static_cast<std::size_t>(f)];
    const Index ab = mid_id(s.triangle_edges[static_cast<std::size_t>(f)][0]);
    const Index bc = mid_id(s.triangle_edges[static_cast<std::size_t>(f)][1]);
    const Index ca = mid_id(s.triangle_edges[static_cast<std::size_t>(f)][2]);
    r.triangles.push_back({t[0], ab, ca});
    r.triangles.push_back({t[1], bc, ab});
    r.triangles.push_back({t[2], ca, bc});
    r.triangles.push_back({ab, bc, ca});
  }

  // Child edge lengths from the flat parent faces: halves of parent edges,
  // and midsegments (half the opposite side) for the central child.
  r.enumerate_edges();
  r.edge_lengths.assign(r.edges.size(), 0.0);
  for (Index e = 0; e < s.n_edges(); ++e) {
    const Index a = s.edges[static_cast<std::size_t>(e)][0], b = s.edges[static_cast<std::size_t>(e)][1];
    const double half = s.edge_lengths[static_cast<std::size_t>(e)] / 2;
    r.edge_lengths[static_cast<std::size_t>(r.edge_id(a, mid_id(e)))] = half;
    r.edge_lengths[static_cast<std::size_t>(r.edge_id(b, mid_id(e)))] = half;
  }
  for (Index f = 0; f < s.n_triangles(); ++f) {
    const auto& te = s.triangle_edges[static_cast<std::size_t>(f)];
    const auto l = s.triangle_lengths(f);
    // Midsegment between midpoints of sides i and i+1 is parallel to side
    // i+2 and half its length.
    const Index m01 = mid_id(te[0]), m12 = mid_id(te[1]), m20 = mid_id(te[2]);
    r.edge_lengths[static_cast<std::size_t>(r.edge_id(m01, m12))] = l[2] / 2;
    r.edge_lengths[static_cast<std::size_t>(r.edge_id(m12, m20))] = l[0] / 2;
    r.edge_lengths[static_cast<std::size_t>(r.edge_id(m20, m01))] = l[1] / 2;
  }

  if (!s.boundary_loops.empty()) {
    for (const auto& loop : s.boundary_loops) {
      std::vector<Index> fine;
      fine.reserve(loop.size() * 2);
      for (std::size_t k = 0; k < loop.size(); ++k) {
        const Index a = loop[k], b = loop[(k + 1) % loop.size()];
        fine.push_back(a);
        fine.push_back(mid_id(s.edge_id(a, b)));
      }
      r.boundary_loops.push_back(std::move(fine));
    }
  }

  r.finalize();
  return r;
}

void validate(const DiscreteSurface& s) {
  if (s.n_vertices <= 0) throw std::runtime_error("surface has no vertices");
  if (s.triangles.empty()) throw std::runtime_error("surface has no triangles");
  if (s.edge_lengths.size() != s.edges.size())
    throw std::runtime_error("edge_lengths does not match edge enumeration");

  for (std::size_t f = 0; f < s.triangles.size(); ++f) {
    const auto& t = s.triangles[f];
    for (Index v : t)
      if (v < 0 || v >= s.n_vertices)
        throw std::runtime_error(fmt::format("triangle {} references invalid vertex", f));
    if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0])
      throw std::runtime_error(fmt::format("triangle {} is degenerate", f));
    const auto l = s.triangle_lengths(static_cast<Index>(f));
    for (int k = 0; k < 3; ++k)
      if (l[static_cast<std::size_t>(k)] + l[static_cast<std::size_t>((k + 1) % 3)] <=
          l[static_cast<std::size_t>((k + 2) % 3)])
        throw std::runtime_error(fmt::format("triangle {} violates the triangle inequality", f));
    if (s.triangle_area(static_cast<Index>(f)) <= 0.0)
      throw std::runtime_error(fmt::format("triangle {} has nonpositive area", f));
  }

  // Each interior edge must be walked once in each direction: that is exactly
  // orientation consistency of the two incident faces.
  std::unordered_map<std::uint64_t, int> directed;
  for (const auto& t : s.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Index a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      const std::uint64_t fwd = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
                                static_cast<std::uint32_t>(b);
      if (++directed[fwd] > 1)
        throw std::runtime_error(
            fmt::format("edge {}->{} traversed twice in the same direction (orientation flip)", a, b));
    }
  }

  // Boundary loops must reproduce the directed boundary edges exactly.
  std::size_t n_bedges = 0;
  for (const auto& inc : s.edge_triangles)
    if (inc[1] < 0) ++n_bedges;
  std::size_t covered = 0;
  for (const auto& loop : s.boundary_loops) {
    if (loop.size() < 3) throw std::runtime_error("boundary loop shorter than 3 vertices");
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Index a = loop[k], b = loop[(k + 1) % loop.size()];
      const Index e = s.edge_id(a, b);
      if (s.edge_triangles[static_cast<std::size_t>(e)][1] >= 0)
        throw std::runtime_error(fmt::format("boundary loop crosses interior edge {}-{}", a, b));
      const std::uint64_t fwd = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
                                static_cast<std::uint32_t>(b);
      // The unique incident face walks the edge keeping the surface on its
      // left; the loop must walk it the same way.
      if (directed.find(fwd) == directed.end())
        throw std::runtime_error(fmt::format("boundary loop edge {}->{} oriented against the surface", a, b));
      ++covered;
    }
  }
  if (covered != n_bedges)
    throw std::runtime_error(fmt::format("boundary loops cover {} of {} boundary edges", covered, n_bedges));

  std::vector<bool> in_class(static_cast<std::size_t>(s.n_vertices), false);
  for (const auto& cls : s.node_classes) {
    for (Index v : cls) {
      if (v < 0 || v >= s.n_vertices) throw std::runtime_error("node class references invalid vertex");
      if (in_class[static_cast<std::size_t>(v)])
        throw std::runtime_error(fmt::format("vertex {} appears in two node classes", v));
      in_class[static_cast<std::size_t>(v)] = true;
    }
  }

  if (s.has_planar()) {
    if (s.planar_coords.size() != static_cast<std::size_t>(s.n_vertices))
      throw std::runtime_error("planar_coords size mismatch");
    double scale = 0.0;
    for (double l : s.edge_lengths) scale = std::max(scale, l);
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
      const Index a = s.edges[e][0], b = s.edges[e][1];
      const auto pa = s.planar_coords[static_cast<std::size_t>(a)];
      const auto pb = s.planar_near(a, b);
      const double d = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
      if (std::abs(d - s.edge_lengths[e]) > 1e-9 * scale)
        throw std::runtime_error(
            fmt::format("edge {}-{} length {} disagrees with planar coordinates ({})", a, b,
                        s.edge_lengths[e], d));
    }
  }
}

Subdomain make_subdomain(const DiscreteSurface& s, std::vector<Index> faces) {
  std::sort(faces.begin(), faces.end());
  faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
  if (faces.empty()) throw std::runtime_error("subdomain is empty");
  if (faces.front() < 0 || faces.back() >= s.n_triangles())
    throw std::runtime_error("subdomain references invalid face");

  Subdomain sub;
  sub.faces = std::move(faces);
  sub.face_mark.assign(static_cast<std::size_t>(s.n_triangles()), false);
  for (Index f : sub.faces) sub.face_mark[static_cast<std::size_t>(f)] = true;
  sub.vertex_mark.assign(static_cast<std::size_t>(s.n_vertices), false);
  for (Index f : sub.faces)
    for (Index v : s.triangles[static_cast<std::size_t>(f)]) sub.vertex_mark[static_cast<std::size_t>(v)] = true;

  for (Index v = 0; v < s.n_vertices; ++v) {
    if (!sub.vertex_mark[static_cast<std::size_t>(v)]) continue;
    bool all_in = true;
    for (Index f : s.vertex_triangles[static_cast<std::size_t>(v)])
      if (!sub.face_mark[static_cast<std::size_t>(f)]) all_in = false;
    if (all_in)
      sub.interior_vertices.push_back(v);
    else
      sub.frontier_vertices.push_back(v);
  }
  return sub;
}

Subdomain disc_subdomain(const DiscreteSurface& s, Index center, double radius) {
  if (center < 0 || center >= s.n_vertices) throw std::runtime_error("disc center is not a vertex");
  const auto dist = geodesic_distances(s, center);
  std::vector<Index> faces;
  for (Index f = 0; f < s.n_triangles(); ++f) {
    const auto& t = s.triangles[static_cast<std::size_t>(f)];
    if (dist[static_cast<std::size_t>(t[0])] < radius && dist[static_cast<std::size_t>(t[1])] < radius &&
        dist[static_cast<std::size_t>(t[2])] < radius)
      faces.push_back(f);
  }
  if (faces.empty())
    throw std::runtime_error(fmt::format("disc of radius {} around vertex {} covers no face", radius, center));
  return make_subdomain(s, faces);
}

DiscreteSurface remove_subdomain(const DiscreteSurface& s, const Subdomain& sub,
                                 std::vector<Index>* old_to_new) {
  if (sub.faces.size() >= static_cast<std::size_t>(s.n_triangles()))
    throw std::runtime_error("subdomain removal would delete every face");

  for (const auto& cls : s.node_classes)
    for (Index v : cls)
      if (sub.vertex_mark[static_cast<std::size_t>(v)])
        throw std::runtime_error(fmt::format("subdomain touches marked vertex {}", v));

  // The removed region must be a combinatorial disc: Euler characteristic 1
  // and a single frontier cycle. Count the removed complex's cells.
  std::size_t rm_vertices = 0;
  for (bool m : sub.vertex_mark)
    if (m) ++rm_vertices;
  std::size_t rm_edges = 0;
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    const auto& inc = s.edge_triangles[e];
    const bool in0 = inc[0] >= 0 && sub.face_mark[static_cast<std::size_t>(inc[0])];
    const bool in1 = inc[1] >= 0 && sub.face_mark[static_cast<std::size_t>(inc[1])];
    if (in0 || in1) ++rm_edges;
  }
  const int chi = static_cast<int>(rm_vertices) - static_cast<int>(rm_edges) +
                  static_cast<int>(sub.faces.size());
  if (chi != 1)
    throw std::runtime_error(
        fmt::format("subdomain is not a disc (Euler characteristic {})", chi));

  // Remaining faces must stay connected across shared edges.
  std::vector<Index> kept;
  for (Index f = 0; f < s.n_triangles(); ++f)
    if (!sub.face_mark[static_cast<std::size_t>(f)]) kept.push_back(f);
  {
    std::vector<bool> seen(static_cast<std::size_t>(s.n_triangles()), false);
    std::queue<Index> q;
    q.push(kept.front());
    seen[static_cast<std::size_t>(kept.front())] = true;
    std::size_t reached = 0;
    while (!q.empty()) {
      const Index f = q.front();
      q.pop();
      ++reached;
      for (Index e : s.triangle_edges[static_cast<std::size_t>(f)]) {
        for (Index g : s.edge_triangles[static_cast<std::size_t>(e)]) {
          if (g < 0 || seen[static_cast<std::size_t>(g)] || sub.face_mark[static_cast<std::size_t>(g)]) continue;
          seen[static_cast<std::size_t>(g)] = true;
          q.push(g);
        }
      }
    }
    if (reached != kept.size())
      throw std::runtime_error("subdomain removal disconnects the surface");
  }

  std::vector<Index> vmap(static_cast<std::size_t>(s.n_vertices), -1);
  DiscreteSurface out;
  for (Index f : kept)
    for (Index v : s.triangles[static_cast<std::size_t>(f)])
      if (vmap[static_cast<std::size_t>(v)] < 0) vmap[static_cast<std::size_t>(v)] = 0;
  Index next = 0;
  for (Index v = 0; v < s.n_vertices; ++v)
    if (vmap[static_cast<std::size_t>(v)] == 0) vmap[static_cast<std::size_t>(v)] = next++;
    else vmap[static_cast<std::size_t>(v)] = -1;
  out.n_vertices = next;

  out.triangles.reserve(kept.size());
  for (Index f : kept) {
    const auto& t = s.triangles[static_cast<std::size_t>(f)];
    out.triangles.push_back({vmap[static_cast<std::size_t>(t[0])], vmap[static_cast<std::size_t>(t[1])],
                             vmap[static_cast<std::size_t>(t[2])]});
  }

  if (s.has_planar()) {
    out.planar_coords.resize(static_cast<std::size_t>(out.n_vertices));
    for (Index v = 0; v < s.n_vertices; ++v)
      if (vmap[static_cast<std::size_t>(v)] >= 0)
        out.planar_coords[static_cast<std::size_t>(vmap[static_cast<std::size_t>(v)])] =
            s.planar_coords[static_cast<std::size_t>(v)];
    out.planar_periods = s.planar_periods;
  }

  out.enumerate_edges();
  out.edge_lengths.assign(out.edges.size(), 0.0);
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    const Index a = vmap[static_cast<std::size_t>(s.edges[e][0])], b = vmap[static_cast<std::size_t>(s.edges[e][1])];
    if (a < 0 || b < 0) continue;
    auto it = out.edge_lookup.find((static_cast<std::uint64_t>(static_cast<std::uint32_t>(std::min(a, b))) << 32) |
                                   static_cast<std::uint32_t>(std::max(a, b)));
    if (it != out.edge_lookup.end()) out.edge_lengths[static_cast<std::size_t>(it->second)] = s.edge_lengths[e];
  }

  for (const auto& cls : s.node_classes) {
    std::vector<Index> mapped;
    for (Index v : cls) mapped.push_back(vmap[static_cast<std::size_t>(v)]);
    out.node_classes.push_back(std::move(mapped));
  }

  out.boundary_loops.clear();
  out.finalize();  // detect boundary loops (old ones plus the new frontier)
  std::sort(out.boundary_loops.begin(), out.boundary_loops.end(),
            [](const std::vector<Index>& a, const std::vector<Index>& b) {
              return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
            });

  if (old_to_new) *old_to_new = std::move(vmap);
  return out;
}

std::vector<double> geodesic_distances(const DiscreteSurface& s, Index source) {
  std::vector<double> dist(static_cast<std::size_t>(s.n_vertices), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  dist[static_cast<std::size_t>(source)] = 0.0;
  q.push({0.0, source});
  while (!q.empty()) {
    const auto [d, v] = q.top();
    q.pop();
    if (d > dist[static_cast<std::size_t>(v)]) continue;
    for (Index u : s.vertex_neighbors[static_cast<std::size_t>(v)]) {
      const double nd = d + s.edge_length(v, u);
      if (nd < dist[static_cast<std::size_t>(u)]) {
        dist[static_cast<std::size_t>(u)] = nd;
        q.push({nd, u});
      }
    }
  }
  return dist;
}

}  // namespace halos
