#include "halos/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

namespace halos {

namespace {

int corner_of(const std::array<Index, 3>& tri, Index v) {
  for (int k = 0; k < 3; ++k)
    if (tri[static_cast<std::size_t>(k)] == v) return k;
  throw std::runtime_error("vertex not in triangle");
}

int default_cap(Index n) { return static_cast<int>(std::ceil(50.0 * std::sqrt(static_cast<double>(n)))); }

}  // namespace

SurfaceOperators::SurfaceOperators(const DiscreteSurface& s) : s_(&s) {
  const Index nv = s.n_vertices;
  const Index nf = s.n_triangles();
  const Index ne = s.n_edges();

  cot_ = Eigen::VectorXd::Zero(ne);
  lumped_ = Eigen::VectorXd::Zero(nv);
  frames_.resize(static_cast<std::size_t>(nf));

  for (Index f = 0; f < nf; ++f) {
    const auto& t = s.triangles[static_cast<std::size_t>(f)];
    const auto l = s.triangle_lengths(f);
    const double area = s.triangle_area(f);
    if (area <= 0.0) throw std::runtime_error(fmt::format("face {} has nonpositive area", f));

    for (int k = 0; k < 3; ++k) {
      // Edge (k, k+1), opposite corner k+2: half-cotangent of the opposite
      // angle, from lengths alone.
      const double l_ij = l[static_cast<std::size_t>(k)];
      const double l_jk = l[static_cast<std::size_t>((k + 1) % 3)];
      const double l_ki = l[static_cast<std::size_t>((k + 2) % 3)];
      const double cot = (l_jk * l_jk + l_ki * l_ki - l_ij * l_ij) / (8.0 * area);
      cot_[s.triangle_edges[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)]] += cot;
      lumped_[t[static_cast<std::size_t>(k)]] += area / 3.0;
    }

    auto& fr = frames_[static_cast<std::size_t>(f)];
    if (s.has_planar()) {
      const auto p0 = s.planar_coords[static_cast<std::size_t>(t[0])];
      const auto p1 = s.planar_near(t[0], t[1]);
      const auto p2 = s.planar_near(t[0], t[2]);
      fr = {Eigen::Vector2d(p0[0], p0[1]), Eigen::Vector2d(p1[0], p1[1]), Eigen::Vector2d(p2[0], p2[1])};
      const double l12 = std::hypot(p2[0] - p1[0], p2[1] - p1[1]);
      if (std::abs(l12 - l[1]) > 1e-6 * std::max(1.0, l[1]))
        throw std::runtime_error(fmt::format("face {} cannot be laid out consistently from planar coordinates", f));
    } else {
      const double x2 = (l[0] * l[0] + l[2] * l[2] - l[1] * l[1]) / (2.0 * l[0]);
      const double y2 = std::sqrt(std::max(0.0, l[2] * l[2] - x2 * x2));
      fr = {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(l[0], 0.0), Eigen::Vector2d(x2, y2)};
    }
  }

  total_area_ = lumped_.sum();
  mass_ = lumped_ / total_area_;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(4 * ne));
  for (Index e = 0; e < ne; ++e) {
    const Index a = s.edges[static_cast<std::size_t>(e)][0], b = s.edges[static_cast<std::size_t>(e)][1];
    const double w = cot_[e];
    trip.emplace_back(a, a, w);
    trip.emplace_back(b, b, w);
    trip.emplace_back(a, b, -w);
    trip.emplace_back(b, a, -w);
  }
  L_.resize(nv, nv);
  L_.setFromTriplets(trip.begin(), trip.end());
}

Eigen::VectorXcd SurfaceOperators::stiffness_apply(const Eigen::VectorXcd& u) const {
  Eigen::VectorXcd out(u.size());
  out.real() = L_ * u.real().eval();
  out.imag() = L_ * u.imag().eval();
  return out;
}

Complex SurfaceOperators::mean(const Eigen::VectorXcd& u) const {
  return Complex(mass_.dot(u.real()), mass_.dot(u.imag()));
}

Cochain0 laplacian(const SurfaceOperators& ops, const Cochain0& u) {
  Eigen::VectorXcd lu = ops.stiffness_apply(u.v);
  return {lu.array() / ops.lumped_areas().array().cast<Complex>()};
}

FaceOneForm del(const SurfaceOperators& ops, const Cochain0& u) {
  const auto& s = ops.surface();
  FaceOneForm out;
  out.c.resize(s.n_triangles());
  for (Index f = 0; f < s.n_triangles(); ++f) {
    const auto& t = s.triangles[static_cast<std::size_t>(f)];
    const auto& fr = ops.frame(f);
    const double area2 = (fr[1] - fr[0]).x() * (fr[2] - fr[0]).y() - (fr[1] - fr[0]).y() * (fr[2] - fr[0]).x();
    Complex gx = 0.0, gy = 0.0;
    for (int k = 0; k < 3; ++k) {
      // grad of the hat at corner k: the opposite side rotated a quarter turn,
      // over twice the area.
      const Eigen::Vector2d e = fr[static_cast<std::size_t>((k + 2) % 3)] - fr[static_cast<std::size_t>((k + 1) % 3)];
      const Complex uk = u.v[t[static_cast<std::size_t>(k)]];
      gx += uk * (-e.y() / area2);
      gy += uk * (e.x() / area2);
    }
    out.c[f] = 0.5 * (gx - Complex(0.0, 1.0) * gy);
  }
  return out;
}

EdgeCochain dc(const SurfaceOperators& ops, const Cochain0& u) {
  const auto& s = ops.surface();
  EdgeCochain out;
  out.v.resize(s.n_edges());
  for (Index e = 0; e < s.n_edges(); ++e)
    out.v[e] = ops.cot_weights()[e] *
               (u.v[s.edges[static_cast<std::size_t>(e)][1]] - u.v[s.edges[static_cast<std::size_t>(e)][0]]);
  return out;
}

namespace detail {

Eigen::VectorXd conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                                   const Eigen::VectorXd& inv_diag, const Eigen::VectorXd& b,
                                   double tol, int max_iterations, SolveInfo* info) {
  const double bnorm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  if (bnorm == 0.0) {
    if (info) *info = {0, 0.0};
    return x;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd ap = apply(p);
    const double alpha = rz / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rel = r.norm() / bnorm;
    if (rel <= tol) {
      if (info) *info = {it, rel};
      return x;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw std::runtime_error(fmt::format("conjugate gradients did not reach {} within {} iterations (residual {})",
                                       tol, max_iterations, r.norm() / bnorm));
}

}  // namespace detail

namespace {

// Solve L x = b for real b orthogonal to constants, pinned by <x, w> = 0,
// through the rank-one corrected SPD operator A = L + sigma w w^T. The unique
// solution of A x = b is automatically the mass-orthogonal one.
Eigen::VectorXd solve_compatible_real(const SurfaceOperators& ops, const Eigen::VectorXd& b,
                                      const SolveOptions& opts, SolveInfo* info) {
  const auto& L = ops.stiffness();
  const Eigen::VectorXd& w = ops.mass();
  const Index n = ops.n_vertices();
  const double sigma = (L.diagonal().sum() / n) / w.squaredNorm();
  Eigen::VectorXd inv_diag(n);
  for (Index i = 0; i < n; ++i) inv_diag[i] = 1.0 / (L.coeff(i, i) + sigma * w[i] * w[i]);
  const int cap = opts.max_iterations > 0 ? opts.max_iterations : default_cap(n);
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return L * x + (sigma * w.dot(x)) * w; };
  return detail::conjugate_gradient(apply, inv_diag, b, opts.tol, cap, info);
}

}  // namespace

Cochain0 stiffness_solve_mean_zero(const SurfaceOperators& ops, const Eigen::VectorXcd& b,
                                   const SolveOptions& opts, SolveInfo* info) {
  SolveInfo ir{}, ii{};
  Eigen::VectorXcd x(b.size());
  x.real() = solve_compatible_real(ops, b.real().eval(), opts, &ir);
  if (b.imag().norm() > 0.0) {
    x.imag() = solve_compatible_real(ops, b.imag().eval(), opts, &ii);
  } else {
    x.imag().setZero();
  }
  if (info) *info = {std::max(ir.iterations, ii.iterations), std::max(ir.relative_residual, ii.relative_residual)};
  return {std::move(x)};
}

Cochain0 poisson_solve(const SurfaceOperators& ops, const Cochain0& rho, const SolveOptions& opts,
                       SolveInfo* info, double compat_tol) {
  const Complex m = ops.mean(rho.v);
  const double scale = std::max(1.0, rho.v.cwiseAbs().maxCoeff());
  if (std::abs(m) > compat_tol * scale)
    throw std::runtime_error(fmt::format("poisson_solve: source has mass-weighted mean {} (limit {})",
                                         std::abs(m), compat_tol * scale));
  Eigen::VectorXcd b = rho.v.array() * ops.lumped_areas().array().cast<Complex>();
  // Project out the (tiny) incompatible component so the iteration targets an
  // exactly solvable system.
  const Complex total(b.real().sum(), b.imag().sum());
  b -= (total / ops.total_area()) * ops.lumped_areas().cast<Complex>();
  return stiffness_solve_mean_zero(ops, b, opts, info);
}

Cochain0 dirichlet_solve(const SurfaceOperators& ops, const std::vector<Index>& fixed,
                         const Eigen::VectorXcd& fixed_values, const Eigen::VectorXcd* integrated_source,
                         const SolveOptions& opts, SolveInfo* info) {
  const Index n = ops.n_vertices();
  if (fixed.empty()) throw std::runtime_error("dirichlet_solve: no fixed vertices");
  if (static_cast<std::size_t>(fixed_values.size()) != fixed.size())
    throw std::runtime_error("dirichlet_solve: fixed values do not match fixed vertices");

  std::vector<Index> to_unknown(static_cast<std::size_t>(n), -1);
  std::vector<bool> is_fixed(static_cast<std::size_t>(n), false);
  for (Index v : fixed) is_fixed[static_cast<std::size_t>(v)] = true;
  std::vector<Index> unknowns;
  for (Index v = 0; v < n; ++v) {
    if (!is_fixed[static_cast<std::size_t>(v)]) {
      to_unknown[static_cast<std::size_t>(v)] = static_cast<Index>(unknowns.size());
      unknowns.push_back(v);
    }
  }

  Cochain0 out;
  out.v = Eigen::VectorXcd::Zero(n);
  for (std::size_t k = 0; k < fixed.size(); ++k) out.v[fixed[k]] = fixed_values[static_cast<Eigen::Index>(k)];
  if (unknowns.empty()) return out;

  const Index m = static_cast<Index>(unknowns.size());
  const auto& L = ops.stiffness();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m);
  for (Index col = 0; col < n; ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, col); it; ++it) {
      const Index r = static_cast<Index>(it.row());
      const Index ru = to_unknown[static_cast<std::size_t>(r)];
      if (ru < 0) continue;
      const Index cu = to_unknown[static_cast<std::size_t>(col)];
      if (cu >= 0)
        trip.emplace_back(ru, cu, it.value());
      else
        rhs[ru] -= it.value() * out.v[col];
    }
  }
  if (integrated_source) {
    for (Index k = 0; k < m; ++k) rhs[k] += (*integrated_source)[unknowns[static_cast<std::size_t>(k)]];
  }

  Eigen::SparseMatrix<double> Lii(m, m);
  Lii.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd inv_diag(m);
  for (Index i = 0; i < m; ++i) {
    const double d = Lii.coeff(i, i);
    if (d <= 0.0) throw std::runtime_error("dirichlet_solve: interior system is not positive definite");
    inv_diag[i] = 1.0 / d;
  }
  const int cap = opts.max_iterations > 0 ? opts.max_iterations : default_cap(n);
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Lii * x; };

  SolveInfo ir{}, ii{};
  Eigen::VectorXd xr = detail::conjugate_gradient(apply, inv_diag, rhs.real().eval(), opts.tol, cap, &ir);
  Eigen::VectorXd xi;
  if (rhs.imag().norm() > 0.0)
    xi = detail::conjugate_gradient(apply, inv_diag, rhs.imag().eval(), opts.tol, cap, &ii);
  else
    xi = Eigen::VectorXd::Zero(m);
  if (info) *info = {std::max(ir.iterations, ii.iterations), std::max(ir.relative_residual, ii.relative_residual)};

  for (Index k = 0; k < m; ++k) out.v[unknowns[static_cast<std::size_t>(k)]] = Complex(xr[k], xi[k]);
  return out;
}

std::vector<Index> enclosed_vertices(const SurfaceOperators& ops, const Cycle& gamma) {
  const auto& s = ops.surface();
  const auto& verts = gamma.vertices;
  if (verts.size() < 3) throw std::runtime_error("cycle must have at least 3 vertices");

  std::unordered_set<Index> on_cycle(verts.begin(), verts.end());
  if (on_cycle.size() != verts.size()) throw std::runtime_error("cycle revisits a vertex");

  // Seed the flood fill with the vertices immediately to the left of the
  // path: for each directed step (a -> b), the face that walks a -> b in its
  // own ccw order lies on the left; take its third corner.
  std::vector<bool> inside(static_cast<std::size_t>(s.n_vertices), false);
  std::queue<Index> q;
  auto push_seed = [&](Index x) {
    if (!on_cycle.count(x) && !inside[static_cast<std::size_t>(x)]) {
      inside[static_cast<std::size_t>(x)] = true;
      q.push(x);
    }
  };
  for (std::size_t k = 0; k < verts.size(); ++k) {
    const Index a = verts[k], b = verts[(k + 1) % verts.size()];
    const Index e = s.edge_id(a, b);
    bool found = false;
    for (Index f : s.edge_triangles[static_cast<std::size_t>(e)]) {
      if (f < 0) continue;
      const auto& t = s.triangles[static_cast<std::size_t>(f)];
      for (int c = 0; c < 3; ++c) {
        if (t[static_cast<std::size_t>(c)] == a && t[static_cast<std::size_t>((c + 1) % 3)] == b) {
          push_seed(t[static_cast<std::size_t>((c + 2) % 3)]);
          found = true;
        }
      }
    }
    if (!found)
      throw std::runtime_error(fmt::format("cycle step {}->{} has no face on its left", a, b));
  }

  while (!q.empty()) {
    const Index v = q.front();
    q.pop();
    for (Index u : s.vertex_neighbors[static_cast<std::size_t>(v)]) {
      if (on_cycle.count(u) || inside[static_cast<std::size_t>(u)]) continue;
      inside[static_cast<std::size_t>(u)] = true;
      q.push(u);
    }
  }

  std::vector<Index> out;
  for (Index v = 0; v < s.n_vertices; ++v)
    if (inside[static_cast<std::size_t>(v)]) out.push_back(v);
  return out;
}

Complex contour_integral(const SurfaceOperators& ops, const EdgeCochain& form, const Cycle& gamma) {
  const auto& s = ops.surface();
  const auto in_list = enclosed_vertices(ops, gamma);
  std::vector<bool> in(static_cast<std::size_t>(s.n_vertices), false);
  for (Index v : in_list) in[static_cast<std::size_t>(v)] = true;

  // Flux out of the enclosed region: sum over cut edges of w_ij (u_j - u_i)
  // with i inside. The canonical edge value is oriented low -> high, so the
  // sign flips when the enclosed endpoint is the high one.
  Complex total = 0.0;
  for (Index e = 0; e < s.n_edges(); ++e) {
    const Index a = s.edges[static_cast<std::size_t>(e)][0], b = s.edges[static_cast<std::size_t>(e)][1];
    const bool ia = in[static_cast<std::size_t>(a)], ib = in[static_cast<std::size_t>(b)];
    if (ia == ib) continue;
    total += ia ? form.v[e] : -form.v[e];
  }
  return total;
}

Complex contour_integral(const SurfaceOperators& ops, const FaceOneForm& form, const Cycle& gamma) {
  const auto& s = ops.surface();
  const auto& verts = gamma.vertices;
  if (verts.size() < 3) throw std::runtime_error("cycle must have at least 3 vertices");
  Complex total = 0.0;
  for (std::size_t k = 0; k < verts.size(); ++k) {
    const Index a = verts[k], b = verts[(k + 1) % verts.size()];
    const Index e = s.edge_id(a, b);
    Complex seg = 0.0;
    int nf = 0;
    for (Index f : s.edge_triangles[static_cast<std::size_t>(e)]) {
      if (f < 0) continue;
      const auto& t = s.triangles[static_cast<std::size_t>(f)];
      const auto& fr = ops.frame(f);
      const int ca = corner_of(t, a), cb = corner_of(t, b);
      const Eigen::Vector2d d = fr[static_cast<std::size_t>(cb)] - fr[static_cast<std::size_t>(ca)];
      seg += form.c[f] * Complex(d.x(), d.y());
      ++nf;
    }
    total += seg / static_cast<double>(nf);
  }
  return total;
}

Complex residue(const SurfaceOperators& ops, const Cochain0& u, Index a) {
  const auto& s = ops.surface();
  if (a < 0 || a >= s.n_vertices) throw std::runtime_error("residue: invalid vertex");
  std::unordered_set<Index> star(s.vertex_neighbors[static_cast<std::size_t>(a)].begin(),
                                 s.vertex_neighbors[static_cast<std::size_t>(a)].end());
  star.insert(a);

  // Integrated Laplacian over the closed star, as the flux across its cut.
  // Edges incident to `a` never cross the cut, so u(a) is never read.
  Complex flux = 0.0;
  for (Index i : star) {
    for (Index j : s.vertex_neighbors[static_cast<std::size_t>(i)]) {
      if (star.count(j)) continue;
      flux += ops.cot_weights()[s.edge_id(i, j)] * (u.v[i] - u.v[j]);
    }
  }
  return -flux / (2.0 * M_PI);
}

}  // namespace halos
