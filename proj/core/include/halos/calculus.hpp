#pragma once

#include <functional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "halos/surface.hpp"

namespace halos {

// Vertex function (finite values only; singular behaviour is always encoded
// through sources, never through infinite samples).
struct Cochain0 {
  Eigen::VectorXcd v;
};

// Edge values in the canonical low-to-high orientation of each edge.
struct EdgeCochain {
  Eigen::VectorXcd v;
};

// Face-wise constant complex (1,0)-form c_f * dw in the face's isometric
// frame. When the surface carries planar coordinates the frames are aligned
// with them, so c_f is directly comparable with closed-form expressions.
struct FaceOneForm {
  Eigen::VectorXcd c;
};

// Closed vertex path (consecutive entries adjacent, last connects to first).
struct Cycle {
  std::vector<Index> vertices;
};

struct SolveOptions {
  double tol = 1e-12;  // relative residual target
  int max_iterations = 0;  // 0: ceil(50 sqrt(n)) cap
};

struct SolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Precomputed metric operators of one surface. Holds a reference to the
// surface, which must outlive this object.
class SurfaceOperators {
 public:
  explicit SurfaceOperators(const DiscreteSurface& s);

  const DiscreteSurface& surface() const { return *s_; }
  Index n_vertices() const { return s_->n_vertices; }

  // Half-cotangent edge weights summed over the (at most two) incident faces.
  const Eigen::VectorXd& cot_weights() const { return cot_; }
  // Physical lumped vertex areas (one third of incident face areas).
  const Eigen::VectorXd& lumped_areas() const { return lumped_; }
  // Area weights normalized to total mass one; this is the weight vector of
  // every mean and of the uniform background charge.
  const Eigen::VectorXd& mass() const { return mass_; }
  double total_area() const { return total_area_; }

  // Stiffness matrix, positive semidefinite with kernel the constants:
  // (L u)_i = sum_j w_ij (u_i - u_j).
  const Eigen::SparseMatrix<double>& stiffness() const { return L_; }
  Eigen::VectorXcd stiffness_apply(const Eigen::VectorXcd& u) const;

  // ccw corner positions of face f in its isometric frame (corner order
  // matches the triangle's vertex order).
  const std::array<Eigen::Vector2d, 3>& frame(Index f) const {
    return frames_[static_cast<std::size_t>(f)];
  }

  // Mass-weighted mean <u, w>.
  Complex mean(const Eigen::VectorXcd& u) const;

 private:
  const DiscreteSurface* s_;
  Eigen::VectorXd cot_;
  Eigen::VectorXd lumped_;
  Eigen::VectorXd mass_;
  double total_area_ = 0.0;
  Eigen::SparseMatrix<double> L_;
  std::vector<std::array<Eigen::Vector2d, 3>> frames_;
};

// Pointwise Laplacian: (diag lumped)^{-1} L u. Sign convention is fixed by
// the flat-torus identity laplacian(cos 2 pi x) = +4 pi^2 cos 2 pi x.
Cochain0 laplacian(const SurfaceOperators& ops, const Cochain0& u);

// Face-wise derivative of the linear interpolant: the (1,0)-part
// c = (u_x - i u_y)/2 per face.
FaceOneForm del(const SurfaceOperators& ops, const Cochain0& u);

// Conjugate differential as an edge cochain: on the canonical edge (a,b),
// a < b, the dual-edge circulation w_ab (u_b - u_a).
EdgeCochain dc(const SurfaceOperators& ops, const Cochain0& u);

// Solve L u = b for an integrated right-hand side with zero total (the
// compatible case), pinned by <u, w> = 0. The rank-one corrected operator
// L + sigma w w^T is SPD and its unique solution is automatically the
// mass-orthogonal one, so no post-projection is involved.
Cochain0 stiffness_solve_mean_zero(const SurfaceOperators& ops, const Eigen::VectorXcd& integrated_rhs,
                                   const SolveOptions& opts = {}, SolveInfo* info = nullptr);

// Solve laplacian(u) = rho on a closed surface; rho must be mass-orthogonal
// to constants (|<rho, w>| <= compat_tol, else throws) and the solution is
// pinned by <u, w> = 0.
Cochain0 poisson_solve(const SurfaceOperators& ops, const Cochain0& rho,
                       const SolveOptions& opts = {}, SolveInfo* info = nullptr,
                       double compat_tol = 1e-10);

// Harmonic fill: prescribe values on `fixed` and solve the stiffness system
// on the remaining vertices, optionally with an integrated source on the
// unknowns: L u = src on the complement of `fixed`.
Cochain0 dirichlet_solve(const SurfaceOperators& ops, const std::vector<Index>& fixed,
                         const Eigen::VectorXcd& fixed_values,
                         const Eigen::VectorXcd* integrated_source = nullptr,
                         const SolveOptions& opts = {}, SolveInfo* info = nullptr);

// Vertices strictly enclosed by the cycle: the connected region on the left
// of the oriented path, not counting the path itself. For a boundary loop
// oriented with the surface on the left this is everything off the loop.
std::vector<Index> enclosed_vertices(const SurfaceOperators& ops, const Cycle& gamma);

// Circulation of an edge cochain around a cycle: the flux through the cut
// separating the enclosed region, sum over cut edges of w_ij (u_j - u_i)
// with i enclosed. For dc(u) this is the discrete analogue of the contour
// integral of the conjugate differential.
Complex contour_integral(const SurfaceOperators& ops, const EdgeCochain& form, const Cycle& gamma);

// Line integral of a face-wise form along the cycle's edges; each edge
// contributes the mean over its incident faces of c_f * (w_f(to) - w_f(from)).
Complex contour_integral(const SurfaceOperators& ops, const FaceOneForm& form, const Cycle& gamma);

// Point residue at vertex a: -(1/2pi) times the integrated Laplacian over
// a's closed star, evaluated as the cut flux between the star and the rest.
// Never reads u(a), so it is defined even when a is a singular site.
Complex residue(const SurfaceOperators& ops, const Cochain0& u, Index a);

namespace detail {
// Jacobi-preconditioned conjugate gradients for an SPD operator given as a
// callback. Throws on iteration-cap breach.
Eigen::VectorXd conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                                   const Eigen::VectorXd& inv_diag, const Eigen::VectorXd& b,
                                   double tol, int max_iterations, SolveInfo* info);
}  // namespace detail

}  // namespace halos
