#pragma once

#include <functional>
#include <string>
#include <vector>

#include "halos/surface.hpp"

namespace halos {

// Equally spaced samples of two functions along a closed oriented contour,
// parametrized by t in [0,1). The contour itself never appears; everything
// downstream is built from the two sample sequences.
struct BoundaryFunctions {
  std::vector<Complex> f1;
  std::vector<Complex> f2;

  std::size_t size() const { return f1.size(); }
};

// Samples f1, f2 on the counterclockwise unit circle.
BoundaryFunctions sample_unit_circle(int n, const std::function<Complex(Complex)>& f1,
                                     const std::function<Complex(Complex)>& f2);

// Derivative with respect to the sample index, sixth-order centered stencil
// with periodic wrap. Needs at least 7 samples. Divide by the parameter step
// to get d/dt; the winding integrals below never need to, the steps cancel.
std::vector<Complex> periodic_derivative(const std::vector<Complex>& v);

struct IndicatrixOptions {
  double winding_tol = 0.05;      // allowed distance of the raw winding integral to an integer
  double denominator_tol = 1e-6;  // min |D| along the contour as a share of the median |D|
};

// One evaluation of the root-sum transform at a coefficient pair: with
// D(t) = xi0 + xi1 f1(t) + f2(t), the value is (1/2pi i) of the contour sum
// of f1 dD/D, which equals the sum of f1 over the enclosed roots of D. The
// winding is the enclosed root count.
struct IndicatrixValue {
  Complex g = 0.0;
  int winding = 0;
  double winding_defect = 0.0;   // |raw winding integral - nearest integer|
  double min_denominator = 0.0;  // min |D| / median |D| along the contour
  bool valid = false;
};

IndicatrixValue indicatrix_value(const BoundaryFunctions& bf, Complex xi0, Complex xi1,
                                 const IndicatrixOptions& opts = {});

// Rectangular real (xi0, xi1) sweep, row-major with xi0 fastest.
struct IndicatrixGrid {
  std::vector<double> xi0;
  std::vector<double> xi1;
  std::vector<IndicatrixValue> values;

  std::size_t n0() const { return xi0.size(); }
  std::size_t n1() const { return xi1.size(); }
  const IndicatrixValue& at(std::size_t i0, std::size_t i1) const { return values[i1 * n0() + i0]; }
};

IndicatrixGrid indicatrix_grid(const BoundaryFunctions& bf, double xi0_lo, double xi0_hi, int n0,
                               double xi1_lo, double xi1_hi, int n1, const IndicatrixOptions& opts = {});

// Residual of the characteristic transport identity dG/dxi1 = G dG/dxi0 at
// each grid point, centered differences. NaN where the five-point stencil
// leaves the grid, touches an invalid value, or crosses a winding change.
std::vector<double> shockwave_residual(const IndicatrixGrid& g);

struct GenericityOptions {
  double branch_tol = 1e-4;  // transport residual bound on single-root cells
  double flat_tol = 1e-4;    // curvature bound where every root is enclosed
  double bend_tol = 1e-6;    // curvature floor on single-root cells
  int saturated_winding = 2; // winding at which the root sum is exhaustive
};

struct GenericityReport {
  double scale = 1.0;               // max(1, sup |G|) over valid points
  double branch_residual = 0.0;     // max transport residual, single-root cells
  double flat_curvature = 0.0;      // max |d2G/dxi0^2|, saturated cells
  double bend_curvature = 0.0;      // min |d2G/dxi0^2|, single-root cells
  int n_single_cells = 0;
  int n_saturated_cells = 0;
  bool vacuous = false;             // some clause had no cells to test
  bool pass = false;
  std::string reason;
};

// Three-clause genericity check on a sweep: the transport identity holds on
// single-root cells, the root sum is flat in xi0 where all roots are
// enclosed, and single-root cells exist and are genuinely curved (a sweep
// with no single-root cells fails the third clause rather than passing
// vacuously). Needs at least a 5 x 5 grid.
GenericityReport genericity_verdict(const IndicatrixGrid& g, const GenericityOptions& opts = {});

}  // namespace halos
