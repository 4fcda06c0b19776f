#include "halos/indicatrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace halos {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double median_abs(const std::vector<Complex>& v) {
  std::vector<double> a(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) a[k] = std::abs(v[k]);
  std::sort(a.begin(), a.end());
  const std::size_t h = a.size() / 2;
  return a.size() % 2 ? a[h] : 0.5 * (a[h - 1] + a[h]);
}

}  // namespace

BoundaryFunctions sample_unit_circle(int n, const std::function<Complex(Complex)>& f1,
                                     const std::function<Complex(Complex)>& f2) {
  if (n < 12) throw std::runtime_error("contour sampling needs at least 12 points");
  BoundaryFunctions bf;
  bf.f1.resize(static_cast<std::size_t>(n));
  bf.f2.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = kTwoPi * k / n;
    const Complex z(std::cos(t), std::sin(t));
    bf.f1[static_cast<std::size_t>(k)] = f1(z);
    bf.f2[static_cast<std::size_t>(k)] = f2(z);
  }
  return bf;
}

std::vector<Complex> periodic_derivative(const std::vector<Complex>& v) {
  const std::size_t n = v.size();
  if (n < 7) throw std::runtime_error("periodic derivative needs at least 7 samples");
  std::vector<Complex> d(n);
  auto at = [&](std::size_t k, long off) { return v[(k + n + static_cast<std::size_t>(off + static_cast<long>(n))) % n]; };
  for (std::size_t k = 0; k < n; ++k) {
    d[k] = (-at(k, -3) + 9.0 * at(k, -2) - 45.0 * at(k, -1) + 45.0 * at(k, 1) - 9.0 * at(k, 2) +
            at(k, 3)) /
           60.0;
  }
  return d;
}

IndicatrixValue indicatrix_value(const BoundaryFunctions& bf, Complex xi0, Complex xi1,
                                 const IndicatrixOptions& opts) {
  const std::size_t n = bf.size();
  if (n < 12) throw std::runtime_error("indicatrix needs at least 12 contour samples");
  if (bf.f2.size() != n) throw std::runtime_error("contour sample sizes differ");

  std::vector<Complex> denom(n);
  for (std::size_t k = 0; k < n; ++k) denom[k] = xi0 + xi1 * bf.f1[k] + bf.f2[k];

  IndicatrixValue out;
  const double med = median_abs(denom);
  double min_abs = std::numeric_limits<double>::infinity();
  for (const Complex& d : denom) min_abs = std::min(min_abs, std::abs(d));
  out.min_denominator = med > 0.0 ? min_abs / med : 0.0;
  if (out.min_denominator < opts.denominator_tol) return out;  // root on the contour; invalid

  const auto dd = periodic_derivative(denom);
  Complex winding = 0.0, value = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Complex ratio = dd[k] / denom[k];
    winding += ratio;
    value += bf.f1[k] * ratio;
  }
  const Complex itwopi(0.0, kTwoPi);
  winding /= itwopi;
  value /= itwopi;

  const double nearest = std::round(winding.real());
  out.winding = static_cast<int>(nearest);
  out.winding_defect = std::abs(winding - Complex(nearest, 0.0));
  out.g = value;
  out.valid = out.winding_defect <= opts.winding_tol;
  return out;
}

IndicatrixGrid indicatrix_grid(const BoundaryFunctions& bf, double xi0_lo, double xi0_hi, int n0,
                               double xi1_lo, double xi1_hi, int n1, const IndicatrixOptions& opts) {
  if (n0 < 2 || n1 < 2) throw std::runtime_error("indicatrix grid needs at least 2 points per axis");
  IndicatrixGrid g;
  g.xi0.resize(static_cast<std::size_t>(n0));
  g.xi1.resize(static_cast<std::size_t>(n1));
  for (int i = 0; i < n0; ++i) g.xi0[static_cast<std::size_t>(i)] = xi0_lo + (xi0_hi - xi0_lo) * i / (n0 - 1);
  for (int j = 0; j < n1; ++j) g.xi1[static_cast<std::size_t>(j)] = xi1_lo + (xi1_hi - xi1_lo) * j / (n1 - 1);
  g.values.reserve(static_cast<std::size_t>(n0) * static_cast<std::size_t>(n1));
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i)
      g.values.push_back(indicatrix_value(bf, g.xi0[static_cast<std::size_t>(i)],
                                          g.xi1[static_cast<std::size_t>(j)], opts));
  return g;
}

std::vector<double> shockwave_residual(const IndicatrixGrid& g) {
  const std::size_t n0 = g.n0(), n1 = g.n1();
  std::vector<double> res(n0 * n1, std::numeric_limits<double>::quiet_NaN());
  if (n0 < 3 || n1 < 3) return res;
  const double h0 = g.xi0[1] - g.xi0[0];
  const double h1 = g.xi1[1] - g.xi1[0];
  for (std::size_t j = 1; j + 1 < n1; ++j) {
    for (std::size_t i = 1; i + 1 < n0; ++i) {
      const IndicatrixValue& c = g.at(i, j);
      const IndicatrixValue& xm = g.at(i - 1, j);
      const IndicatrixValue& xp = g.at(i + 1, j);
      const IndicatrixValue& ym = g.at(i, j - 1);
      const IndicatrixValue& yp = g.at(i, j + 1);
      const bool usable = c.valid && xm.valid && xp.valid && ym.valid && yp.valid &&
                          xm.winding == c.winding && xp.winding == c.winding &&
                          ym.winding == c.winding && yp.winding == c.winding;
      if (!usable) continue;
      const Complex gx = (xp.g - xm.g) / (2.0 * h0);
      const Complex gy = (yp.g - ym.g) / (2.0 * h1);
      res[j * n0 + i] = std::abs(c.g * gx - gy);
    }
  }
  return res;
}

GenericityReport genericity_verdict(const IndicatrixGrid& g, const GenericityOptions& opts) {
  const std::size_t n0 = g.n0(), n1 = g.n1();
  if (n0 < 5 || n1 < 5) throw std::runtime_error("genericity check needs at least a 5 x 5 grid");
  const double h0 = g.xi0[1] - g.xi0[0];

  GenericityReport rep;
  for (const auto& v : g.values)
    if (v.valid) rep.scale = std::max(rep.scale, std::abs(v.g));

  const auto residual = shockwave_residual(g);
  rep.bend_curvature = std::numeric_limits<double>::infinity();

  for (std::size_t j = 1; j + 1 < n1; ++j) {
    for (std::size_t i = 1; i + 1 < n0; ++i) {
      if (std::isnan(residual[j * n0 + i])) continue;  // the same stencil gate applies
      const IndicatrixValue& c = g.at(i, j);
      const double curv =
          std::abs(g.at(i + 1, j).g - 2.0 * c.g + g.at(i - 1, j).g) / (h0 * h0);
      if (c.winding == 1) {
        ++rep.n_single_cells;
        rep.branch_residual = std::max(rep.branch_residual, residual[j * n0 + i]);
        rep.bend_curvature = std::min(rep.bend_curvature, curv);
      } else if (c.winding >= opts.saturated_winding) {
        ++rep.n_saturated_cells;
        rep.flat_curvature = std::max(rep.flat_curvature, curv);
      }
    }
  }
  if (rep.n_single_cells == 0) rep.bend_curvature = 0.0;

  const bool branch_ok = rep.n_single_cells == 0 || rep.branch_residual <= opts.branch_tol * rep.scale;
  const bool flat_ok = rep.n_saturated_cells == 0 || rep.flat_curvature <= opts.flat_tol * rep.scale;
  // The curvature floor is an existence clause: a sweep with no single-root
  // cells cannot be certified generic.
  const bool bend_ok = rep.n_single_cells > 0 && rep.bend_curvature >= opts.bend_tol * rep.scale;
  rep.vacuous = rep.n_single_cells == 0 || rep.n_saturated_cells == 0;
  rep.pass = branch_ok && flat_ok && bend_ok;
  if (!branch_ok)
    rep.reason = "transport identity violated on single-root cells";
  else if (!flat_ok)
    rep.reason = "root sum not flat where all roots are enclosed";
  else if (!bend_ok)
    rep.reason = rep.n_single_cells == 0 ? "no single-root cells in the sweep"
                                         : "single-root sheet is degenerate (no curvature)";
  else if (rep.vacuous)
    rep.reason = "flatness clause had no cells to test";
  return rep;
}

}  // namespace halos
