#ifndef MRCA_NUMERICS_HPP
#define MRCA_NUMERICS_HPP

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstddef>
#include <span>
#include <tuple>
#include <sstream>
#include <utility>

#include "mrca/errors.hpp"

namespace mrca::numerics {

/// Adaptive 15-point Gauss–Kronrod quadrature of f over a finite [a, b].
///
/// The interval is mapped onto [-1, 1] first: Boost's subdivision test
/// compares an unscaled error with a scaled tolerance, which never
/// terminates on short intervals.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto mapped = [&](double x) { return f(mid + half * x); };
  return half * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(mapped, -1.0, 1.0,
                                                                              /*max_depth=*/30, rel_tol);
}

/// Root of a monotone function on a bracket [lo, hi].
///
/// `fdf(x)` returns {f(x), f'(x)}. f(lo) and f(hi) must have opposite
/// signs (or one of them be zero). Newton steps that leave the bracket or
/// fail to halve the previous step are replaced by bisection, so the
/// iteration converges whenever the bracket is valid.
template <class FdF>
double safeguarded_newton(FdF&& fdf, double lo, double hi, double x_tol, int max_iter = 200) {
  auto [flo, dlo] = fdf(lo);
  auto [fhi, dhi] = fdf(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream os;
    os << "safeguarded_newton: root not bracketed in [" << lo << ", " << hi << "]";
    throw NumericError(os.str());
  }
  // orient so that f(xl) < 0 < f(xh)
  double xl = flo < 0.0 ? lo : hi;
  double xh = flo < 0.0 ? hi : lo;
  double x = 0.5 * (lo + hi);
  double dx_old = std::abs(hi - lo);
  double dx = dx_old;
  auto [f, df] = fdf(x);
  for (int it = 0; it < max_iter; ++it) {
    const bool newton_leaves = ((x - xh) * df - f) * ((x - xl) * df - f) > 0.0;
    const bool newton_slow = std::abs(2.0 * f) > std::abs(dx_old * df);
    if (newton_leaves || newton_slow || df == 0.0) {
      dx_old = dx;
      dx = 0.5 * (xh - xl);
      x = xl + dx;
    } else {
      dx_old = dx;
      dx = f / df;
      x -= dx;
    }
    if (std::abs(dx) <= x_tol) return x;
    std::tie(f, df) = fdf(x);
    if (f == 0.0) return x;
    if (f < 0.0) {
      xl = x;
    } else {
      xh = x;
    }
    if (std::abs(xh - xl) <= x_tol) return 0.5 * (xl + xh);
  }
  std::ostringstream os;
  os << "safeguarded_newton: no convergence after " << max_iter << " iterations (x = " << x << ")";
  throw NumericError(os.str());
}

/// Pairwise (cascade) summation; result depends only on the order of `xs`.
double pairwise_sum(std::span<const double> xs);

}  // namespace mrca::numerics

#endif  // MRCA_NUMERICS_HPP
