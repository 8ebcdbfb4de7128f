#ifndef MRCA_TESTS_ORACLES_HPP
#define MRCA_TESTS_ORACLES_HPP

// Reference computations used only by the tests. Nothing here calls into
// the library's quadrature, root finding or cumulant code.

#include <algorithm>
#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double quad(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b, tol);
}

/// ∫_a^∞ f.
inline double quad_inf(const std::function<double(double)>& f, double a, double tol = 1e-12) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([&](double x) { return f(a + x); }, tol);
}

/// Plain bisection for an increasing or decreasing f with a sign change on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// u(λ,t) from ∂_t u = -ψ(u), u(λ,0) = λ, by adaptive Runge–Kutta–Fehlberg 7(8).
inline double ode_u(const std::function<double(double)>& psi, double lambda, double t, double rel = 1e-13) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;
  State x{lambda};
  auto rhs = [&](const State& y, State& dy, double) { dy[0] = -psi(std::max(0.0, y[0])); };
  odeint::integrate_adaptive(odeint::make_controlled(1e-300, rel, odeint::runge_kutta_fehlberg78<State>()), rhs, x,
                             0.0, t, 1e-6);
  return x[0];
}

/// One-sample Kolmogorov–Smirnov distance.
inline double ks(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n));
  }
  return d;
}

// Quadratic ψ(λ) = βλ² + 2βθλ.
struct QuadraticForms {
  double beta;
  double theta;
  [[nodiscard]] double psi(double l) const { return beta * l * l + 2.0 * beta * theta * l; }
  [[nodiscard]] double c(double t) const { return 2.0 * theta / std::expm1(2.0 * theta * beta * t); }
  [[nodiscard]] double g(double x) const { return std::log1p(2.0 * theta / x) / (2.0 * theta * beta); }
  [[nodiscard]] double u(double l, double t) const {
    const double e = std::exp(2.0 * theta * beta * t);
    return 2.0 * theta * l / ((2.0 * theta + l) * e - l);
  }
};

// Stable ψ(λ) = αλ + c0 λ^{1+α0}: G(x) = log(1 + α/(c0 x^{α0}))/(α α0).
struct StableForms {
  double alpha;
  double c0;
  double alpha0;
  [[nodiscard]] double psi(double l) const { return alpha * l + c0 * std::pow(l, 1.0 + alpha0); }
  [[nodiscard]] double g(double x) const {
    return std::log1p(alpha / (c0 * std::pow(x, alpha0))) / (alpha * alpha0);
  }
  [[nodiscard]] double c(double t) const {
    return std::pow(alpha / (c0 * std::expm1(alpha * alpha0 * t)), 1.0 / alpha0);
  }
  [[nodiscard]] double u(double l, double t) const { return c(t + g(l)); }
  [[nodiscard]] double kappa() const { return std::pow(alpha / c0, 1.0 / alpha0); }
};

}  // namespace oracle

#endif  // MRCA_TESTS_ORACLES_HPP
