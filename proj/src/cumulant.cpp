#include "mrca/cumulant.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

#include "mrca/errors.hpp"
#include "mrca/numerics.hpp"

namespace mrca {

namespace {

// Below x = e^{kLogFloor}, 1/ψ(v) = 1/(αv) to double precision and G is
// continued analytically.
constexpr double kLogFloor = -460.0;

// log(e^z - 1) for z > 0 without overflow.
double log_expm1(double z) {
  return z > 30.0 ? z + std::log1p(-std::exp(-z)) : std::log(std::expm1(z));
}

// log(1 + e^z).
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void require(bool ok, const char* msg) {
  if (!ok) throw DomainError(msg);
}

}  // namespace

CumulantEvaluator::CumulantEvaluator(Mechanism mechanism, Tolerances tol, Route route)
    : mech_(std::move(mechanism)), tol_(tol), closed_form_(false) {
  const auto report = mech_.validate();
  if (!report.ok()) {
    std::ostringstream os;
    os << "invalid branching mechanism:";
    for (const auto& r : report.reasons) os << " " << r << ";";
    throw DomainError(os.str());
  }
  if (!(tol_.rel_quad > 0.0) || !(tol_.rel_root > 0.0)) {
    throw DomainError("tolerances must be positive");
  }
  const auto* quad = std::get_if<Quadratic>(&mech_.spec());
  if (route == Route::closed_form && quad == nullptr) {
    throw CapabilityError("closed-form cumulant route requires the quadratic mechanism");
  }
  if (quad != nullptr && route != Route::generic) {
    closed_form_ = true;
    beta_ = quad->beta;
    theta_ = quad->theta;
    kappa_ = 2.0 * theta_;
    return;
  }

  // Tail substitution starts where the leading power dominates ψ tenfold.
  int j = 0;
  for (; j < 1000; ++j) {
    const double v = std::ldexp(1.0, j);
    const double lead = mech_.leading_term(v);
    if (lead >= 10.0 * (mech_.psi(v) - lead)) break;
  }
  split_ = std::ldexp(1.0, j);
  g_floor_ = big_g_log(kLogFloor);
  kappa_ = kappa_by_doubling();
}

double CumulantEvaluator::tail_from_log(double y) const {
  // ∫_x^∞ dv/ψ(v) with w = v^{-γ}: the integrand tends to 1/(γ·lead coeff)
  // as w → 0, so no endpoint singularity remains.
  const double gamma = mech_.growth_exponent();
  const double w_max = std::exp(-gamma * y);
  const auto& spec = mech_.spec();
  auto integrand = [&](double w) -> double {
    if (const auto* s = std::get_if<Stable>(&spec)) {
      return 1.0 / (gamma * (s->alpha * w + s->c0));
    }
    double alpha = 0.0;
    double beta = 0.0;
    double jumps = 0.0;
    if (const auto* q = std::get_if<Quadratic>(&spec)) {
      alpha = 2.0 * q->beta * q->theta;
      beta = q->beta;
    } else {
      const auto& c = std::get<Custom>(spec);
      alpha = c.alpha;
      beta = c.beta;
      for (const auto& a : c.atoms) {
        // w² (e^{-ℓ/w} - 1 + ℓ/w)
        jumps += a.mass * (w * w * std::expm1(-a.size / w) + a.size * w);
      }
    }
    return 1.0 / (alpha * w + beta + jumps);
  };
  return numerics::integrate(integrand, 0.0, w_max, tol_.rel_quad);
}

double CumulantEvaluator::head(double y_lo, double y_hi) const {
  if (y_lo >= y_hi) return 0.0;
  auto integrand = [&](double y) {
    const double x = std::exp(y);
    return x / mech_.psi(x);
  };
  return numerics::integrate(integrand, y_lo, y_hi, tol_.rel_quad);
}

double CumulantEvaluator::log_psi_over_x(double y) const {
  if (y < kLogFloor) return std::log(mech_.alpha());
  if (y < 700.0) {
    const double x = std::exp(y);
    return std::log(mech_.psi(x) / x);
  }
  // ψ(x)/x = slope + k x^γ up to O(1/x), slope being the linear growth at infinity
  double slope = mech_.alpha();
  if (const auto* c = std::get_if<Custom>(&mech_.spec())) {
    for (const auto& a : c->atoms) slope += a.mass * a.size;
  }
  const double log_power = std::log(mech_.leading_term(1.0)) + mech_.growth_exponent() * y;
  const double log_slope = std::log(slope);
  return std::max(log_power, log_slope) + std::log1p(std::exp(-std::abs(log_power - log_slope)));
}

double CumulantEvaluator::anchor(int k) const {
  {
    std::shared_lock lock(memo_mutex_);
    if (auto it = anchors_.find(k); it != anchors_.end()) return it->second;
  }
  // Computed from scratch so the value is independent of call history.
  const double value = tail_from_log(std::log(split_)) + head(k * std::log(2.0), std::log(split_));
  std::unique_lock lock(memo_mutex_);
  anchors_.emplace(k, value);
  return value;
}

double CumulantEvaluator::big_g_log(double y) const {
  if (std::isnan(y)) throw DomainError("big_g: NaN argument");
  if (y == kInfinity) return 0.0;
  if (y == -kInfinity) return kInfinity;
  if (closed_form_) {
    // (1/2θβ) log(1 + 2θ/x)
    return softplus(std::log(2.0 * theta_) - y) / (2.0 * theta_ * beta_);
  }
  if (y < kLogFloor) return g_floor_ + (kLogFloor - y) / mech_.alpha();
  if (y >= std::log(split_)) return tail_from_log(y);
  const double x = std::exp(y);
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m·2^e, m ∈ [0.5, 1)
  const int k = (m == 0.5) ? e - 1 : e;
  const double top = std::ldexp(1.0, k);
  if (top >= split_) return tail_from_log(std::log(split_)) + head(y, std::log(split_));
  if (top == x) return anchor(k);
  return anchor(k) + head(y, k * std::log(2.0));
}

double CumulantEvaluator::big_g(double x) const {
  require(x > 0.0, "big_g: x must be > 0");
  if (x == kInfinity) return 0.0;
  if (closed_form_) return std::log1p(2.0 * theta_ / x) / (2.0 * theta_ * beta_);
  return big_g_log(std::log(x));
}

double CumulantEvaluator::log_c_of(double t) const {
  require(t > 0.0, "c_of: t must be > 0");
  if (t == kInfinity) return -kInfinity;
  if (closed_form_) return std::log(2.0 * theta_) - log_expm1(2.0 * theta_ * beta_ * t);

  const double alpha = mech_.alpha();
  // Below the floor G is affine in y and the root is explicit.
  if (t >= g_floor_) return kLogFloor - alpha * (t - g_floor_);
  auto g_minus_t = [&](double y) { return big_g_log(y) - t; };
  auto fdf = [&](double y) -> std::pair<double, double> {
    const double f = g_minus_t(y);
    if (y < kLogFloor) return {f, -1.0 / alpha};
    return {f, -std::exp(-log_psi_over_x(y))};
  };

  // Bracket the root of the decreasing map y ↦ G(e^y) - t.
  const double g1 = big_g_log(0.0);
  double lo = 0.0;
  double hi = 0.0;
  if (g1 > t) {
    double step = 1.0;
    hi = step;
    while (g_minus_t(hi) > 0.0) {
      lo = hi;
      step *= 2.0;
      hi = lo + step;
      // G(e^y) underflows to 0 for finite y, so this only guards against NaN.
      if (!(hi < 1e7)) throw NumericError("c_of: no bracket for the root");
    }
  } else {
    // G(e^y) - G(1) <= -y/α for y < 0, so this start is at or above the root.
    hi = -alpha * (t - g1);
    double step = 1.0;
    lo = hi - step;
    while (g_minus_t(lo) < 0.0) {
      hi = lo;
      step *= 2.0;
      lo = hi - step;
    }
  }
  const double x_tol = std::max(1e-3 * tol_.rel_root, 4.0 * std::numeric_limits<double>::epsilon() *
                                                          std::max(1.0, std::abs(lo)));
  return numerics::safeguarded_newton(fdf, lo, hi, x_tol);
}

double CumulantEvaluator::c_of(double t) const { return std::exp(log_c_of(t)); }

double CumulantEvaluator::u_of(double lambda, double t) const {
  require(lambda >= 0.0, "u_of: lambda must be >= 0");
  require(t >= 0.0, "u_of: t must be >= 0");
  if (t == 0.0) return lambda;
  if (lambda == 0.0) return 0.0;
  if (lambda == kInfinity) return c_of(t);
  if (closed_form_) {
    const double rho = 2.0 * theta_ * beta_ * t;
    return 2.0 * theta_ * lambda / (2.0 * theta_ * std::exp(rho) + lambda * std::expm1(rho));
  }
  return std::exp(log_c_of(t + big_g(lambda)));
}

double CumulantEvaluator::log_psi_u_scaled(double lambda, double t) const {
  double log_u = 0.0;
  if (t == 0.0) {
    log_u = std::log(lambda);
  } else if (lambda == kInfinity) {
    log_u = log_c_of(t);
  } else if (closed_form_) {
    const double rho = 2.0 * theta_ * beta_ * t;
    log_u = std::log(2.0 * theta_ * lambda) - rho - std::log(2.0 * theta_ - lambda * std::expm1(-rho));
  } else {
    log_u = log_c_of(t + big_g(lambda));
  }
  return log_u + log_psi_over_x(log_u) + mech_.alpha() * t;
}

double CumulantEvaluator::kappa() const { return kappa_; }

double CumulantEvaluator::kappa_by_doubling() const {
  const double alpha = mech_.alpha();
  double T = 5.0 / alpha;
  double prev = std::exp(log_c_of(T) + alpha * T);
  std::ostringstream trace;
  trace << prev;
  for (int k = 1; k <= 60; ++k) {
    T *= 2.0;
    const double value = std::exp(log_c_of(T) + alpha * T);
    trace << ", " << value;
    if (std::abs(value - prev) < 1e-8 * std::abs(value)) return value;
    prev = value;
  }
  throw NumericError("kappa: c(T)e^{alpha T} did not settle after 60 doublings; sequence: " + trace.str());
}

double CumulantEvaluator::int_psi_tilde_u(double lambda, double t, double T) const {
  require(lambda > 0.0, "int_psi_tilde_u: lambda must be > 0");
  require(t >= 0.0 && t <= T, "int_psi_tilde_u: need 0 <= t <= T");
  if (t == T) return 0.0;
  if (lambda == kInfinity && t == 0.0) {
    throw DomainError("int_psi_tilde_u: integral of psi~'(c(s)) diverges at s = 0");
  }
  const double lower = log_psi_u_scaled(lambda, t);
  if (T == kInfinity) {
    const double g = lambda == kInfinity ? 0.0 : big_g(lambda);
    return lower + mech_.alpha() * g - std::log(kappa_ * mech_.alpha());
  }
  return lower - log_psi_u_scaled(lambda, T);
}

double CumulantEvaluator::lambda_window(double d) const {
  require(d > 0.0, "lambda_window: d must be > 0");
  // quadratic: ψ(c(d))e^{ρ}/(κα) = (1 − e^{-ρ})^{-2} with ρ = 2θβd
  if (closed_form_) return -2.0 * std::log1p(-std::exp(-2.0 * theta_ * beta_ * d));
  return std::max(0.0, int_psi_tilde_u(kInfinity, d, kInfinity));
}

}  // namespace mrca
