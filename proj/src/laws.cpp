#include "mrca/laws.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "mrca/errors.hpp"

namespace mrca {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw DomainError(msg);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

StationaryLaw::StationaryLaw(std::shared_ptr<const CumulantEvaluator> ev) : ev_(std::move(ev)) {
  if (!ev_) throw DomainError("StationaryLaw: null evaluator");
}

StationaryLaw StationaryLaw::make(const MechanismSpec& spec, Tolerances tol, Route route) {
  return StationaryLaw(std::make_shared<const CumulantEvaluator>(Mechanism(spec), tol, route));
}

double StationaryLaw::laplace_Z_log(double lambda) const {
  if (lambda == 0.0) return 0.0;
  if (lambda == kInfinity) return -kInfinity;
  const auto& m = mechanism();
  const double alpha = m.alpha();
  return -alpha * ev_->big_g(lambda) + std::log(ev_->kappa() * alpha) - std::log(m.psi(lambda));
}

double StationaryLaw::laplace_Z(double lambda) const {
  require(lambda >= 0.0, "laplace_Z: lambda must be >= 0");
  return std::min(1.0, std::exp(laplace_Z_log(lambda)));
}

double StationaryLaw::mean_Z_tilted(double lambda) const {
  require(lambda > 0.0 && std::isfinite(lambda), "mean_Z_tilted: lambda must be finite and > 0");
  const auto& m = mechanism();
  return m.psi_tilde_prime(lambda) / m.psi(lambda) * laplace_Z(lambda);
}

double StationaryLaw::cdf_A(double t) const {
  require(t >= 0.0, "cdf_A: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (t == kInfinity) return 1.0;
  // κ*α e^{-αt}/ψ(c(t)), i.e. exp(-Λ(t))
  return std::exp(-ev_->lambda_window(t));
}

double StationaryLaw::pdf_A(double t) const {
  require(t > 0.0, "pdf_A: t must be > 0");
  if (t == kInfinity) return 0.0;
  // ψ̃'(c)/ψ(c) · κ*α e^{-αt} = ψ̃'(c(t)) · P(A <= t)
  const double c = ev_->c_of(t);
  // ψ̃'(c)/ψ(c) <= 2/c, below the smallest double once c overflows
  if (c == kInfinity) return 0.0;
  return mechanism().psi_tilde_prime(c) * cdf_A(t);
}

double StationaryLaw::laplace_ZA_given_A(double lambda, double t) const {
  require(lambda >= 0.0, "laplace_ZA_given_A: lambda must be >= 0");
  require(t > 0.0, "laplace_ZA_given_A: t must be > 0");
  if (lambda == 0.0) return 1.0;
  const double c = ev_->c_of(t);
  return std::exp(laplace_Z_log(lambda + c) - laplace_Z_log(c));
}

double StationaryLaw::mean_ZA_given_A(double t) const {
  require(t > 0.0, "mean_ZA_given_A: t must be > 0");
  const double c = ev_->c_of(t);
  if (c == 0.0) return mean_Z();
  const auto& m = mechanism();
  return m.psi_tilde_prime(c) / m.psi(c);
}

double StationaryLaw::laplace_ZI_given_A(double gamma, double t) const {
  require(gamma >= 0.0, "laplace_ZI_given_A: gamma must be >= 0");
  require(t > 0.0, "laplace_ZI_given_A: t must be > 0");
  if (gamma == 0.0) return 1.0;
  return std::exp(-ev_->int_psi_tilde_u(gamma, 0.0, t));
}

double StationaryLaw::laplace_ZO_given_A(double eta, double t) const {
  require(eta >= 0.0, "laplace_ZO_given_A: eta must be >= 0");
  require(t > 0.0, "laplace_ZO_given_A: t must be > 0");
  if (eta == 0.0) return 1.0;
  const double c = ev_->c_of(t);
  if (c == 0.0) throw NumericError("laplace_ZO_given_A: c(t) underflows; t too large");
  const auto& m = mechanism();
  const double top = m.psi_tilde_prime(c);
  return (top - m.psi_tilde_prime(ev_->u_of(eta, t))) / top;
}

double StationaryLaw::laplace_ZAplus_given_A(double lambda, double t) const {
  require(lambda > 0.0, "laplace_ZAplus_given_A: lambda must be > 0");
  require(t > 0.0, "laplace_ZAplus_given_A: t must be > 0");
  const double c = ev_->c_of(t);
  if (c == 0.0) throw NumericError("laplace_ZAplus_given_A: c(t) underflows; t too large");
  const auto& m = mechanism();
  // (ψ'(λ+c) - ψ'(λ)) / (ψ'(c) - ψ'(0))
  const double jump_factor = (m.psi_tilde_prime(lambda + c) - m.psi_tilde_prime(lambda)) / m.psi_tilde_prime(c);
  return laplace_ZA_given_A(lambda, t) * jump_factor;
}

double StationaryLaw::joint_transform(double lambda, double gamma, double eta, double t) const {
  require(lambda >= 0.0 && gamma >= 0.0 && eta >= 0.0, "joint_transform: arguments must be >= 0");
  require(t > 0.0, "joint_transform: t must be > 0");
  const auto& m = mechanism();
  const double c = ev_->c_of(t);
  const double u_eta = eta == 0.0 ? 0.0 : ev_->u_of(eta, t);
  const double immigration = gamma == 0.0 ? 0.0 : ev_->int_psi_tilde_u(gamma, 0.0, t);
  const double before = ev_->int_psi_tilde_u(lambda + c, 0.0, kInfinity);
  return (m.psi_tilde_prime(c) - m.psi_tilde_prime(u_eta)) * std::exp(-immigration - before);
}

double StationaryLaw::pmf_NA_given_A(int n, double t) const {
  require(n >= 1, "pmf_NA_given_A: n must be >= 1");
  require(t > 0.0, "pmf_NA_given_A: t must be > 0");
  const auto& spec = mechanism().spec();
  if (const auto* s = std::get_if<Stable>(&spec)) {
    // α0 Π_{k=1}^{n-1}(k - α0) / n!, free of t
    if (s->alpha0 == 1.0) return n == 1 ? 1.0 : 0.0;
    return std::exp(std::log(s->alpha0) + std::lgamma(n - s->alpha0) - std::lgamma(1.0 - s->alpha0) -
                    std::lgamma(n + 1.0));
  }
  if (std::holds_alternative<Quadratic>(spec)) return n == 1 ? 1.0 : 0.0;

  const auto& cm = std::get<Custom>(spec);
  const double c = ev_->c_of(t);
  if (c == 0.0) return n == 1 ? 1.0 : 0.0;
  // (-1)^{n+1} c^n ψ^{(n+1)}(c) / (n! ψ̃'(c)); every term is nonnegative.
  double numerator = n == 1 ? 2.0 * cm.beta * c : 0.0;
  const double log_c = std::log(c);
  for (const auto& a : cm.atoms) {
    numerator += a.mass * std::exp((n + 1) * std::log(a.size) + n * log_c - c * a.size - std::lgamma(n + 1.0));
  }
  return numerator / mechanism().psi_tilde_prime(c);
}

double StationaryLaw::pgf_NA_given_A(double a, double t) const {
  require(a >= 0.0 && a <= 1.0, "pgf_NA_given_A: a must lie in [0, 1]");
  require(t > 0.0, "pgf_NA_given_A: t must be > 0");
  if (a == 1.0) return 1.0;
  const double c = ev_->c_of(t);
  if (c == 0.0) throw NumericError("pgf_NA_given_A: c(t) underflows; t too large");
  const auto& m = mechanism();
  return 1.0 - m.psi_tilde_prime((1.0 - a) * c) / m.psi_tilde_prime(c);
}

double StationaryLaw::mean_NA_given_A(double t) const {
  require(t > 0.0, "mean_NA_given_A: t must be > 0");
  const auto& m = mechanism();
  const double second = m.psi_second_at_zero();
  if (!std::isfinite(second)) return kInfinity;
  const double c = ev_->c_of(t);
  if (c == 0.0) return 1.0;
  return second * c / m.psi_tilde_prime(c);
}

double StationaryLaw::an_ratio(double mu, double T) const {
  // ψ(u(μ,T))/ψ(μ) = ∂_μ u(μ,T); equals e^{-αT} at μ = 0.
  if (mu == 0.0) return std::exp(-mechanism().alpha() * T);
  const auto& m = mechanism();
  return m.psi(ev_->u_of(mu, T)) / m.psi(mu);
}

double StationaryLaw::moment_An(int n, double lambda, double T) const {
  require(n >= 1, "moment_An: n must be >= 1");
  require(lambda >= 0.0 && std::isfinite(lambda), "moment_An: lambda must be finite and >= 0");
  require(T >= 0.0, "moment_An: T must be >= 0");
  if (lambda == 0.0 && !std::isfinite(mean_Z())) {
    throw DomainError("moment_An: lambda = 0 requires E[Z] < inf");
  }
  if (T == 0.0) return 0.0;

  if (ev_->closed_form()) {
    const auto& q = std::get<Quadratic>(mechanism().spec());
    const double s = T == kInfinity ? 1.0 : -std::expm1(-2.0 * q.beta * q.theta * T);
    const double tt = 2.0 * q.theta;
    const double lead = std::exp(std::lgamma(n + 2.0) + n * std::log(s / (tt + lambda * s)));
    const double lz = tt / (tt + lambda);
    return lead * lz * lz;
  }

  if (n > kMaxFiniteDifferenceOrder) {
    std::ostringstream os;
    os << "moment_An: order " << n << " exceeds the finite-difference cap " << kMaxFiniteDifferenceOrder
       << " for non-quadratic mechanisms";
    throw CapabilityError(os.str());
  }
  if (T == kInfinity) throw DomainError("moment_An: T must be finite for non-quadratic mechanisms");

  // value = E[e^{-λZ}] (-1)^n f^{(n)}(λ)/f(λ),  f(μ) = ψ(u(μ,T))/ψ(μ)
  const double h = 1e-2 * std::max(1.0, lambda);
  const bool central = lambda - 0.5 * n * h >= 0.0;
  auto derivative = [&](double step) {
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double offset = central ? (0.5 * n - k) * step : (n - k) * step;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      acc += sign * binomial(n, k) * an_ratio(lambda + offset, T);
    }
    return acc / std::pow(step, n);
  };
  const double coarse = derivative(h);
  const double fine = derivative(0.5 * h);
  // one Richardson level: O(h²) for the central stencil, O(h) for the forward one
  const double refined = central ? (4.0 * fine - coarse) / 3.0 : 2.0 * fine - coarse;
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return laplace_Z(lambda) * sign * refined / an_ratio(lambda, T);
}

double StationaryLaw::cdf_A1_quadratic(double t) const {
  const auto* q = std::get_if<Quadratic>(&mechanism().spec());
  if (q == nullptr) throw CapabilityError("cdf_A1_quadratic: requires the quadratic mechanism");
  require(t >= 0.0, "cdf_A1_quadratic: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (t == kInfinity) return 1.0;
  const double rho = 2.0 * q->beta * q->theta * t;
  const double tail = std::exp(-rho);  // 1 - s
  const double s = -std::expm1(-rho);
  if (tail <= 0.5) {
    // 1 + (s/(1-s)) log s = Σ_{j>=1} (1-s)^j / (j(j+1)), no cancellation
    double sum = 0.0;
    double power = 1.0;
    for (int j = 1; j < 200; ++j) {
      const double term = power / (j * (j + 1.0));
      sum += term;
      if (term < 1e-18 * sum) break;
      power *= tail;
    }
    return std::min(1.0, 2.0 * s * sum);
  }
  const double r = s / tail;
  return 2.0 * r * (1.0 + r * std::log(s));
}

}  // namespace mrca
