#include "mrca/mechanism.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mrca/errors.hpp"

namespace mrca {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// e^{-x} - 1 + x without cancellation for small x.
double compensated_jump(double x) {
  if (x < 1e-4) {
    return x * x * (0.5 - x * (1.0 / 6.0 - x / 24.0));
  }
  return std::expm1(-x) + x;
}

void check_argument(double lambda, const char* where) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    std::ostringstream os;
    os << where << ": argument must be finite and >= 0, got " << lambda;
    throw DomainError(os.str());
  }
}

double alpha_of(const MechanismSpec& spec) {
  return std::visit(Overloaded{
                        [](const Quadratic& q) { return 2.0 * q.beta * q.theta; },
                        [](const Stable& s) { return s.alpha; },
                        [](const Custom& c) { return c.alpha; },
                    },
                    spec);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

std::string to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::quadratic:
      return "quadratic";
    case MechanismKind::stable:
      return "stable";
    case MechanismKind::custom:
      return "custom";
  }
  return "unknown";
}

ValidationReport validate(const MechanismSpec& spec) {
  ValidationReport r;
  std::visit(
      Overloaded{
          [&](const Quadratic& q) {
            const bool beta_ok = positive_finite(q.beta);
            const bool theta_ok = positive_finite(q.theta);
            if (!beta_ok) r.reasons.emplace_back("quadratic: beta must be finite and > 0");
            if (!theta_ok) r.reasons.emplace_back("quadratic: theta must be finite and > 0");
            r.subcritical = beta_ok && theta_ok;
            r.nontrivial = beta_ok;
            r.grey = beta_ok;
            r.llogl = true;
          },
          [&](const Stable& s) {
            const bool alpha_ok = positive_finite(s.alpha);
            const bool c0_ok = positive_finite(s.c0);
            const bool a0_ok = std::isfinite(s.alpha0) && s.alpha0 > 0.0 && s.alpha0 <= 1.0;
            if (!alpha_ok) r.reasons.emplace_back("stable: alpha = psi'(0) must be finite and > 0");
            if (!c0_ok) r.reasons.emplace_back("stable: c0 must be finite and > 0");
            if (!a0_ok) r.reasons.emplace_back("stable: alpha0 must lie in (0, 1]");
            r.subcritical = alpha_ok;
            r.nontrivial = c0_ok && a0_ok;
            r.grey = c0_ok && a0_ok;
            r.llogl = a0_ok;
          },
          [&](const Custom& c) {
            const bool alpha_ok = positive_finite(c.alpha);
            const bool beta_ok = std::isfinite(c.beta) && c.beta >= 0.0;
            bool atoms_ok = true;
            for (const auto& a : c.atoms) {
              if (!positive_finite(a.mass) || !positive_finite(a.size)) atoms_ok = false;
            }
            if (!alpha_ok) r.reasons.emplace_back("custom: alpha = psi'(0) must be finite and > 0");
            if (!beta_ok) r.reasons.emplace_back("custom: beta must be finite and >= 0");
            if (!atoms_ok) r.reasons.emplace_back("custom: atom masses and sizes must be finite and > 0");
            r.subcritical = alpha_ok;
            const bool diffusive = beta_ok && c.beta > 0.0;
            // A finite atom list gives ψ at most linear growth without β, so
            // both the integral at infinity and non-triviality need β > 0.
            r.grey = diffusive && atoms_ok;
            r.nontrivial = diffusive;
            if (beta_ok && !diffusive) {
              r.reasons.emplace_back(
                  "custom: beta = 0 with finite jump measure; psi grows linearly and "
                  "int_1^inf dv/psi(v) diverges");
            }
            r.llogl = atoms_ok;
          },
      },
      spec);
  return r;
}

Mechanism::Mechanism(MechanismSpec spec)
    : spec_(std::move(spec)),
      kind_(static_cast<MechanismKind>(spec_.index())),
      alpha_(alpha_of(spec_)) {}

double Mechanism::psi(double lambda) const {
  check_argument(lambda, "psi");
  return std::visit(Overloaded{
                        [&](const Quadratic& q) { return q.beta * lambda * (lambda + 2.0 * q.theta); },
                        [&](const Stable& s) {
                          return s.alpha * lambda + s.c0 * std::pow(lambda, 1.0 + s.alpha0);
                        },
                        [&](const Custom& c) {
                          double jumps = 0.0;
                          for (const auto& a : c.atoms) jumps += a.mass * compensated_jump(lambda * a.size);
                          return c.alpha * lambda + c.beta * lambda * lambda + jumps;
                        },
                    },
                    spec_);
}

double Mechanism::psi_prime(double lambda) const {
  check_argument(lambda, "psi_prime");
  return alpha_ + psi_tilde_prime(lambda);
}

double Mechanism::psi_tilde_prime(double lambda) const {
  check_argument(lambda, "psi_tilde_prime");
  return std::visit(Overloaded{
                        [&](const Quadratic& q) { return 2.0 * q.beta * lambda; },
                        [&](const Stable& s) {
                          return (1.0 + s.alpha0) * s.c0 * std::pow(lambda, s.alpha0);
                        },
                        [&](const Custom& c) {
                          double jumps = 0.0;
                          for (const auto& a : c.atoms) jumps -= a.mass * a.size * std::expm1(-lambda * a.size);
                          return 2.0 * c.beta * lambda + jumps;
                        },
                    },
                    spec_);
}

double Mechanism::psi_derivative(int k, double lambda) const {
  if (k < 2) throw DomainError("psi_derivative: order must be >= 2");
  check_argument(lambda, "psi_derivative");
  return std::visit(
      Overloaded{
          [&](const Quadratic& q) { return k == 2 ? 2.0 * q.beta : 0.0; },
          [&](const Stable& s) {
            double coeff = s.c0;
            for (int j = 0; j < k; ++j) coeff *= (1.0 + s.alpha0 - j);
            if (coeff == 0.0) return 0.0;
            const double exponent = 1.0 + s.alpha0 - k;
            if (lambda == 0.0) {
              if (exponent == 0.0) return coeff;
              return exponent > 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), coeff);
            }
            return coeff * std::pow(lambda, exponent);
          },
          [&](const Custom& c) {
            double value = k == 2 ? 2.0 * c.beta : 0.0;
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            for (const auto& a : c.atoms) {
              value += sign * a.mass * std::exp(k * std::log(a.size) - lambda * a.size);
            }
            return value;
          },
      },
      spec_);
}

double Mechanism::psi_second_at_zero() const { return psi_derivative(2, 0.0); }

double Mechanism::mean_stationary() const { return psi_second_at_zero() / alpha_; }

double Mechanism::leading_term(double lambda) const {
  return std::visit(Overloaded{
                        [&](const Quadratic& q) { return q.beta * lambda * lambda; },
                        [&](const Stable& s) { return s.c0 * std::pow(lambda, 1.0 + s.alpha0); },
                        [&](const Custom& c) { return c.beta * lambda * lambda; },
                    },
                    spec_);
}

double Mechanism::growth_exponent() const {
  if (const auto* s = std::get_if<Stable>(&spec_)) return s->alpha0;
  return 1.0;
}

}  // namespace mrca
