#ifndef MRCA_CUMULANT_HPP
#define MRCA_CUMULANT_HPP

#include <limits>
#include <map>
#include <optional>
#include <shared_mutex>

#include "mrca/mechanism.hpp"

namespace mrca {

struct Tolerances {
  double rel_quad = 1e-10;
  double rel_root = 1e-10;
};

// Which formulas back the evaluator. `closed_form` is only meaningful for
// the quadratic kind; `generic` forces the quadrature/root-finding path for
// every kind (used to cross-check the closed forms).
enum class Route { automatic, closed_form, generic };

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Cumulant semigroup u(λ,t), extinction function c(t), and derived constants.
///
/// Everything is driven by the decreasing primitive G(x) = ∫_x^∞ dv/ψ(v):
/// c = G⁻¹ and u(λ,t) = G⁻¹(t + G(λ)). G is evaluated by adaptive
/// quadrature relative to anchors at powers of two; anchor values are
/// computed from scratch and memoized, so results never depend on the
/// order of earlier calls. Safe for concurrent use.
class CumulantEvaluator {
public:
  /// Throws DomainError if the mechanism fails validation.
  explicit CumulantEvaluator(Mechanism mechanism, Tolerances tol = {}, Route route = Route::automatic);

  CumulantEvaluator(const CumulantEvaluator&) = delete;
  CumulantEvaluator& operator=(const CumulantEvaluator&) = delete;

  [[nodiscard]] const Mechanism& mechanism() const { return mech_; }
  [[nodiscard]] const Tolerances& tolerances() const { return tol_; }
  [[nodiscard]] bool closed_form() const { return closed_form_; }
  [[nodiscard]] double alpha() const { return mech_.alpha(); }

  /// G(x) = ∫_x^∞ dv/ψ(v), x > 0.
  [[nodiscard]] double big_g(double x) const;

  /// G(e^y); finite for every real y.
  [[nodiscard]] double big_g_log(double y) const;

  /// c(t) = G⁻¹(t), t > 0. Underflows to 0 for very large t; see log_c_of.
  [[nodiscard]] double c_of(double t) const;
  [[nodiscard]] double log_c_of(double t) const;

  /// c⁻¹(λ) = G(λ).
  [[nodiscard]] double c_inverse(double lambda) const { return big_g(lambda); }

  /// u(λ,t): u(λ,0) = λ, u(0,t) = 0, u(∞,t) = c(t).
  [[nodiscard]] double u_of(double lambda, double t) const;

  /// κ* = lim_{t→∞} c(t) e^{αt}.
  [[nodiscard]] double kappa() const;

  /// ∫_t^T ψ̃'(u(λ,s)) ds, evaluated in closed form; T may be +inf and λ may
  /// be +inf (in which case u(λ,·) = c).
  [[nodiscard]] double int_psi_tilde_u(double lambda, double t, double T) const;

  /// Λ(d) = ∫_d^∞ ψ̃'(c(r)) dr, the mean number of clans of age > d alive now.
  [[nodiscard]] double lambda_window(double d) const;

private:
  [[nodiscard]] double anchor(int k) const;
  // ∫_x^∞ dv/ψ at x = e^y, finite for any y.
  [[nodiscard]] double tail_from_log(double y) const;
  // log(ψ(x)/x) at x = e^y, finite for any y.
  [[nodiscard]] double log_psi_over_x(double y) const;
  [[nodiscard]] double head(double y_lo, double y_hi) const;
  [[nodiscard]] double kappa_by_doubling() const;
  // log ψ(u(λ,t)) + αt, stable for large t.
  [[nodiscard]] double log_psi_u_scaled(double lambda, double t) const;

  Mechanism mech_;
  Tolerances tol_;
  bool closed_form_;
  double beta_ = 0.0;   // quadratic closed form
  double theta_ = 0.0;  // quadratic closed form
  double split_ = 1.0;  // start of the substituted tail
  double g_floor_ = 0.0;  // G at the asymptotic floor x = e^{y_floor}
  double kappa_ = 0.0;

  mutable std::shared_mutex memo_mutex_;
  mutable std::map<int, double> anchors_;
};

}  // namespace mrca

#endif  // MRCA_CUMULANT_HPP
