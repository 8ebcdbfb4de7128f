#ifndef MRCA_LAWS_HPP
#define MRCA_LAWS_HPP

#include <memory>

#include "mrca/cumulant.hpp"

namespace mrca {

/// Laws of the stationary population at time 0: the size Z, the TMRCA A,
/// the sizes (Z^A, Z^I, Z^O) around the MRCA, the number N^A of oldest
/// families, and the A^n moment functionals.
///
/// General mechanisms are handled at Laplace-transform / pgf level; CDFs
/// and densities appear only where closed forms exist.
class StationaryLaw {
public:
  explicit StationaryLaw(std::shared_ptr<const CumulantEvaluator> ev);

  /// Convenience: builds its own evaluator.
  static StationaryLaw make(const MechanismSpec& spec, Tolerances tol = {}, Route route = Route::automatic);

  [[nodiscard]] const CumulantEvaluator& cumulant() const { return *ev_; }
  [[nodiscard]] const Mechanism& mechanism() const { return ev_->mechanism(); }
  [[nodiscard]] std::shared_ptr<const CumulantEvaluator> cumulant_ptr() const { return ev_; }

  /// E[e^{-λZ}] = e^{-αG(λ)} κ*α / ψ(λ).
  [[nodiscard]] double laplace_Z(double lambda) const;

  /// E[Z e^{-λZ}] = (ψ̃'(λ)/ψ(λ)) E[e^{-λZ}], λ > 0.
  [[nodiscard]] double mean_Z_tilted(double lambda) const;

  /// E[Z]; +inf when ψ''(0+) = ∞.
  [[nodiscard]] double mean_Z() const { return mechanism().mean_stationary(); }

  [[nodiscard]] double cdf_A(double t) const;
  [[nodiscard]] double pdf_A(double t) const;

  [[nodiscard]] double laplace_ZA_given_A(double lambda, double t) const;
  [[nodiscard]] double mean_ZA_given_A(double t) const;
  [[nodiscard]] double laplace_ZI_given_A(double gamma, double t) const;
  [[nodiscard]] double laplace_ZO_given_A(double eta, double t) const;
  [[nodiscard]] double laplace_ZAplus_given_A(double lambda, double t) const;

  /// E[e^{-λZ^A-γZ^I-ηZ^O}; A ∈ dt]/dt, computed directly from the joint
  /// formula (not as a product of the conditional factors).
  [[nodiscard]] double joint_transform(double lambda, double gamma, double eta, double t) const;

  [[nodiscard]] double pmf_NA_given_A(int n, double t) const;
  [[nodiscard]] double pgf_NA_given_A(double a, double t) const;

  /// E[N^A | A = t]; +inf when ψ''(0+) = ∞.
  [[nodiscard]] double mean_NA_given_A(double t) const;

  /// E[Z^n e^{-λZ} 1{A^n <= T}]. Non-quadratic kinds use finite differences
  /// in η and support n <= 4.
  [[nodiscard]] double moment_An(int n, double lambda, double T) const;

  /// P(A^1 <= t), quadratic only.
  [[nodiscard]] double cdf_A1_quadratic(double t) const;

  static constexpr int kMaxFiniteDifferenceOrder = 4;

private:
  [[nodiscard]] double laplace_Z_log(double lambda) const;
  [[nodiscard]] double an_ratio(double mu, double T) const;

  std::shared_ptr<const CumulantEvaluator> ev_;
};

}  // namespace mrca

#endif  // MRCA_LAWS_HPP
