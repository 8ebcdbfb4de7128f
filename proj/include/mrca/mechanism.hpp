#ifndef MRCA_MECHANISM_HPP
#define MRCA_MECHANISM_HPP

#include <string>
#include <variant>
#include <vector>

namespace mrca {

// ψ(λ) = βλ² + 2βθλ.
struct Quadratic {
  double beta;
  double theta;
};

// ψ(λ) = αλ + c0 λ^{1+α0}, α0 ∈ (0,1].
struct Stable {
  double alpha;
  double c0;
  double alpha0;
};

// One atom m·δ_ℓ of the jump measure π.
struct Atom {
  double mass;
  double size;
};

// ψ(λ) = αλ + βλ² + Σ m_i (e^{-λℓ_i} - 1 + λℓ_i).
struct Custom {
  double alpha;
  double beta;
  std::vector<Atom> atoms;
};

using MechanismSpec = std::variant<Quadratic, Stable, Custom>;

enum class MechanismKind { quadratic, stable, custom };

struct ValidationReport {
  bool subcritical = false;
  bool grey = false;      // ∫_1^∞ dv/ψ(v) < ∞
  bool llogl = false;     // ∫ ℓ log ℓ π(dℓ) < ∞
  bool nontrivial = false;
  std::vector<std::string> reasons;

  [[nodiscard]] bool ok() const { return subcritical && grey && llogl && nontrivial; }
};

ValidationReport validate(const MechanismSpec& spec);

/// Branching mechanism of a subcritical continuous-state branching process.
///
/// Immutable; every member is a pure function of the spec. Construction
/// does not validate (use `validate`), but evaluation rejects negative or
/// non-finite arguments with DomainError.
class Mechanism {
public:
  explicit Mechanism(MechanismSpec spec);

  [[nodiscard]] const MechanismSpec& spec() const { return spec_; }
  [[nodiscard]] MechanismKind kind() const { return kind_; }

  /// ψ'(0) = α.
  [[nodiscard]] double alpha() const { return alpha_; }

  [[nodiscard]] double psi(double lambda) const;
  [[nodiscard]] double psi_prime(double lambda) const;

  /// Immigration function ψ̃'(λ) = ψ'(λ) - α.
  [[nodiscard]] double psi_tilde_prime(double lambda) const;

  /// k-th derivative ψ^{(k)}(λ), k >= 2, λ > 0 (λ = 0 allowed when finite).
  /// Returns +inf for the stable kind at λ = 0 when the derivative blows up.
  [[nodiscard]] double psi_derivative(int k, double lambda) const;

  /// ψ''(0+); +inf for the stable kind with α0 < 1.
  [[nodiscard]] double psi_second_at_zero() const;

  /// E[Z] = ψ''(0+)/ψ'(0), possibly +inf.
  [[nodiscard]] double mean_stationary() const;

  /// Part of ψ that dominates at infinity (βλ² or c0 λ^{1+α0}).
  [[nodiscard]] double leading_term(double lambda) const;

  /// Exponent γ such that ψ(λ) grows like λ^{1+γ}.
  [[nodiscard]] double growth_exponent() const;

  [[nodiscard]] ValidationReport validate() const { return mrca::validate(spec_); }

private:
  MechanismSpec spec_;
  MechanismKind kind_;
  double alpha_;
};

std::string to_string(MechanismKind kind);

}  // namespace mrca

#endif  // MRCA_MECHANISM_HPP
