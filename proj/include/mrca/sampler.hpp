#ifndef MRCA_SAMPLER_HPP
#define MRCA_SAMPLER_HPP

#include <cstdint>

#include "mrca/laws.hpp"
#include "mrca/rng.hpp"

namespace mrca {

/// One draw of the MRCA tuple at time 0.
struct MrcaSample {
  double A;    // TMRCA
  double Z;    // current population size, Z = Z_I + Z_O
  double Z_A;  // size just before the MRCA
  double Z_I;  // size born after the MRCA
  double Z_O;  // size descending from the oldest clan
};

/// Joint draw of (Z_{-s}, M_s, Z_0).
struct AncestorSample {
  double Z_past;
  std::uint64_t M;
  double Z_now;
  double s;
};

// Exact samplers. The `_quadratic` ones throw CapabilityError for any
// other mechanism kind.

/// Z = (E1 + E2)/(2θ).
double sample_Z_quadratic(const StationaryLaw& law, RngStream& rng);

/// A = max(E1,E2)/(2θβ); given A = t the three sizes are independent
/// Gamma(2), Gamma(2), Exp variates with rate 2θ + c(t).
MrcaSample sample_mrca_quadratic(const StationaryLaw& law, RngStream& rng);

/// A | Z = z, drawn as c⁻¹(E/z) = log(1 + 2θz/E)/(2βθ).
double sample_A_given_Z_quadratic(const StationaryLaw& law, double z, RngStream& rng);

/// Z_{-s} ~ Gamma(2, 2θ); M_s | Z_{-s} ~ Poisson(c(s) Z_{-s});
/// Z_0 = (immigrants since -s) + (descendants of the M_s ancestral clans),
/// Gamma(2, r) + Gamma(M_s, r) with r = 2θ + c(s).
AncestorSample sample_ancestors_quadratic(const StationaryLaw& law, double s, RngStream& rng);

/// Number of clans older than d alive now: Poisson(Λ(d)). Any mechanism.
std::uint64_t sample_window_count(const StationaryLaw& law, double d, RngStream& rng);

/// N^A for ψ(λ) = αλ + c0 λ^{1+α0}; P(N^A > n) = Γ(n+1-α0)/(Γ(1-α0) n!).
/// Saturates at 2^62 for extreme tail draws.
std::uint64_t sample_NA_stable(double alpha0, RngStream& rng);

/// P(N^A > n) for the stable mechanism.
double survival_NA_stable(double alpha0, std::uint64_t n);

/// P(N^A = n) for the stable mechanism.
double pmf_NA_stable(double alpha0, std::uint64_t n);

}  // namespace mrca

#endif  // MRCA_SAMPLER_HPP
