#ifndef MRCA_VERIFY_HPP
#define MRCA_VERIFY_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mrca/laws.hpp"

namespace mrca {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

/// Outcome of one study. verdict == pass iff |estimate - target| <= tolerance.
struct McReport {
  std::string study_name;
  double estimate = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  bool pass = false;
  std::uint64_t runtime_ms = 0;
  std::string note;  // free-form flag, e.g. low power; not part of the JSON record
};

/// JSON object with exactly the McReport record fields (verdict as "pass"/"fail").
nlohmann::ordered_json to_json(const McReport& r);

struct McOptions {
  std::size_t n = 0;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  bool record_timing = false;  // otherwise runtime_ms is 0 so that reports are byte-stable
};

/// Grids for the deterministic identity checks.
struct TransformGrids {
  std::vector<double> lambdas{0.1, 1.0, 10.0};
  std::vector<double> ts{0.1, 1.0, 5.0};
  std::vector<double> ss{0.1, 1.0, 5.0};
  std::vector<double> laplace_lambdas{0.5, 1.0, 5.0};
};

// Monte Carlo studies. Unless noted they need the quadratic mechanism and
// throw CapabilityError otherwise; n == 0 is a DomainError.

/// {Z^A < Z} frequency vs 11/16, and E[Z^A]/E[Z] vs 2/3.
std::pair<McReport, McReport> study_bottleneck(const StationaryLaw& law, const McOptions& opt);

/// The frequency of {Z^A < Z} restricted to bins of A.
std::vector<McReport> study_bottleneck_conditional(const StationaryLaw& law, const McOptions& opt,
                                                   double t_lo = 0.25, double t_hi = 2.0, double width = 0.25);

/// KS of sampled A against `target_cdf` (default: the exact law of A).
McReport study_tmrca_law(const StationaryLaw& law, const McOptions& opt,
                         std::function<double(double)> target_cdf = {}, std::string name = "tmrca_law");

/// KS of sampled Z against the Gamma(2, 2θ) CDF.
McReport study_stationary_size(const StationaryLaw& law, const McOptions& opt);

/// Empirical E[e^{-ηM_s - λZ_0}] against its closed form, one report per (η, λ).
std::vector<McReport> study_ancestor_transform(const StationaryLaw& law, double s, const std::vector<double>& etas,
                                               const std::vector<double>& lambdas, const McOptions& opt);

/// Per s: E[M_s]/c(s) vs E[Z] and E|M_s/c(s) - Z_0| against its L² bound;
/// then a monotonicity report (strict decrease, last value below `cap`)
/// when the grid has at least two points. `s_grid` must be strictly decreasing.
std::vector<McReport> study_ancestor_convergence(const StationaryLaw& law, const std::vector<double>& s_grid,
                                                 const McOptions& opt, double cap = 0.25);

/// Variance of √(c(s)E[Z])(M_s/c(s) - Z_0) vs 1/θ² (5% band), and its mean vs 0.
std::pair<McReport, McReport> study_fluctuations(const StationaryLaw& law, double s, const McOptions& opt);

/// Chi-squared of stable N^A draws with parameter `alpha0` over cells
/// {1..10, >10} against the pmf with parameter `pmf_alpha0` (default: same).
/// α0 = 1 switches to the exact check P(N^A = 1) = 1. Any mechanism.
McReport study_na_stable(double alpha0, const McOptions& opt, std::optional<double> pmf_alpha0 = std::nullopt);

/// Mean of the windowed clan count vs Λ(d). Any mechanism.
McReport study_window_count(const StationaryLaw& law, double d, const McOptions& opt);

/// Deterministic identity checks; any mechanism.
std::vector<McReport> study_transform_identities(const StationaryLaw& law, const TransformGrids& grids = {},
                                                 double quad_tol = 1e-10);

// Independent numerical oracles, shared with the tests.

/// u(λ,t) by adaptive Dormand–Prince integration of ∂_t u = -ψ(u).
double u_by_ode(const Mechanism& mech, double lambda, double t, double rel_tol = 1e-12);

/// κ* = exp(α[∫_1^∞ dv/ψ - ∫_0^1 (1/(αv) - 1/ψ) dv]) by double-exponential quadrature.
double kappa_by_quadrature(const Mechanism& mech, double tol = 1e-12);

/// Named studies for the CLI and the acceptance suite.
struct StudyPlan {
  std::optional<std::size_t> n;  // overrides every per-study default
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  bool record_timing = false;
  double transform_s = 0.5;
  std::vector<double> s_grid{1.0, 0.5, 0.1, 0.01};
  double convergence_cap = 0.25;
  double fluctuation_s = 1e-3;
  double window_d = 1.0;
  double alpha0 = 0.5;  // stable N^A study when the mechanism itself is not stable
  double quad_tol = 1e-10;
  TransformGrids grids;
};

std::vector<std::string> known_studies();
std::vector<std::string> default_study_list(const StationaryLaw& law);
/// Throws ConfigError for an unknown name.
std::vector<McReport> run_study(const std::string& name, const StationaryLaw& law, const StudyPlan& plan);

}  // namespace mrca

#endif  // MRCA_VERIFY_HPP
