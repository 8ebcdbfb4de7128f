#include "mrca/sampler.hpp"

#include <cmath>

#include "mrca/errors.hpp"

namespace mrca {

namespace {

const Quadratic& quadratic_or_throw(const StationaryLaw& law, const char* who) {
  const auto* q = std::get_if<Quadratic>(&law.mechanism().spec());
  if (q == nullptr) {
    throw CapabilityError(std::string(who) + ": exact sampling requires the quadratic mechanism");
  }
  return *q;
}

void check_alpha0(double alpha0) {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw DomainError("stable N^A: alpha0 must lie in (0, 1]");
}

constexpr std::uint64_t kNaCap = std::uint64_t{1} << 62;

double log_survival(double alpha0, double n) {
  return std::lgamma(n + 1.0 - alpha0) - std::lgamma(1.0 - alpha0) - std::lgamma(n + 1.0);
}

}  // namespace

double sample_Z_quadratic(const StationaryLaw& law, RngStream& rng) {
  const auto& q = quadratic_or_throw(law, "sample_Z_quadratic");
  const double e1 = rng.exponential();
  const double e2 = rng.exponential();
  return (e1 + e2) / (2.0 * q.theta);
}

MrcaSample sample_mrca_quadratic(const StationaryLaw& law, RngStream& rng) {
  const auto& q = quadratic_or_throw(law, "sample_mrca_quadratic");
  MrcaSample out{};
  const double e1 = rng.exponential();
  const double e2 = rng.exponential();
  out.A = std::max(e1, e2) / (2.0 * q.theta * q.beta);
  const double rate = 2.0 * q.theta + law.cumulant().c_of(out.A);
  out.Z_A = (rng.exponential() + rng.exponential()) / rate;
  out.Z_I = (rng.exponential() + rng.exponential()) / rate;
  out.Z_O = rng.exponential() / rate;
  out.Z = out.Z_I + out.Z_O;
  return out;
}

double sample_A_given_Z_quadratic(const StationaryLaw& law, double z, RngStream& rng) {
  const auto& q = quadratic_or_throw(law, "sample_A_given_Z_quadratic");
  if (!(z > 0.0)) throw DomainError("sample_A_given_Z_quadratic: z must be > 0");
  const double e = rng.exponential();
  return std::log1p(2.0 * q.theta * z / e) / (2.0 * q.beta * q.theta);
}

AncestorSample sample_ancestors_quadratic(const StationaryLaw& law, double s, RngStream& rng) {
  const auto& q = quadratic_or_throw(law, "sample_ancestors_quadratic");
  if (!(s > 0.0)) throw DomainError("sample_ancestors_quadratic: s must be > 0");
  const double c = law.cumulant().c_of(s);
  const double rate = 2.0 * q.theta + c;
  AncestorSample out{};
  out.s = s;
  out.Z_past = rng.gamma(2.0) / (2.0 * q.theta);
  out.M = rng.poisson(c * out.Z_past);
  const double immigrants = rng.gamma(2.0) / rate;
  const double survivors = out.M == 0 ? 0.0 : rng.gamma(static_cast<double>(out.M)) / rate;
  out.Z_now = immigrants + survivors;
  return out;
}

std::uint64_t sample_window_count(const StationaryLaw& law, double d, RngStream& rng) {
  if (!(d > 0.0)) throw DomainError("sample_window_count: d must be > 0");
  return rng.poisson(law.cumulant().lambda_window(d));
}

double survival_NA_stable(double alpha0, std::uint64_t n) {
  check_alpha0(alpha0);
  if (n == 0) return 1.0;
  if (alpha0 == 1.0) return 0.0;
  return std::exp(log_survival(alpha0, static_cast<double>(n)));
}

double pmf_NA_stable(double alpha0, std::uint64_t n) {
  check_alpha0(alpha0);
  if (n == 0) return 0.0;
  if (alpha0 == 1.0) return n == 1 ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  return std::exp(std::log(alpha0) + std::lgamma(nn - alpha0) - std::lgamma(1.0 - alpha0) - std::lgamma(nn + 1.0));
}

std::uint64_t sample_NA_stable(double alpha0, RngStream& rng) {
  check_alpha0(alpha0);
  if (alpha0 == 1.0) return 1;
  // N = min{n >= 1 : P(N > n) <= V}
  const double v = rng.uniform();
  double survival = 1.0;
  for (std::uint64_t n = 1; n <= 1024; ++n) {
    survival *= (static_cast<double>(n) - alpha0) / static_cast<double>(n);
    if (survival <= v) return n;
  }
  // Heavy tail: search on log P(N > n), which is decreasing in n.
  const double log_v = std::log(v);
  std::uint64_t lo = 1024;  // survival(lo) > v
  std::uint64_t hi = 2048;
  while (log_survival(alpha0, static_cast<double>(hi)) > log_v) {
    lo = hi;
    if (hi >= kNaCap / 2) return kNaCap;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (log_survival(alpha0, static_cast<double>(mid)) > log_v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace mrca
