#include "mrca/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mrca/errors.hpp"
#include "mrca/numerics.hpp"

namespace mrca::stats {

double Moments::std_error() const { return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : 0.0; }

Moments moments(std::span<const double> xs) {
  Moments m;
  m.n = xs.size();
  if (m.n == 0) return m;
  m.mean = numerics::pairwise_sum(xs) / static_cast<double>(m.n);
  if (m.n < 2) return m;
  std::vector<double> sq(xs.size());
  std::transform(xs.begin(), xs.end(), sq.begin(), [&](double x) { return (x - m.mean) * (x - m.mean); });
  m.variance = numerics::pairwise_sum(sq) / static_cast<double>(m.n - 1);
  return m;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double i_d = static_cast<double>(i);
    d = std::max({d, (i_d + 1.0) / n - f, f - i_d / n});
  }
  return d;
}

double chi_square_statistic(std::span<const std::uint64_t> observed, std::span<const double> probabilities) {
  if (observed.size() != probabilities.size()) throw DomainError("chi_square_statistic: size mismatch");
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = total * probabilities[i];
    if (!(expected > 0.0)) throw DomainError("chi_square_statistic: empty expected cell");
    const double diff = static_cast<double>(observed[i]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

double chi_square_quantile_999(int df) {
  static constexpr std::array<double, 30> table = {
      10.827566, 13.815511, 16.266236, 18.466827, 20.515006, 22.457744, 24.321886, 26.124482,
      27.877165, 29.588298, 31.264134, 32.909490, 34.528179, 36.123274, 37.697298, 39.252355,
      40.790217, 42.312396, 43.820196, 45.314747, 46.797038, 48.267942, 49.728232, 51.178598,
      52.619656, 54.051962, 55.476020, 56.892285, 58.301173, 59.703064};
  if (df < 1 || df > static_cast<int>(table.size())) throw DomainError("chi_square_quantile_999: df out of table");
  return table[static_cast<std::size_t>(df - 1)];
}

}  // namespace mrca::stats
