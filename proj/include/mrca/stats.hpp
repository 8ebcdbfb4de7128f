#ifndef MRCA_STATS_HPP
#define MRCA_STATS_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mrca::stats {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::size_t n = 0;

  [[nodiscard]] double std_error() const;
};

/// Mean and variance with pairwise summation; deterministic in the input order.
Moments moments(std::span<const double> xs);

/// Two-sided Kolmogorov–Smirnov distance between the empirical law of
/// `samples` and `cdf`. Sorts its copy of the samples.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Pearson statistic Σ (O - nP)²/(nP).
double chi_square_statistic(std::span<const std::uint64_t> observed, std::span<const double> probabilities);

/// 99.9% quantile of the chi-squared law with `df` degrees of freedom, df in [1, 30].
double chi_square_quantile_999(int df);

}  // namespace mrca::stats

#endif  // MRCA_STATS_HPP
