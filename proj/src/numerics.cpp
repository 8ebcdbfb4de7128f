#include "mrca/numerics.hpp"

namespace mrca::numerics {

double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t block = 64;
  if (xs.size() <= block) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace mrca::numerics
