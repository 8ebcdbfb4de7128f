#ifndef MRCA_RNG_HPP
#define MRCA_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace mrca {

/// Seeded random stream; identical (seed, stream_id) pairs give identical
/// variate sequences on every platform. Distinct stream ids are treated
/// as independent substreams.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard exponential (mean 1).
  double exponential();
  /// Gamma(shape, rate 1).
  double gamma(double shape);
  /// Poisson(mean); mean 0 yields 0.
  std::uint64_t poisson(double mean);

  std::mt19937_64& engine() { return engine_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// Replicates are processed in fixed blocks; block b draws from
/// RngStream(seed, b). Output therefore depends on (n, seed) only, never on
/// the number of worker threads.
inline constexpr std::size_t kReplicateBlock = 4096;

using BlockFn = std::function<void(std::size_t begin, std::size_t end, RngStream& rng)>;

/// Runs `fn` over [0, n) in blocks, using up to `threads` workers
/// (0 = hardware concurrency). `fn` must only write to slots in [begin, end).
void for_each_block(std::size_t n, std::uint64_t seed, unsigned threads, const BlockFn& fn);

}  // namespace mrca

#endif  // MRCA_RNG_HPP
