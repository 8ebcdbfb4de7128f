#include "mrca/rng.hpp"

#include <algorithm>
#include <atomic>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mrca {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
  // 53 random bits, shifted by half an ulp so neither 0 nor 1 occurs
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() { return boost::random::exponential_distribution<double>(1.0)(engine_); }

double RngStream::gamma(double shape) { return boost::random::gamma_distribution<double>(shape, 1.0)(engine_); }

std::uint64_t RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  return static_cast<std::uint64_t>(boost::random::poisson_distribution<long long, double>(mean)(engine_));
}

void for_each_block(std::size_t n, std::uint64_t seed, unsigned threads, const BlockFn& fn) {
  const std::size_t blocks = (n + kReplicateBlock - 1) / kReplicateBlock;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(blocks, 1)));

  auto run_block = [&](std::size_t b) {
    RngStream rng(seed, b);
    const std::size_t begin = b * kReplicateBlock;
    fn(begin, std::min(n, begin + kReplicateBlock), rng);
  };

  if (threads <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < blocks; b = next++) {
        try {
          run_block(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = blocks;
        }
      }
    });
  }
  pool.clear();  // joins
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mrca
