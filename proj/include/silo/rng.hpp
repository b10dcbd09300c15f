#pragma once

#include <cstdint>

namespace silo {

// Deterministic 64-bit generator: xoshiro256++ state expanded from the seed
// with splitmix64. Streams are reproducible across platforms and builds, and
// child(stream) derives an independent generator from (seed, stream), so
// parallel work can hand each worker its own generator without sharing.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01();

  // Uniform integer in [0, bound), rejection sampled (no modulo bias).
  // bound must be >= 1.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Marsaglia polar; the spare variate is cached.
  double gaussian();
  double gaussian(double sigma) { return gaussian() * sigma; }

  // Independent generator for a numbered sub-stream. Children of equal
  // (seed, stream) pairs are identical; the parent's state is untouched.
  Rng child(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace silo
