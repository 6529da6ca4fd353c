#pragma once

#include <cstdint>
#include <random>

namespace edgerl {

// Deterministic random source. Every stochastic decision in a run draws from
// an Rng derived from the run seed, so identical (config, seed) pairs replay
// bit-identically. Distribution sampling is implemented here instead of via
// std:: distributions, whose algorithms are not pinned by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Poisson-distributed count with the given mean (Knuth's method, chunked
  // so large means do not underflow exp(-mean)).
  int poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from a master seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace edgerl
