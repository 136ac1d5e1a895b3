#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace star {

// splitmix64 step, used for seed mixing and stream derivation.
uint64_t mix64(uint64_t x);

// Deterministic random generator. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; every draw helper below is written in
// terms of raw engine words so results are identical across platforms and
// standard libraries. Never use std::*_distribution here: their algorithms
// are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed)
      : seed_(seed), engine_(mix64(seed ^ 0x9e3779b97f4a7c15ull)) {}

  uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, n) via rejection sampling.
  uint64_t below(uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double unit_real() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Marsaglia polar rejection.
  double normal();

  // Child generator for an independent stream (per batch, per trial). Pure in
  // (seed, stream): does not advance this generator.
  Rng split(uint64_t stream) const { return Rng(mix64(seed_) ^ mix64(stream)); }

  // First k of a Fisher-Yates shuffle over [0, n).
  std::vector<size_t> sample_without_replacement(size_t n, size_t k);

  // k weighted draws without replacement (prefix-sum walk, draw-and-remove).
  // Weights must be positive; indices returned in draw order.
  std::vector<size_t> weighted_sample_without_replacement(
      std::span<const double> weights, size_t k);

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace star
