#pragma once

#include <cstdint>
#include <random>

namespace fairgb {

// Deterministic RNG used everywhere in the library. All distributions are
// implemented on top of the raw 64-bit stream so that a (seed, draw-sequence)
// pair fully determines every number the library emits.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Uniform double in [0, 1).
  double uniform();
  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_int(uint64_t n);
  // Standard normal (Box-Muller, one value per call).
  double normal();
  // Gamma(shape alpha, scale 1), alpha > 0. Marsaglia-Tsang.
  double gamma(double alpha);
  // Beta(a, b). Beta(1,1) short-circuits to uniform().
  double beta(double a, double b);

  uint64_t raw() { return gen_(); }

  // splitmix64-style combiner for deriving independent substreams,
  // e.g. substream(run_seed, epoch, node).
  static uint64_t mix(uint64_t a, uint64_t b);
  static uint64_t mix(uint64_t a, uint64_t b, uint64_t c) { return mix(mix(a, b), c); }

 private:
  std::mt19937_64 gen_;
};

// Substream tags so unrelated consumers never share a stream.
enum RngTag : uint64_t {
  kRngInit = 0x11,
  kRngDropout = 0x22,
  kRngCnm = 0x33,
  kRngOversample = 0x44,
  kRngSplit = 0x55,
};

}  // namespace fairgb
