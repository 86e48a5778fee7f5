#pragma once

#include <cstdint>
#include <random>

namespace dspn {

/// Seeded generator used by every stochastic routine.
///
/// Engine: 64-bit Mersenne Twister (std::mt19937_64) seeded directly with the
/// caller's seed. Uniform doubles take the top 53 bits of one draw, scaled by
/// 2^-53, giving [0, 1). Normals use the Box-Muller cosine branch on two
/// uniforms (the first shifted to (0, 1]) and discard the sine branch, so every
/// normal consumes exactly two engine draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n).
  int below(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dspn
