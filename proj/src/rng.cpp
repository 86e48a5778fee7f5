#include "dspn/rng.hpp"

#include <cmath>
#include <numbers>

namespace dspn {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::below(int n) {
  if (n <= 1) return 0;
  return static_cast<int>(uniform() * n);
}

}  // namespace dspn
