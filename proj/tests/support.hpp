#pragma once

#include <algorithm>
#include <cmath>

#include "dspn/grid.hpp"
#include "dspn/rng.hpp"

namespace testing {

inline dspn::Grid random_grid(int w, int h, int c, dspn::Rng& rng, double lo = 0.0, double hi = 1.0) {
  dspn::Grid g(w, h, c);
  for (double& v : g.values()) v = rng.uniform(lo, hi);
  return g;
}

inline dspn::Grid random_mask(int w, int h, dspn::Rng& rng, double p) {
  dspn::Grid g(w, h, 1);
  for (double& v : g.values()) v = rng.bernoulli(p) ? 1.0 : 0.0;
  return g;
}

inline double max_abs_diff(const dspn::Grid& a, const dspn::Grid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace testing
