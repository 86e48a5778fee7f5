#pragma once

// Fixed-receptive-field spatial propagation with abs-normalized affinities
// and hard replacement of measured depth.

#include <span>
#include <vector>

#include "dspn/grid.hpp"

namespace dspn {

/// Per-pixel raw affinities for the k*k - 1 ring neighbors, stored as a grid
/// whose channels follow ring_offsets(kernel) order.
class AffinityStencilField {
 public:
  AffinityStencilField(int kernel, Grid raw);

  /// Every pixel gets the same raw stencil value.
  static AffinityStencilField uniform(int width, int height, int kernel, double value = 1.0);

  int kernel() const noexcept { return kernel_; }
  const Grid& raw() const noexcept { return raw_; }

 private:
  int kernel_;
  Grid raw_;
};

struct NormalizedStencil {
  std::vector<double> neighbor;
  double self_weight = 1.0;
};

/// kappa_j = raw_j / sum|raw|, self = 1 - sum kappa_j. An all-zero stencil
/// gives identity propagation.
NormalizedStencil normalize_stencil(std::span<const double> raw);

/// One propagation step; out-of-image neighbors are border clamped.
Grid cspn_step(const Grid& hidden, const AffinityStencilField& stencils);

/// out = (1 - m) H + m Hs with m binary. Where m == 1 the result is Hs
/// bit-exactly.
Grid hard_replace(const Grid& hidden, const Grid& sparse, const Grid& mask);

/// `iters` rounds of cspn_step followed by hard_replace.
Grid cspn_refine(const Grid& coarse, const Grid& sparse, const Grid& mask,
                 const AffinityStencilField& stencils, int iters);

/// Same loop with confidence-weighted replacement instead of hard replacement.
Grid cspn_refine_confident(const Grid& coarse, const Grid& sparse, const Grid& mask,
                           const Grid& confidence, const AffinityStencilField& stencils,
                           int iters);

void require_binary_mask(const Grid& mask);

}  // namespace dspn
