#pragma once

// Three 3x3 convolutions mapping features to per-neighbor offsets:
// d_F -> hidden -> hidden -> 2(k*k - 1), with max(0, .) between layers.

#include <array>
#include <cstdint>

#include "dspn/conv.hpp"
#include "dspn/dspn.hpp"

namespace dspn {

struct OffsetEstimatorParams {
  int kernel = 3;
  std::array<ConvLayer, 3> layers;

  /// He-initialized hidden layers, zero-initialized output layer, so a fresh
  /// estimator produces the regular k x k neighborhood.
  static OffsetEstimatorParams make(int feature_dim, int hidden, int kernel, std::uint64_t seed);

  int feature_dim() const noexcept { return layers[0].in_channels; }
  int hidden() const noexcept { return layers[0].out_channels; }
  void validate() const;
  bool operator==(const OffsetEstimatorParams&) const = default;
};

/// Intermediate activations kept for the backward pass.
struct OffsetEstimatorTrace {
  Grid input;
  Grid pre1, act1;
  Grid pre2, act2;
};

OffsetField offset_estimator(const Grid& features, const OffsetEstimatorParams& params);
OffsetField offset_estimator(const Grid& features, const OffsetEstimatorParams& params,
                             OffsetEstimatorTrace& trace);

/// Parameter gradients given dL/d(offsets). The result has the shape of `params`.
OffsetEstimatorParams offset_estimator_backward(const Grid& grad_offsets, const OffsetEstimatorParams& params,
                                                const OffsetEstimatorTrace& trace);

}  // namespace dspn
