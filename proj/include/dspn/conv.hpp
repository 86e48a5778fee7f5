#pragma once

#include <vector>

#include "dspn/grid.hpp"

namespace dspn {

/// 3x3 convolution, stride 1, one pixel of border-replicated padding.
/// Weights are laid out [out][in][ky][kx].
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  ConvLayer() = default;
  ConvLayer(int in, int out);

  std::size_t weight_index(int o, int i, int ky, int kx) const noexcept {
    return ((static_cast<std::size_t>(o) * in_channels + i) * 3 + ky) * 3 + kx;
  }
  std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }
  bool operator==(const ConvLayer&) const = default;
};

Grid conv3x3(const Grid& input, const ConvLayer& layer);

/// Accumulates parameter gradients into `grad_layer` (same shape as `layer`).
/// When `grad_input` is non-null it receives dL/dinput (overwritten).
void conv3x3_backward(const Grid& input, const ConvLayer& layer, const Grid& grad_output,
                      ConvLayer& grad_layer, Grid* grad_input);

Grid relu(const Grid& g);

}  // namespace dspn
