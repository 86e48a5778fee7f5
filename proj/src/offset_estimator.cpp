#include "dspn/offset_estimator.hpp"

#include <cmath>

#include "dspn/rng.hpp"

namespace dspn {

OffsetEstimatorParams OffsetEstimatorParams::make(int feature_dim, int hidden, int kernel, std::uint64_t seed) {
  require_kernel(kernel);
  if (feature_dim <= 0 || hidden <= 0) {
    throw Error(Errc::InvalidConfig, "offset estimator channel counts must be positive");
  }
  OffsetEstimatorParams p;
  p.kernel = kernel;
  p.layers[0] = ConvLayer(feature_dim, hidden);
  p.layers[1] = ConvLayer(hidden, hidden);
  p.layers[2] = ConvLayer(hidden, 2 * neighbor_count(kernel));
  Rng rng(seed);
  for (int l = 0; l < 2; ++l) {
    const double sigma = std::sqrt(2.0 / (9.0 * p.layers[l].in_channels));
    for (double& w : p.layers[l].weight) w = rng.normal(0.0, sigma);
  }
  return p;
}

void OffsetEstimatorParams::validate() const {
  require_kernel(kernel);
  for (const auto& l : layers) {
    if (l.in_channels <= 0 || l.out_channels <= 0 ||
        l.weight.size() != static_cast<std::size_t>(l.in_channels) * l.out_channels * 9 ||
        l.bias.size() != static_cast<std::size_t>(l.out_channels)) {
      throw Error(Errc::ShapeMismatch, "malformed convolution layer");
    }
  }
  if (layers[1].in_channels != layers[0].out_channels || layers[2].in_channels != layers[1].out_channels ||
      layers[2].out_channels != 2 * neighbor_count(kernel)) {
    throw Error(Errc::ShapeMismatch, "offset estimator layers do not chain");
  }
}

OffsetField offset_estimator(const Grid& features, const OffsetEstimatorParams& params) {
  OffsetEstimatorTrace trace;
  return offset_estimator(features, params, trace);
}

OffsetField offset_estimator(const Grid& features, const OffsetEstimatorParams& params,
                             OffsetEstimatorTrace& trace) {
  params.validate();
  if (features.channels() != params.feature_dim()) {
    throw Error(Errc::ShapeMismatch, "feature channels do not match offset estimator input");
  }
  trace.input = features;
  trace.pre1 = conv3x3(features, params.layers[0]);
  trace.act1 = relu(trace.pre1);
  trace.pre2 = conv3x3(trace.act1, params.layers[1]);
  trace.act2 = relu(trace.pre2);
  return OffsetField(params.kernel, conv3x3(trace.act2, params.layers[2]));
}

namespace {

void relu_backward(const Grid& pre, Grid& grad) {
  auto g = grad.values();
  auto p = pre.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(p[i] > 0.0)) g[i] = 0.0;
  }
}

}  // namespace

OffsetEstimatorParams offset_estimator_backward(const Grid& grad_offsets, const OffsetEstimatorParams& params,
                                                const OffsetEstimatorTrace& trace) {
  if (trace.input.empty()) throw Error(Errc::InvalidState, "offset estimator trace is empty");
  OffsetEstimatorParams grads = params;
  for (auto& l : grads.layers) {
    std::fill(l.weight.begin(), l.weight.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  Grid g2, g1;
  conv3x3_backward(trace.act2, params.layers[2], grad_offsets, grads.layers[2], &g2);
  relu_backward(trace.pre2, g2);
  conv3x3_backward(trace.act1, params.layers[1], g2, grads.layers[1], &g1);
  relu_backward(trace.pre1, g1);
  conv3x3_backward(trace.input, params.layers[0], g1, grads.layers[0], nullptr);
  return grads;
}

}  // namespace dspn
