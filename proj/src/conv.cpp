#include "dspn/conv.hpp"

#include <algorithm>

namespace dspn {

ConvLayer::ConvLayer(int in, int out)
    : in_channels(in), out_channels(out),
      weight(static_cast<std::size_t>(in) * out * 9, 0.0), bias(static_cast<std::size_t>(out), 0.0) {}

namespace {

inline int clamp_index(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

// Weights regrouped as [ky][kx][out][in] so the inner loop is contiguous.
std::vector<double> tap_major(const ConvLayer& layer) {
  std::vector<double> out(layer.weight.size());
  std::size_t k = 0;
  for (int ky = 0; ky < 3; ++ky)
    for (int kx = 0; kx < 3; ++kx)
      for (int o = 0; o < layer.out_channels; ++o)
        for (int i = 0; i < layer.in_channels; ++i) out[k++] = layer.weight[layer.weight_index(o, i, ky, kx)];
  return out;
}

}  // namespace

Grid conv3x3(const Grid& input, const ConvLayer& layer) {
  if (input.channels() != layer.in_channels) {
    throw Error(Errc::ShapeMismatch, "convolution input channels do not match layer");
  }
  const int w = input.width();
  const int h = input.height();
  const int cin = layer.in_channels;
  const int cout = layer.out_channels;
  const std::vector<double> wt = tap_major(layer);
  Grid out(w, h, cout);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double* dst = out.pixel(x, y).data();
      for (int o = 0; o < cout; ++o) dst[o] = layer.bias[o];
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = clamp_index(y + ky - 1, h);
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = clamp_index(x + kx - 1, w);
          const double* src = input.pixel(sx, sy).data();
          const double* wk = wt.data() + static_cast<std::size_t>(ky * 3 + kx) * cout * cin;
          for (int o = 0; o < cout; ++o) {
            const double* wo = wk + static_cast<std::size_t>(o) * cin;
            double acc = 0.0;
            for (int i = 0; i < cin; ++i) acc += wo[i] * src[i];
            dst[o] += acc;
          }
        }
      }
    }
  }
  return out;
}

void conv3x3_backward(const Grid& input, const ConvLayer& layer, const Grid& grad_output,
                      ConvLayer& grad_layer, Grid* grad_input) {
  const int w = input.width();
  const int h = input.height();
  const int cin = layer.in_channels;
  const int cout = layer.out_channels;
  if (grad_output.channels() != cout || !grad_output.same_extent(input)) {
    throw Error(Errc::ShapeMismatch, "convolution gradient shape mismatch");
  }
  if (grad_layer.weight.size() != layer.weight.size() || grad_layer.bias.size() != layer.bias.size()) {
    throw Error(Errc::ShapeMismatch, "gradient layer shape mismatch");
  }
  // Parameter gradients in tap-major layout, reduced over rows.
  std::vector<double> gw(layer.weight.size(), 0.0);
  std::vector<double> gb(layer.bias.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* go = grad_output.pixel(x, y).data();
      for (int o = 0; o < cout; ++o) gb[o] += go[o];
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = clamp_index(y + ky - 1, h);
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = clamp_index(x + kx - 1, w);
          const double* src = input.pixel(sx, sy).data();
          double* gk = gw.data() + static_cast<std::size_t>(ky * 3 + kx) * cout * cin;
          for (int o = 0; o < cout; ++o) {
            const double g = go[o];
            if (g == 0.0) continue;
            double* go_row = gk + static_cast<std::size_t>(o) * cin;
            for (int i = 0; i < cin; ++i) go_row[i] += g * src[i];
          }
        }
      }
    }
  }
  std::size_t k = 0;
  for (int ky = 0; ky < 3; ++ky)
    for (int kx = 0; kx < 3; ++kx)
      for (int o = 0; o < cout; ++o)
        for (int i = 0; i < cin; ++i) grad_layer.weight[layer.weight_index(o, i, ky, kx)] += gw[k++];
  for (int o = 0; o < cout; ++o) grad_layer.bias[o] += gb[o];

  if (grad_input == nullptr) return;
  *grad_input = Grid(w, h, cin);
  const std::vector<double> wt = tap_major(layer);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* go = grad_output.pixel(x, y).data();
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = clamp_index(y + ky - 1, h);
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = clamp_index(x + kx - 1, w);
          double* gi = grad_input->pixel(sx, sy).data();
          const double* wk = wt.data() + static_cast<std::size_t>(ky * 3 + kx) * cout * cin;
          for (int o = 0; o < cout; ++o) {
            const double g = go[o];
            if (g == 0.0) continue;
            const double* wo = wk + static_cast<std::size_t>(o) * cin;
            for (int i = 0; i < cin; ++i) gi[i] += g * wo[i];
          }
        }
      }
    }
  }
}

Grid relu(const Grid& g) {
  Grid out = g;
  for (double& v : out.values()) v = std::max(v, 0.0);
  return out;
}

}  // namespace dspn
