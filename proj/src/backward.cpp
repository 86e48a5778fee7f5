#include "dspn/backward.hpp"

#include <cmath>

#include "dspn/confidence.hpp"
#include "dspn/parallel.hpp"

namespace dspn {

DspnForwardState dspn_step_forward(const Grid& hidden, const Grid& features, const OffsetField& offsets,
                                   const EmbeddingParams& emb) {
  require_single_channel(hidden, "dspn_step");
  require_same_extent(hidden, features, "dspn_step features");
  DspnForwardState s;
  s.features = features;
  s.emb = emb;
  s.field = build_affinity_field(features, offsets, emb);
  s.inputs.push_back(hidden);
  s.output = propagate(hidden, s.field);
  s.valid = true;
  return s;
}

DspnForwardState dspn_refine_forward(const Grid& coarse, const Grid& sparse, const Grid& mask,
                                     const Grid& confidence, const Grid& features, const OffsetField& offsets,
                                     const EmbeddingParams& emb, int iters) {
  if (iters < 0) throw Error(Errc::InvalidConfig, "iteration count must be >= 0");
  require_single_channel(coarse, "dspn_refine coarse");
  require_same_shape(coarse, sparse, "dspn_refine sparse");
  require_same_shape(coarse, mask, "dspn_refine mask");
  require_same_shape(coarse, confidence, "dspn_refine confidence");
  require_same_extent(coarse, features, "dspn_refine features");
  DspnForwardState s;
  s.features = features;
  s.emb = emb;
  s.field = build_affinity_field(features, offsets, emb);
  s.sparse = sparse;
  s.mask = mask;
  s.confidence = confidence;
  Grid h = coarse;
  for (int t = 0; t < iters; ++t) {
    s.inputs.push_back(h);
    h = soft_replace(propagate(h, s.field), sparse, mask, confidence);
  }
  s.output = std::move(h);
  s.valid = true;
  return s;
}

namespace {

// Sums per-thread buffers in thread order.
void merge_into(Grid& target, const std::vector<Grid>& locals) {
  auto t = target.values();
  for (const Grid& l : locals) {
    auto v = l.values();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += v[i];
  }
}

void merge_into(std::vector<double>& target, const std::vector<std::vector<double>>& locals) {
  for (const auto& l : locals) {
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += l[i];
  }
}

}  // namespace

DspnGradients dspn_backward(const Grid& grad_output, const DspnForwardState& state, const BackwardOptions& options) {
  if (!state.valid) throw Error(Errc::InvalidState, "backward called without a cached forward pass");
  const AffinityField& f = state.field;
  require_single_channel(grad_output, "dspn_backward");
  if (grad_output.width() != f.width || grad_output.height() != f.height) {
    throw Error(Errc::ShapeMismatch, "upstream gradient does not match forward state");
  }
  const bool replaced = !state.mask.empty();
  const int n = f.neighbors;
  const int threads = max_threads();

  DspnGradients out;
  out.theta.assign(state.emb.theta.size(), 0.0);
  out.phi.assign(state.emb.phi.size(), 0.0);
  out.offsets = Grid(f.width, f.height, 2 * n);

  std::vector<double> d_weight(f.pixel_slots(), 0.0);
  Grid g = grad_output;

  // Value path, unrolled over the steps in reverse.
  for (std::size_t step = state.inputs.size(); step-- > 0;) {
    if (replaced) {
      auto gv = g.values();
      auto m = state.mask.values();
      auto c = state.confidence.values();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= 1.0 - m[i] * c[i];
    }
    const Grid& h = state.inputs[step];
    std::vector<Grid> locals(threads, Grid(f.width, f.height, 1));
#pragma omp parallel
    {
      Grid& local = locals[thread_index()];
#pragma omp for schedule(static)
      for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
          const double gi = g.at(x, y);
          if (gi == 0.0) continue;
          const double center = h.at(x, y);
          const std::size_t base = f.slot(x, y, 0);
          double weight_sum = 0.0;
          for (int j = 0; j < n; ++j) {
            const double w = f.weights[base + j];
            const BilinearTap tap = bilinear_tap(f.width, f.height, f.positions[base + j]);
            weight_sum += w;
            scatter_tap(local, tap, 0, gi * w);
            if (!options.detach_affinity) {
              const SampleGradient s = sample_tap_gradient(h, tap, 0);
              d_weight[base + j] += gi * (s.value - center);
              out.offsets.at(x, y, 2 * j) += gi * w * s.d_x;
              out.offsets.at(x, y, 2 * j + 1) += gi * w * s.d_y;
            }
          }
          local.at(x, y) += gi * (1.0 - weight_sum);
        }
      }
    }
    Grid next(f.width, f.height, 1);
    merge_into(next, locals);
    g = std::move(next);
  }
  out.hidden = std::move(g);
  if (options.detach_affinity || state.inputs.empty()) return out;

  // Affinity path: softmax over {self, neighbors}, then the embeddings and the
  // sampling positions of the keys.
  const int d_e = state.emb.embed_dim;
  const int d_f = state.emb.feature_dim;
  const Grid& features = state.features;
  std::vector<std::vector<double>> theta_locals(threads, std::vector<double>(out.theta.size(), 0.0));
  std::vector<std::vector<double>> phi_locals(threads, std::vector<double>(out.phi.size(), 0.0));
#pragma omp parallel
  {
    std::vector<double>& d_theta = theta_locals[thread_index()];
    std::vector<double>& d_phi = phi_locals[thread_index()];
    std::vector<double> d_query(d_e), feature_sum(d_f), d_logit(n);
#pragma omp for schedule(static)
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        const std::size_t base = f.slot(x, y, 0);
        const double self_w = f.self_weights[static_cast<std::size_t>(y) * f.width + x];
        double expected = 0.0;
        for (int j = 0; j < n; ++j) expected += f.weights[base + j] * d_weight[base + j];
        const double d_self_logit = -self_w * expected;
        bool any = d_self_logit != 0.0;
        for (int j = 0; j < n; ++j) {
          d_logit[j] = f.weights[base + j] * (d_weight[base + j] - expected);
          any = any || d_logit[j] != 0.0;
        }
        if (!any) continue;

        const double* q = f.queries.pixel(x, y).data();
        const double* k_self = f.keys.pixel(x, y).data();
        const double* f_self = features.pixel(x, y).data();
        for (int e = 0; e < d_e; ++e) d_query[e] = d_self_logit * k_self[e];
        for (int c = 0; c < d_f; ++c) feature_sum[c] = d_self_logit * f_self[c];

        for (int j = 0; j < n; ++j) {
          const double dl = d_logit[j];
          if (dl == 0.0) continue;
          const BilinearTap tap = bilinear_tap(f.width, f.height, f.positions[base + j]);
          double dpx = 0.0, dpy = 0.0;
          for (int e = 0; e < d_e; ++e) {
            const SampleGradient k = sample_tap_gradient(f.keys, tap, e);
            d_query[e] += dl * k.value;
            dpx += q[e] * k.d_x;
            dpy += q[e] * k.d_y;
          }
          out.offsets.at(x, y, 2 * j) += f.logit_scale * dl * dpx;
          out.offsets.at(x, y, 2 * j + 1) += f.logit_scale * dl * dpy;
          for (int c = 0; c < d_f; ++c) feature_sum[c] += dl * sample_tap(features, tap, c);
        }
        // logit = scale * (theta f_i) . (phi f_p)
        for (int e = 0; e < d_e; ++e) {
          const double gq = f.logit_scale * d_query[e];
          const double gk = f.logit_scale * q[e];
          double* row_t = d_theta.data() + static_cast<std::size_t>(e) * d_f;
          double* row_p = d_phi.data() + static_cast<std::size_t>(e) * d_f;
          for (int c = 0; c < d_f; ++c) {
            row_t[c] += gq * f_self[c];
            row_p[c] += gk * feature_sum[c];
          }
        }
      }
    }
  }
  merge_into(out.theta, theta_locals);
  merge_into(out.phi, phi_locals);
  return out;
}

}  // namespace dspn
