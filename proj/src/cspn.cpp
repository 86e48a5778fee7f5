#include "dspn/cspn.hpp"

#include <cmath>

#include "dspn/confidence.hpp"

namespace dspn {

AffinityStencilField::AffinityStencilField(int kernel, Grid raw) : kernel_(kernel), raw_(std::move(raw)) {
  require_kernel(kernel);
  if (raw_.empty() || raw_.channels() != neighbor_count(kernel)) {
    throw Error(Errc::ShapeMismatch, "stencil field needs k*k-1 channels");
  }
  if (!raw_.all_finite()) throw Error(Errc::InvalidAffinity, "non-finite raw affinity");
}

AffinityStencilField AffinityStencilField::uniform(int width, int height, int kernel, double value) {
  require_kernel(kernel);
  return AffinityStencilField(kernel, Grid(width, height, neighbor_count(kernel), value));
}

NormalizedStencil normalize_stencil(std::span<const double> raw) {
  NormalizedStencil out;
  out.neighbor.assign(raw.size(), 0.0);
  double denom = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) throw Error(Errc::InvalidAffinity, "non-finite raw affinity");
    denom += std::abs(v);
  }
  if (denom == 0.0) {
    out.self_weight = 1.0;
    return out;
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    out.neighbor[j] = raw[j] / denom;
    sum += out.neighbor[j];
  }
  out.self_weight = 1.0 - sum;
  return out;
}

namespace {

// Neighbor weights normalized once; they do not change between iterations.
Grid normalized_weights(const AffinityStencilField& stencils) {
  const Grid& raw = stencils.raw();
  Grid out(raw.width(), raw.height(), raw.channels());
  const int n = raw.channels();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < raw.height(); ++y) {
    for (int x = 0; x < raw.width(); ++x) {
      double denom = 0.0;
      for (int j = 0; j < n; ++j) denom += std::abs(raw.at(x, y, j));
      if (denom == 0.0) continue;
      for (int j = 0; j < n; ++j) out.at(x, y, j) = raw.at(x, y, j) / denom;
    }
  }
  return out;
}

// H_i + sum_j kappa_j (H_j - H_i), which equals self*H_i + sum_j kappa_j H_j.
Grid propagate_fixed(const Grid& hidden, const Grid& weights, const std::vector<RingOffset>& ring) {
  Grid out(hidden.width(), hidden.height(), 1);
  const int n = static_cast<int>(ring.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < hidden.height(); ++y) {
    for (int x = 0; x < hidden.width(); ++x) {
      const double center = hidden.at(x, y);
      double acc = center;
      for (int j = 0; j < n; ++j) {
        acc += weights.at(x, y, j) * (hidden.clamped(x + ring[j].dx, y + ring[j].dy) - center);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

void check_refine_inputs(const Grid& coarse, const Grid& sparse, const Grid& mask,
                         const AffinityStencilField& stencils, int iters) {
  if (iters < 0) throw Error(Errc::InvalidConfig, "iteration count must be >= 0");
  require_single_channel(coarse, "cspn_refine coarse");
  require_same_shape(coarse, sparse, "cspn_refine sparse");
  require_same_shape(coarse, mask, "cspn_refine mask");
  require_same_extent(coarse, stencils.raw(), "cspn_refine stencils");
  require_binary_mask(mask);
}

}  // namespace

void require_binary_mask(const Grid& mask) {
  for (double v : mask.values()) {
    if (v != 0.0 && v != 1.0) throw Error(Errc::InvalidMask, "mask must be binary (0/1)");
  }
}

Grid cspn_step(const Grid& hidden, const AffinityStencilField& stencils) {
  require_single_channel(hidden, "cspn_step");
  require_same_extent(hidden, stencils.raw(), "cspn_step stencils");
  return propagate_fixed(hidden, normalized_weights(stencils), ring_offsets(stencils.kernel()));
}

Grid hard_replace(const Grid& hidden, const Grid& sparse, const Grid& mask) {
  require_same_shape(hidden, sparse, "hard_replace sparse");
  require_same_shape(hidden, mask, "hard_replace mask");
  require_binary_mask(mask);
  Grid out = hidden;
  auto o = out.values();
  auto s = sparse.values();
  auto m = mask.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (m[i] == 1.0) o[i] = s[i];
  }
  return out;
}

Grid cspn_refine(const Grid& coarse, const Grid& sparse, const Grid& mask,
                 const AffinityStencilField& stencils, int iters) {
  check_refine_inputs(coarse, sparse, mask, stencils, iters);
  if (iters == 0) return coarse;
  const Grid weights = normalized_weights(stencils);
  const auto ring = ring_offsets(stencils.kernel());
  Grid h = coarse;
  for (int t = 0; t < iters; ++t) {
    h = hard_replace(propagate_fixed(h, weights, ring), sparse, mask);
  }
  return h;
}

Grid cspn_refine_confident(const Grid& coarse, const Grid& sparse, const Grid& mask,
                           const Grid& confidence, const AffinityStencilField& stencils,
                           int iters) {
  check_refine_inputs(coarse, sparse, mask, stencils, iters);
  require_same_shape(coarse, confidence, "cspn_refine confidence");
  if (iters == 0) return coarse;
  const Grid weights = normalized_weights(stencils);
  const auto ring = ring_offsets(stencils.kernel());
  Grid h = coarse;
  for (int t = 0; t < iters; ++t) {
    h = soft_replace(propagate_fixed(h, weights, ring), sparse, mask, confidence);
  }
  return h;
}

}  // namespace dspn
