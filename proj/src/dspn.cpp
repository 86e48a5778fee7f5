#include "dspn/dspn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dspn/confidence.hpp"
#include "dspn/cspn.hpp"
#include "dspn/rng.hpp"

namespace dspn {

OffsetField::OffsetField(int kernel, Grid data) : kernel_(kernel), data_(std::move(data)) {
  require_kernel(kernel);
  if (data_.empty() || data_.channels() != 2 * neighbor_count(kernel)) {
    throw Error(Errc::ShapeMismatch, "offset field needs 2*(k*k-1) channels");
  }
  if (!data_.all_finite()) throw Error(Errc::InvalidPosition, "non-finite offset");
}

OffsetField OffsetField::zeros(int width, int height, int kernel) {
  require_kernel(kernel);
  return OffsetField(kernel, Grid(width, height, 2 * neighbor_count(kernel)));
}

EmbeddingParams EmbeddingParams::zeros(int embed_dim, int feature_dim) {
  EmbeddingParams p;
  p.embed_dim = embed_dim;
  p.feature_dim = feature_dim;
  p.theta.assign(static_cast<std::size_t>(embed_dim) * feature_dim, 0.0);
  p.phi = p.theta;
  p.validate();
  return p;
}

EmbeddingParams EmbeddingParams::random(int embed_dim, int feature_dim, std::uint64_t seed, double scale) {
  EmbeddingParams p = zeros(embed_dim, feature_dim);
  Rng rng(seed);
  const double sigma = scale / std::sqrt(static_cast<double>(feature_dim));
  for (double& v : p.theta) v = rng.normal(0.0, sigma);
  for (double& v : p.phi) v = rng.normal(0.0, sigma);
  return p;
}

void EmbeddingParams::validate() const {
  const std::size_t n = static_cast<std::size_t>(embed_dim) * feature_dim;
  if (embed_dim <= 0 || feature_dim <= 0 || theta.size() != n || phi.size() != n) {
    throw Error(Errc::ShapeMismatch, "embedding matrices must both be embed_dim x feature_dim");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(theta.begin(), theta.end(), finite) || !std::all_of(phi.begin(), phi.end(), finite)) {
    throw Error(Errc::InvalidFeature, "non-finite embedding entry");
  }
}

void validate_dspn_inputs(const Grid& features, const OffsetField& offsets, const EmbeddingParams& emb) {
  emb.validate();
  if (features.empty()) throw Error(Errc::InvalidGrid, "empty feature grid");
  if (features.channels() != emb.feature_dim) {
    throw Error(Errc::ShapeMismatch, "feature channels do not match embedding feature_dim");
  }
  require_same_extent(features, offsets.data(), "offset field");
  if (!features.all_finite()) throw Error(Errc::InvalidFeature, "non-finite feature value");
}

std::vector<ContinuousPos> deformed_neighborhood(int x, int y, const OffsetField& offsets) {
  if (x < 0 || y < 0 || x >= offsets.width() || y >= offsets.height()) {
    throw Error(Errc::ShapeMismatch, "pixel outside offset field");
  }
  const auto ring = ring_offsets(offsets.kernel());
  std::vector<ContinuousPos> out(ring.size());
  for (std::size_t n = 0; n < ring.size(); ++n) {
    const ContinuousPos d = offsets.delta(x, y, static_cast<int>(n));
    out[n] = {x + ring[n].dx + d.x, y + ring[n].dy + d.y};
  }
  return out;
}

namespace {

// y = M v for an embed_dim x feature_dim matrix.
void embed(std::span<const double> matrix, int rows, int cols, const double* v, double* out) {
  for (int r = 0; r < rows; ++r) {
    const double* row = matrix.data() + static_cast<std::size_t>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
}

Grid embed_grid(const Grid& features, std::span<const double> matrix, int rows) {
  Grid out(features.width(), features.height(), rows);
  const int cols = features.channels();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < features.height(); ++y) {
    for (int x = 0; x < features.width(); ++x) {
      embed(matrix, rows, cols, features.pixel(x, y).data(), out.pixel(x, y).data());
    }
  }
  return out;
}

}  // namespace

AffinityWeights compute_affinity(const Grid& features, const EmbeddingParams& emb, int x, int y,
                                 std::span<const ContinuousPos> neighbors) {
  emb.validate();
  if (features.channels() != emb.feature_dim) {
    throw Error(Errc::ShapeMismatch, "feature channels do not match embedding feature_dim");
  }
  if (x < 0 || y < 0 || x >= features.width() || y >= features.height()) {
    throw Error(Errc::ShapeMismatch, "pixel outside feature grid");
  }
  const int d_f = emb.feature_dim;
  const int d_e = emb.embed_dim;
  for (double v : features.pixel(x, y)) {
    if (!std::isfinite(v)) throw Error(Errc::InvalidFeature, "non-finite feature value");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_f));

  std::vector<double> query(d_e), key(d_e), sampled(d_f);
  embed(emb.theta, d_e, d_f, features.pixel(x, y).data(), query.data());

  auto logit_of = [&](const double* feature) {
    embed(emb.phi, d_e, d_f, feature, key.data());
    double dot = 0.0;
    for (int e = 0; e < d_e; ++e) dot += query[e] * key[e];
    return dot * scale;
  };

  std::vector<double> logits(neighbors.size() + 1);
  logits[0] = logit_of(features.pixel(x, y).data());
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    for (int c = 0; c < d_f; ++c) {
      sampled[c] = bilinear_sample(features, neighbors[j], c);
      if (!std::isfinite(sampled[c])) throw Error(Errc::InvalidFeature, "non-finite feature value");
    }
    logits[j + 1] = logit_of(sampled.data());
  }

  const double shift = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - shift);
    z += l;
  }
  AffinityWeights out;
  out.neighbor.resize(neighbors.size());
  for (std::size_t j = 0; j < neighbors.size(); ++j) out.neighbor[j] = logits[j + 1] / z;
  out.self_weight = logits[0] / z;
  return out;
}

AffinityField build_affinity_field(const Grid& features, const OffsetField& offsets,
                                   const EmbeddingParams& emb) {
  validate_dspn_inputs(features, offsets, emb);
  AffinityField f;
  f.kernel = offsets.kernel();
  f.width = features.width();
  f.height = features.height();
  f.neighbors = neighbor_count(f.kernel);
  f.logit_scale = 1.0 / std::sqrt(static_cast<double>(emb.feature_dim));
  f.queries = embed_grid(features, emb.theta, emb.embed_dim);
  f.keys = embed_grid(features, emb.phi, emb.embed_dim);
  const std::size_t slots = f.pixel_slots();
  f.positions.resize(slots);
  f.weights.resize(slots);
  f.self_weights.resize(static_cast<std::size_t>(f.width) * f.height);

  const auto ring = ring_offsets(f.kernel);
  const int d_e = emb.embed_dim;
  const int n = f.neighbors;
#pragma omp parallel
  {
    std::vector<double> logits(n);
#pragma omp for schedule(static)
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        const double* q = f.queries.pixel(x, y).data();
        const double* k_self = f.keys.pixel(x, y).data();
        double self_logit = 0.0;
        for (int e = 0; e < d_e; ++e) self_logit += q[e] * k_self[e];
        self_logit *= f.logit_scale;
        double shift = self_logit;
        for (int j = 0; j < n; ++j) {
          const ContinuousPos d = offsets.delta(x, y, j);
          const ContinuousPos p{x + ring[j].dx + d.x, y + ring[j].dy + d.y};
          f.positions[f.slot(x, y, j)] = p;
          // G_phi is linear, so sampling G_phi F equals G_phi applied to sampled F.
          const BilinearTap tap = bilinear_tap(f.width, f.height, p);
          double dot = 0.0;
          for (int e = 0; e < d_e; ++e) dot += q[e] * sample_tap(f.keys, tap, e);
          logits[j] = dot * f.logit_scale;
          shift = std::max(shift, logits[j]);
        }
        const double e_self = std::exp(self_logit - shift);
        double z = e_self;
        for (int j = 0; j < n; ++j) {
          logits[j] = std::exp(logits[j] - shift);
          z += logits[j];
        }
        for (int j = 0; j < n; ++j) f.weights[f.slot(x, y, j)] = logits[j] / z;
        f.self_weights[static_cast<std::size_t>(y) * f.width + x] = e_self / z;
      }
    }
  }
  return f;
}

Grid propagate(const Grid& hidden, const AffinityField& field) {
  require_single_channel(hidden, "dspn propagate");
  if (hidden.width() != field.width || hidden.height() != field.height) {
    throw Error(Errc::ShapeMismatch, "hidden state does not match affinity field");
  }
  Grid out(hidden.width(), hidden.height(), 1);
  const int n = field.neighbors;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      const double center = hidden.at(x, y);
      const std::size_t base = field.slot(x, y, 0);
      double acc = center;
      for (int j = 0; j < n; ++j) {
        const BilinearTap tap = bilinear_tap(field.width, field.height, field.positions[base + j]);
        acc += field.weights[base + j] * (sample_tap(hidden, tap, 0) - center);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

Grid dspn_step(const Grid& hidden, const Grid& features, const OffsetField& offsets,
               const EmbeddingParams& emb) {
  require_single_channel(hidden, "dspn_step");
  require_same_extent(hidden, features, "dspn_step features");
  return propagate(hidden, build_affinity_field(features, offsets, emb));
}

Grid dspn_refine(const Grid& coarse, const Grid& sparse, const Grid& mask, const Grid& confidence,
                 const Grid& features, const OffsetField& offsets, const EmbeddingParams& emb,
                 int iters) {
  if (iters < 0) throw Error(Errc::InvalidConfig, "iteration count must be >= 0");
  require_single_channel(coarse, "dspn_refine coarse");
  require_same_shape(coarse, sparse, "dspn_refine sparse");
  require_same_shape(coarse, mask, "dspn_refine mask");
  require_same_shape(coarse, confidence, "dspn_refine confidence");
  require_same_extent(coarse, features, "dspn_refine features");
  if (iters == 0) return coarse;
  const AffinityField field = build_affinity_field(features, offsets, emb);
  Grid h = coarse;
  for (int t = 0; t < iters; ++t) h = soft_replace(propagate(h, field), sparse, mask, confidence);
  return h;
}

}  // namespace dspn
