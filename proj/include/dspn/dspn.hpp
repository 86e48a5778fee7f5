#pragma once

// Deformable spatial propagation.
//
// Each pixel x_i reads its k*k - 1 ring neighbors at continuously displaced
// positions x_n + dp_n. Neighbor affinities come from a softmax over embedded
// feature similarities, with the pixel itself included in the normalizer:
//
//   logit(x_i, p) = (G_theta F(x_i)) . (G_phi F(p)) / sqrt(d_F)
//   w_j           = exp(logit(x_i, p_j)) / Z,   Z = sum over {p_j} and x_i
//   H'(x_i)       = (1 - sum_j w_j) H(x_i) + sum_j w_j H(p_j)
//
// Features and depth are bilinearly sampled at p_j with border clamping.

#include <cstdint>
#include <span>
#include <vector>

#include "dspn/grid.hpp"

namespace dspn {

/// Per-pixel, per-neighbor displacement. Channel 2n holds dx and channel
/// 2n + 1 holds dy for neighbor n in ring_offsets(kernel) order.
class OffsetField {
 public:
  OffsetField() = default;
  OffsetField(int kernel, Grid data);
  static OffsetField zeros(int width, int height, int kernel);

  int kernel() const noexcept { return kernel_; }
  int width() const noexcept { return data_.width(); }
  int height() const noexcept { return data_.height(); }
  const Grid& data() const noexcept { return data_; }
  Grid& data() noexcept { return data_; }

  ContinuousPos delta(int x, int y, int n) const noexcept {
    return {data_.at(x, y, 2 * n), data_.at(x, y, 2 * n + 1)};
  }

 private:
  int kernel_ = 3;
  Grid data_;
};

/// The two embedding matrices, each embed_dim x feature_dim, row-major.
struct EmbeddingParams {
  int embed_dim = 0;
  int feature_dim = 0;
  std::vector<double> theta;
  std::vector<double> phi;

  static EmbeddingParams zeros(int embed_dim, int feature_dim);
  /// Entries drawn from N(0, scale^2 / feature_dim).
  static EmbeddingParams random(int embed_dim, int feature_dim, std::uint64_t seed, double scale = 1.0);

  void validate() const;
  bool operator==(const EmbeddingParams&) const = default;
};

struct AffinityWeights {
  std::vector<double> neighbor;
  double self_weight = 1.0;
};

/// Positions x_i + ring_n + dp_n for every ring neighbor, in raster order.
std::vector<ContinuousPos> deformed_neighborhood(int x, int y, const OffsetField& offsets);

/// Softmax affinity of pixel (x, y) against the given neighbor positions.
AffinityWeights compute_affinity(const Grid& features, const EmbeddingParams& emb, int x, int y,
                                 std::span<const ContinuousPos> neighbors);

/// Precomputed propagation weights for a whole image. Features, offsets and
/// embeddings stay fixed across iterations, so one field serves every step.
struct AffinityField {
  int kernel = 3;
  int width = 0;
  int height = 0;
  int neighbors = 0;
  double logit_scale = 1.0;          // 1 / sqrt(d_F)
  std::vector<ContinuousPos> positions;  // [pixel][neighbor]
  std::vector<double> weights;           // [pixel][neighbor]
  std::vector<double> self_weights;      // [pixel]
  Grid queries;                          // G_theta F, embed_dim channels
  Grid keys;                             // G_phi F, embed_dim channels

  std::size_t slot(int x, int y, int n) const noexcept {
    return (static_cast<std::size_t>(y) * width + x) * neighbors + n;
  }
  std::size_t pixel_slots() const noexcept {
    return static_cast<std::size_t>(width) * height * neighbors;
  }
};

AffinityField build_affinity_field(const Grid& features, const OffsetField& offsets,
                                   const EmbeddingParams& emb);

/// One deformable propagation step with a prebuilt affinity field.
Grid propagate(const Grid& hidden, const AffinityField& field);

Grid dspn_step(const Grid& hidden, const Grid& features, const OffsetField& offsets,
               const EmbeddingParams& emb);

/// `iters` rounds of dspn_step followed by confidence-weighted replacement.
Grid dspn_refine(const Grid& coarse, const Grid& sparse, const Grid& mask, const Grid& confidence,
                 const Grid& features, const OffsetField& offsets, const EmbeddingParams& emb,
                 int iters);

void validate_dspn_inputs(const Grid& features, const OffsetField& offsets, const EmbeddingParams& emb);

}  // namespace dspn
