#pragma once

// Desk-scale training of the deformable refiner: plain gradient descent on
// the refined-depth L2 loss over a set of prepared scenes.

#include <cstdint>
#include <span>
#include <vector>

#include "dspn/gradcheck.hpp"
#include "dspn/metrics.hpp"
#include "dspn/offset_estimator.hpp"

namespace dspn {

struct TrainableDspn {
  EmbeddingParams emb;
  OffsetEstimatorParams estimator;

  static TrainableDspn make(int feature_dim, int embed_dim, int hidden, int kernel, std::uint64_t seed);
  ParamVector flatten() const;
  void unflatten(const ParamVector& p);
  OffsetField offsets_for(const Grid& features) const { return offset_estimator(features, estimator); }
};

/// Inputs of one refinement problem plus its ground truth.
struct FitScene {
  Grid coarse, sparse, mask, confidence, features, truth;
};

struct FitOptions {
  double lr = 1.0;
  int steps = 200;
  int iters = 3;
  int batch_size = 0;  // 0: full batch
  std::uint64_t seed = 0;
  bool train_offsets = true;
  bool train_embedding = true;
  LossWeights weights;
};

struct FitResult {
  TrainableDspn params;
  std::vector<double> loss_trace;  // loss before each update
};

/// Mean refined-depth L2 loss (weighted by alpha) over `scenes` and its
/// gradient with respect to TrainableDspn::flatten().
double fit_loss_and_gradient(std::span<const FitScene> scenes, const TrainableDspn& params, int iters,
                             const LossWeights& weights, ParamVector* gradient);

FitResult toy_fit(std::span<const FitScene> scenes, TrainableDspn init, const FitOptions& options);

}  // namespace dspn
