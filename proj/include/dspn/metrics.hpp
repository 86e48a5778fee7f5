#pragma once

// KITTI depth-completion metrics and the training losses.
//
// Depth metrics are reported in millimeters, inverse-depth metrics in 1/km.
// Only pixels with gt > 0 are evaluated. Sums run left to right in row-major
// order, so results are bit-reproducible.

#include "dspn/grid.hpp"

namespace dspn {

struct MetricReport {
  double rmse = 0.0;   // mm
  double mae = 0.0;    // mm
  double irmse = 0.0;  // 1/km
  double imae = 0.0;   // 1/km
  long valid_count = 0;
};

inline constexpr double kInverseDepthFloor = 1e-3;  // meters

MetricReport eval_metrics(const Grid& pred, const Grid& gt);

/// Mean squared difference over pixels where mask > 0 (all pixels when null).
double l2_loss(const Grid& pred, const Grid& target, const Grid* mask = nullptr);

struct LossWeights {
  double lambda = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
};

double total_loss(double coarse_loss, double refined_loss, double confidence_loss, const LossWeights& w);

}  // namespace dspn
