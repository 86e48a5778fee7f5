#include "dspn/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace dspn {

MetricReport eval_metrics(const Grid& pred, const Grid& gt) {
  require_same_shape(pred, gt, "eval_metrics");
  double sq = 0.0, ab = 0.0, isq = 0.0, iab = 0.0;
  long n = 0;
  auto p = pred.values();
  auto g = gt.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0)) continue;
    const double err = p[i] - g[i];
    const double ierr = 1.0 / std::max(p[i], kInverseDepthFloor) - 1.0 / g[i];
    sq += err * err;
    ab += std::abs(err);
    isq += ierr * ierr;
    iab += std::abs(ierr);
    ++n;
  }
  if (n == 0) throw Error(Errc::EmptyGroundTruth, "no pixels with gt > 0");
  const double inv_n = 1.0 / static_cast<double>(n);
  MetricReport r;
  r.rmse = std::sqrt(sq * inv_n) * 1000.0;
  r.mae = ab * inv_n * 1000.0;
  r.irmse = std::sqrt(isq * inv_n) * 1000.0;
  r.imae = iab * inv_n * 1000.0;
  r.valid_count = n;
  return r;
}

double l2_loss(const Grid& pred, const Grid& target, const Grid* mask) {
  require_same_shape(pred, target, "l2_loss");
  if (mask != nullptr) require_same_shape(pred, *mask, "l2_loss mask");
  auto p = pred.values();
  auto t = target.values();
  double sum = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (mask != nullptr && !(mask->values()[i] > 0.0)) continue;
    const double d = p[i] - t[i];
    sum += d * d;
    ++n;
  }
  if (n == 0) throw Error(Errc::EmptyGroundTruth, "l2_loss mask selects no pixels");
  return sum / static_cast<double>(n);
}

double total_loss(double coarse_loss, double refined_loss, double confidence_loss, const LossWeights& w) {
  return w.lambda * coarse_loss + w.alpha * refined_loss + w.beta * confidence_loss;
}

}  // namespace dspn
