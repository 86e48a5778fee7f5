#pragma once

// Finite-difference verification of the analytic gradients.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dspn/backward.hpp"
#include "dspn/offset_estimator.hpp"

namespace dspn {

/// A flat view of one or more parameter groups. `segments` records where each
/// named group lives so the vector can be unflattened.
struct ParamVector {
  struct Segment {
    std::string name;
    std::size_t offset = 0;
    std::size_t count = 0;
  };
  std::vector<double> values;
  std::vector<Segment> segments;

  void append(const std::string& name, std::span<const double> data);
  std::span<const double> segment(const std::string& name) const;
  std::span<double> segment(const std::string& name);
};

ParamVector flatten(const EmbeddingParams& emb);
void unflatten(const ParamVector& p, EmbeddingParams& emb);
ParamVector flatten(const OffsetEstimatorParams& params);
void unflatten(const ParamVector& p, OffsetEstimatorParams& params);
ParamVector flatten(const Grid& grid, const std::string& name);
void unflatten(const ParamVector& p, const std::string& name, Grid& grid);

using LossFn = std::function<double(const ParamVector&)>;

/// Central differences with per-coordinate step eps * max(1, |p_i|).
ParamVector finite_diff_grad(const LossFn& loss, const ParamVector& p, double eps);

struct GradReport {
  std::string group;
  std::vector<double> analytic;
  std::vector<double> numeric;
  double max_rel_error = 0.0;  // |a - f| / max(|a|, |f|, 1e-8)
  double max_abs_error = 0.0;
};

GradReport compare_gradients(const std::string& group, std::span<const double> analytic,
                             std::span<const double> numeric);

struct GradcheckConfig {
  int instances = 20;
  int size = 8;
  int feature_dim = 4;
  int embed_dim = 4;
  int hidden = 4;
  int kernel = 3;
  int iters = 3;
  double eps = 1e-4;
  double tolerance = 1e-4;
  std::uint64_t seed = 2024;
};

struct GradcheckSummary {
  std::vector<GradReport> groups;  // worst case per group over all instances
  int instances = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Random instances of the refine loss (L2 against a random target) checked
/// for the hidden state, both embeddings, raw offsets and, through the offset
/// estimator, the estimator's convolution parameters. Also checks the single
/// step without replacement.
GradcheckSummary run_gradcheck(const GradcheckConfig& cfg);

}  // namespace dspn
