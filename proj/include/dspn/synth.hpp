#pragma once

// Synthetic scenes, sparse sampling, and deterministic stand-ins for the
// learned prediction network (coarse depth and feature maps).

#include <cstdint>
#include <string>

#include "dspn/grid.hpp"

namespace dspn {

enum class SceneKind { Plane, Step, Slope, SphereCap, Composite };

SceneKind parse_scene_kind(const std::string& name);
const char* to_string(SceneKind kind);

struct SceneSpec {
  SceneKind kind = SceneKind::Composite;
  int width = 64;
  int height = 64;
  double depth_min = 1.0;  // meters
  double depth_max = 10.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SparseSpec {
  double density = 0.05;
  double noise_sigma = 0.02;     // meters
  double outlier_fraction = 0.1;  // of the kept samples
  double outlier_sigma = 1.0;    // meters
  std::uint64_t seed = 2;

  void validate() const;
};

struct SparseSample {
  Grid depth;  // 0 where not measured
  Grid mask;   // 1 where measured
};

/// Dense ground truth. Plane: one depth drawn from the range. Step: depth_min
/// on one side of an axis-aligned or diagonal edge and depth_max on the other.
/// Slope: a linear ramp spanning the range. SphereCap: a cap bulging out of a
/// far background. Composite: a sloped background with overlapping rectangles,
/// diagonal half-plane wedges and caps at random depths.
Grid gen_scene(const SceneSpec& spec);

/// Keeps each pixel independently with probability `density`. Kept pixels get
/// Gaussian noise; a further `outlier_fraction` of them get outlier noise.
/// Noisy values are floored at kMinSparseDepth so a kept sample always reads
/// as a valid, physically plausible return.
inline constexpr double kMinSparseDepth = 0.1;  // meters

SparseSample sample_sparse(const Grid& truth, const SparseSpec& spec);

/// Nearest-valid fill (ties: smaller distance, then raster order) followed by
/// two 3x3 box-blur passes with clamped borders.
Grid coarse_predict(const Grid& sparse, const Grid& mask);

/// Hand-crafted per-pixel features, repeated cyclically to `feature_dim`
/// channels: normalized depth, |d/dx|, |d/dy| of normalized depth (central
/// differences, clamped), the mask, x / width, y / height.
Grid build_features(const Grid& coarse, const Grid& mask, int feature_dim);

inline constexpr int kBaseFeatureChannels = 6;

}  // namespace dspn
