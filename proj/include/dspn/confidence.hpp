#pragma once

// Confidence supervision target and confidence-weighted replacement of
// measured depth.

#include "dspn/grid.hpp"

namespace dspn {

struct ConfidenceConfig {
  double gamma = 0.1;  // meters
  // Heuristic confidence window: grows from 3x3 until it holds this many
  // valid samples (the pixel itself included) or reaches the radius cap.
  int min_window_samples = 5;
  int max_window_radius = 16;
};

/// M*(x) = m(x) exp(-|D*(x) - Ds(x)| / gamma).
Grid confidence_target(const Grid& truth, const Grid& sparse, const Grid& mask,
                       const ConfidenceConfig& cfg);

/// out = (1 - mM) H + mM Hs. With mM == 1 the result equals Hs exactly and
/// with mM == 0 it equals H exactly.
Grid soft_replace(const Grid& hidden, const Grid& sparse, const Grid& mask, const Grid& confidence);

/// Inference-time stand-in for a learned confidence head:
/// M = m exp(-|Ds - median of valid Ds in the window| / gamma), where the
/// window is the smallest square of radius >= 1 holding enough samples.
Grid heuristic_confidence(const Grid& sparse, const Grid& mask, const ConfidenceConfig& cfg);

}  // namespace dspn
