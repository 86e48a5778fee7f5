#pragma once

// Reverse-mode gradients of deformable propagation.
//
// The forward state caches the affinity field (positions, softmax weights,
// embedded query/key grids) and the hidden state entering every step.
// Gradients do not flow into the sparse measurements: replacement passes
// (1 - mM) of the upstream gradient to the propagated value and nothing to Hs.

#include <vector>

#include "dspn/dspn.hpp"

namespace dspn {

struct DspnGradients {
  Grid hidden;                // dL/dH_0
  std::vector<double> theta;  // dL/dG_theta, embed_dim x feature_dim
  std::vector<double> phi;    // dL/dG_phi
  Grid offsets;               // dL/d(offsets), same layout as OffsetField
};

struct DspnForwardState {
  bool valid = false;
  Grid features;
  EmbeddingParams emb;
  AffinityField field;
  std::vector<Grid> inputs;  // hidden state entering each step
  Grid sparse, mask, confidence;  // empty when steps are not followed by replacement
  Grid output;
};

struct BackwardOptions {
  /// Treat the affinity weights as constants: only the value path into H is
  /// differentiated and theta/phi/offset gradients stay zero.
  bool detach_affinity = false;
};

/// Single propagation step without replacement.
DspnForwardState dspn_step_forward(const Grid& hidden, const Grid& features, const OffsetField& offsets,
                                   const EmbeddingParams& emb);

/// Same computation as dspn_refine, keeping what the backward pass needs.
DspnForwardState dspn_refine_forward(const Grid& coarse, const Grid& sparse, const Grid& mask,
                                     const Grid& confidence, const Grid& features, const OffsetField& offsets,
                                     const EmbeddingParams& emb, int iters);

DspnGradients dspn_backward(const Grid& grad_output, const DspnForwardState& state,
                            const BackwardOptions& options = {});

}  // namespace dspn
