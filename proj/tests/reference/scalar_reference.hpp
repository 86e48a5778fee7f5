#pragma once

// Straightforward scalar versions of the propagation operators, written from
// the defining formulas without sharing code with the library. Tests compare
// the optimized kernels against these.

#include <vector>

#include "dspn/grid.hpp"

namespace ref {

using dspn::Grid;

/// Four-term bilinear interpolation with integer corners clamped to the grid.
double bilinear(const Grid& g, double x, double y, int c);

/// One fixed-stencil step. `raw` holds k*k-1 channels per pixel in raster
/// order over the k x k window with the center skipped.
Grid cspn_step(const Grid& h, const Grid& raw, int k);
Grid hard_replace(const Grid& h, const Grid& hs, const Grid& m);
Grid cspn_refine(const Grid& d0, const Grid& ds, const Grid& m, const Grid& raw, int k, int iters);

/// Row-major d_e x d_F matrices.
struct Embedding {
  int de = 0;
  int df = 0;
  std::vector<double> theta, phi;
};

/// One deformable step. `offsets` holds 2(k*k-1) channels: (dx, dy) per
/// neighbor, neighbors in the same raster order as above.
Grid dspn_step(const Grid& h, const Grid& f, const Grid& offsets, const Embedding& emb, int k);
Grid soft_replace(const Grid& h, const Grid& hs, const Grid& m, const Grid& conf);
Grid dspn_refine(const Grid& d0, const Grid& ds, const Grid& m, const Grid& conf, const Grid& f,
                 const Grid& offsets, const Embedding& emb, int k, int iters);

/// Affinity weights at one pixel: k*k-1 neighbor weights followed by the
/// self weight, computed with a plain (unshifted) softmax.
std::vector<double> affinity(const Grid& f, const Grid& offsets, const Embedding& emb, int k, int x, int y);

/// 3x3 mean with clamped borders.
Grid box_mean3(const Grid& g);

/// Brute-force nearest valid sample (smallest squared distance, then lowest
/// raster index) followed by two box_mean3 passes.
Grid coarse_predict(const Grid& ds, const Grid& m);

}  // namespace ref
