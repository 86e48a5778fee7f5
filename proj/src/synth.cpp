#include "dspn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dspn/cspn.hpp"
#include "dspn/rng.hpp"

namespace dspn {

SceneKind parse_scene_kind(const std::string& name) {
  if (name == "plane") return SceneKind::Plane;
  if (name == "step") return SceneKind::Step;
  if (name == "slope") return SceneKind::Slope;
  if (name == "sphere-cap") return SceneKind::SphereCap;
  if (name == "composite") return SceneKind::Composite;
  throw Error(Errc::InvalidSpec, "unknown scene kind '" + name + "'");
}

const char* to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::Plane: return "plane";
    case SceneKind::Step: return "step";
    case SceneKind::Slope: return "slope";
    case SceneKind::SphereCap: return "sphere-cap";
    case SceneKind::Composite: return "composite";
  }
  return "unknown";
}

void SceneSpec::validate() const {
  if (width < 8 || height < 8) throw Error(Errc::InvalidSpec, "scene dimensions must be >= 8");
  if (!(depth_min > 0.0) || !(depth_max >= depth_min) || !std::isfinite(depth_max)) {
    throw Error(Errc::InvalidSpec, "depth range must be positive with min <= max");
  }
}

void SparseSpec::validate() const {
  if (!(density > 0.0 && density <= 1.0)) throw Error(Errc::InvalidSpec, "density must be in (0, 1]");
  if (!(noise_sigma >= 0.0) || !(outlier_sigma >= 0.0)) throw Error(Errc::InvalidSpec, "noise sigma must be >= 0");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw Error(Errc::InvalidSpec, "outlier fraction must be in [0, 1)");
  }
}

namespace {

// Linear ramp from lo to hi along a random direction across the image.
struct Ramp {
  double lo, hi, cx, cy, half_extent;
  double at(double x, double y) const {
    const double t = std::clamp((x * cx + y * cy) / half_extent * 0.5 + 0.5, 0.0, 1.0);
    return lo + (hi - lo) * t;
  }
};

Ramp make_ramp(Rng& rng, int w, int h, double lo, double hi) {
  const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  Ramp r{lo, hi, std::cos(angle), std::sin(angle), 0.0};
  // Project image corners relative to the center onto the direction.
  const double hx = 0.5 * (w - 1), hy = 0.5 * (h - 1);
  r.half_extent = std::max(std::abs(r.cx) * hx + std::abs(r.cy) * hy, 1.0);
  return r;
}

void fill_ramp(Grid& g, const Ramp& r) {
  const double hx = 0.5 * (g.width() - 1), hy = 0.5 * (g.height() - 1);
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) g.at(x, y) = r.at(x - hx, y - hy);
}

// Cap of a sphere of radius `radius` pixels whose apex sits at `apex` depth;
// depth rises to `base` at the rim. Pixels outside the rim are untouched.
void paint_cap(Grid& g, double cx, double cy, double radius, double apex, double base) {
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const double r2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (radius * radius);
      if (r2 >= 1.0) continue;
      const double d = base - (base - apex) * std::sqrt(1.0 - r2);
      g.at(x, y) = std::min(g.at(x, y), d);
    }
  }
}

Grid gen_composite(const SceneSpec& s, Rng& rng) {
  Grid g(s.width, s.height, 1);
  const double span = s.depth_max - s.depth_min;
  fill_ramp(g, make_ramp(rng, s.width, s.height, s.depth_min + 0.6 * span, s.depth_max));

  const int rects = 2 + rng.below(3);
  for (int i = 0; i < rects; ++i) {
    const int rw = 4 + rng.below(std::max(1, s.width / 2));
    const int rh = 4 + rng.below(std::max(1, s.height / 2));
    const int x0 = rng.below(s.width - 2);
    const int y0 = rng.below(s.height - 2);
    const double d = rng.uniform(s.depth_min, s.depth_min + 0.7 * span);
    for (int y = y0; y < std::min(s.height, y0 + rh); ++y)
      for (int x = x0; x < std::min(s.width, x0 + rw); ++x) g.at(x, y) = std::min(g.at(x, y), d);
  }

  // Diagonal half-plane wedge clipped to a band, giving a slanted edge.
  {
    const double nx = rng.uniform(-1.0, 1.0), ny = rng.uniform(-1.0, 1.0);
    const double norm = std::max(std::hypot(nx, ny), 1e-6);
    const double ox = rng.uniform(0.25, 0.75) * s.width, oy = rng.uniform(0.25, 0.75) * s.height;
    const double d = rng.uniform(s.depth_min + 0.2 * span, s.depth_min + 0.6 * span);
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) {
        const double side = ((x - ox) * nx + (y - oy) * ny) / norm;
        if (side > 0.0 && side < 0.3 * s.width) g.at(x, y) = std::min(g.at(x, y), d);
      }
    }
  }

  const int caps = 1 + rng.below(2);
  for (int i = 0; i < caps; ++i) {
    const double radius = rng.uniform(0.1, 0.25) * std::min(s.width, s.height);
    const double cx = rng.uniform(0.0, s.width - 1.0), cy = rng.uniform(0.0, s.height - 1.0);
    const double apex = rng.uniform(s.depth_min, s.depth_min + 0.4 * span);
    const double base = std::min(s.depth_max, apex + rng.uniform(0.1, 0.3) * span);
    paint_cap(g, cx, cy, radius, apex, base);
  }
  return g;
}

}  // namespace

Grid gen_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int w = spec.width, h = spec.height;
  switch (spec.kind) {
    case SceneKind::Plane:
      return Grid(w, h, 1, rng.uniform(spec.depth_min, spec.depth_max));
    case SceneKind::Step: {
      Grid g(w, h, 1, spec.depth_max);
      const int variant = rng.below(3);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          bool near = false;
          if (variant == 0) near = x < w / 2;
          else if (variant == 1) near = y < h / 2;
          else near = x * (h - 1) + y * (w - 1) < (w - 1) * (h - 1);
          if (near) g.at(x, y) = spec.depth_min;
        }
      }
      return g;
    }
    case SceneKind::Slope: {
      Grid g(w, h, 1);
      fill_ramp(g, make_ramp(rng, w, h, spec.depth_min, spec.depth_max));
      return g;
    }
    case SceneKind::SphereCap: {
      Grid g(w, h, 1, spec.depth_max);
      const double radius = rng.uniform(0.25, 0.45) * std::min(w, h);
      paint_cap(g, rng.uniform(0.3, 0.7) * (w - 1), rng.uniform(0.3, 0.7) * (h - 1), radius,
                spec.depth_min, spec.depth_max);
      return g;
    }
    case SceneKind::Composite:
      return gen_composite(spec, rng);
  }
  throw Error(Errc::InvalidSpec, "unhandled scene kind");
}

SparseSample sample_sparse(const Grid& truth, const SparseSpec& spec) {
  spec.validate();
  require_single_channel(truth, "sample_sparse");
  Rng rng(spec.seed);
  SparseSample out{Grid(truth.width(), truth.height(), 1), Grid(truth.width(), truth.height(), 1)};
  for (int y = 0; y < truth.height(); ++y) {
    for (int x = 0; x < truth.width(); ++x) {
      // Fixed draw count per pixel keeps masks stable when noise settings change.
      const double keep = rng.uniform();
      const double noise = rng.normal();
      const double outlier_draw = rng.uniform();
      const double outlier_noise = rng.normal();
      if (!(keep < spec.density)) continue;
      double v = truth.at(x, y) + spec.noise_sigma * noise;
      if (outlier_draw < spec.outlier_fraction) v += spec.outlier_sigma * outlier_noise;
      out.depth.at(x, y) = std::max(v, kMinSparseDepth);
      out.mask.at(x, y) = 1.0;
    }
  }
  return out;
}

namespace {

Grid box_blur3(const Grid& g) {
  Grid out(g.width(), g.height(), 1);
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) acc += g.clamped(x + dx, y + dy);
      out.at(x, y) = acc / 9.0;
    }
  }
  return out;
}

}  // namespace

Grid coarse_predict(const Grid& sparse, const Grid& mask) {
  require_single_channel(sparse, "coarse_predict");
  require_same_shape(sparse, mask, "coarse_predict mask");
  require_binary_mask(mask);
  const int w = sparse.width(), h = sparse.height();
  bool any = false;
  for (double m : mask.values()) any = any || m == 1.0;
  if (!any) throw Error(Errc::EmptySparse, "no valid sparse pixels");

  Grid filled(w, h, 1);
  const int max_r = std::max(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      long best_d2 = std::numeric_limits<long>::max();
      long best_index = std::numeric_limits<long>::max();
      double best_value = 0.0;
      // Square rings of growing Chebyshev radius; once r*r exceeds the best
      // squared distance no farther ring can hold a closer sample.
      for (int r = 0; r <= max_r; ++r) {
        if (static_cast<long>(r) * r > best_d2) break;
        for (int yy = y - r; yy <= y + r; ++yy) {
          if (yy < 0 || yy >= h) continue;
          const bool edge_row = yy == y - r || yy == y + r;
          const int step = edge_row ? 1 : 2 * r;
          for (int xx = x - r; xx <= x + r; xx += std::max(step, 1)) {
            if (xx < 0 || xx >= w || mask.at(xx, yy) != 1.0) continue;
            const long d2 = static_cast<long>(xx - x) * (xx - x) + static_cast<long>(yy - y) * (yy - y);
            const long idx = static_cast<long>(yy) * w + xx;
            if (d2 < best_d2 || (d2 == best_d2 && idx < best_index)) {
              best_d2 = d2;
              best_index = idx;
              best_value = sparse.at(xx, yy);
            }
          }
        }
      }
      filled.at(x, y) = best_value;
    }
  }
  return box_blur3(box_blur3(filled));
}

Grid build_features(const Grid& coarse, const Grid& mask, int feature_dim) {
  require_single_channel(coarse, "build_features");
  require_same_shape(coarse, mask, "build_features mask");
  if (feature_dim < 1) throw Error(Errc::InvalidConfig, "feature_dim must be >= 1");
  const int w = coarse.width(), h = coarse.height();
  const double lo = coarse.min_value(), hi = coarse.max_value();
  const double range = hi - lo;
  Grid norm(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) norm.at(x, y) = range > 0.0 ? (coarse.at(x, y) - lo) / range : 0.5;

  Grid out(w, h, feature_dim);
  double base[kBaseFeatureChannels];
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      base[0] = norm.at(x, y);
      base[1] = 0.5 * std::abs(norm.clamped(x + 1, y) - norm.clamped(x - 1, y));
      base[2] = 0.5 * std::abs(norm.clamped(x, y + 1) - norm.clamped(x, y - 1));
      base[3] = mask.at(x, y);
      base[4] = static_cast<double>(x) / w;
      base[5] = static_cast<double>(y) / h;
      for (int c = 0; c < feature_dim; ++c) out.at(x, y, c) = base[c % kBaseFeatureChannels];
    }
  }
  return out;
}

}  // namespace dspn
