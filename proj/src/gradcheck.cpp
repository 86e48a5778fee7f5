#include "dspn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dspn/metrics.hpp"
#include "dspn/rng.hpp"

namespace dspn {

void ParamVector::append(const std::string& name, std::span<const double> data) {
  segments.push_back({name, values.size(), data.size()});
  values.insert(values.end(), data.begin(), data.end());
}

std::span<const double> ParamVector::segment(const std::string& name) const {
  for (const auto& s : segments) {
    if (s.name == name) return {values.data() + s.offset, s.count};
  }
  throw Error(Errc::ShapeMismatch, "no parameter segment named " + name);
}

std::span<double> ParamVector::segment(const std::string& name) {
  for (const auto& s : segments) {
    if (s.name == name) return {values.data() + s.offset, s.count};
  }
  throw Error(Errc::ShapeMismatch, "no parameter segment named " + name);
}

namespace {

void copy_segment(std::span<const double> src, std::vector<double>& dst) {
  if (src.size() != dst.size()) throw Error(Errc::ShapeMismatch, "parameter segment size mismatch");
  std::copy(src.begin(), src.end(), dst.begin());
}

std::string layer_name(int l, const char* part) { return "layer" + std::to_string(l) + "." + part; }

}  // namespace

ParamVector flatten(const EmbeddingParams& emb) {
  ParamVector p;
  p.append("theta", emb.theta);
  p.append("phi", emb.phi);
  return p;
}

void unflatten(const ParamVector& p, EmbeddingParams& emb) {
  copy_segment(p.segment("theta"), emb.theta);
  copy_segment(p.segment("phi"), emb.phi);
}

ParamVector flatten(const OffsetEstimatorParams& params) {
  ParamVector p;
  for (int l = 0; l < 3; ++l) {
    p.append(layer_name(l, "weight"), params.layers[l].weight);
    p.append(layer_name(l, "bias"), params.layers[l].bias);
  }
  return p;
}

void unflatten(const ParamVector& p, OffsetEstimatorParams& params) {
  for (int l = 0; l < 3; ++l) {
    copy_segment(p.segment(layer_name(l, "weight")), params.layers[l].weight);
    copy_segment(p.segment(layer_name(l, "bias")), params.layers[l].bias);
  }
}

ParamVector flatten(const Grid& grid, const std::string& name) {
  ParamVector p;
  p.append(name, grid.values());
  return p;
}

void unflatten(const ParamVector& p, const std::string& name, Grid& grid) {
  auto src = p.segment(name);
  if (src.size() != grid.size()) throw Error(Errc::ShapeMismatch, "parameter segment size mismatch");
  std::copy(src.begin(), src.end(), grid.values().begin());
}

ParamVector finite_diff_grad(const LossFn& loss, const ParamVector& p, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::InvalidConfig, "finite-difference eps must be > 0");
  ParamVector grad = p;
  ParamVector probe = p;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double h = eps * std::max(1.0, std::abs(p.values[i]));
    probe.values[i] = p.values[i] + h;
    const double up = loss(probe);
    probe.values[i] = p.values[i] - h;
    const double down = loss(probe);
    probe.values[i] = p.values[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(Errc::NonFiniteLoss, "loss is not finite during finite differencing");
    }
    grad.values[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

GradReport compare_gradients(const std::string& group, std::span<const double> analytic,
                             std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) throw Error(Errc::ShapeMismatch, "gradient sizes differ");
  GradReport r;
  r.group = group;
  r.analytic.assign(analytic.begin(), analytic.end());
  r.numeric.assign(numeric.begin(), numeric.end());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], f = numeric[i];
    const double abs_err = std::abs(a - f);
    r.max_abs_error = std::max(r.max_abs_error, abs_err);
    r.max_rel_error = std::max(r.max_rel_error, abs_err / std::max({std::abs(a), std::abs(f), 1e-8}));
  }
  return r;
}

namespace {

// Distance of v to the nearest integer.
double lattice_distance(double v) { return std::abs(v - std::round(v)); }

constexpr double kKinkMargin = 1e-3;

struct Instance {
  Grid coarse, sparse, mask, confidence, target, features;
  EmbeddingParams emb;
  OffsetField offsets;
};

Instance make_instance(const GradcheckConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const int n = cfg.size;
  Instance in;
  in.coarse = Grid(n, n, 1);
  in.target = Grid(n, n, 1);
  in.sparse = Grid(n, n, 1);
  in.mask = Grid(n, n, 1);
  in.confidence = Grid(n, n, 1);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      in.coarse.at(x, y) = rng.uniform(1.0, 5.0);
      in.target.at(x, y) = rng.uniform(1.0, 5.0);
      if (rng.bernoulli(0.3)) {
        in.mask.at(x, y) = 1.0;
        in.sparse.at(x, y) = rng.uniform(1.0, 5.0);
        // (1 - M) scales every propagated gradient; keep it clear of zero.
        in.confidence.at(x, y) = rng.uniform(0.0, 0.9);
      }
    }
  }
  in.features = Grid(n, n, cfg.feature_dim);
  for (double& v : in.features.values()) v = rng.normal();
  in.emb = EmbeddingParams::random(cfg.embed_dim, cfg.feature_dim, rng.next_u64());
  // Offsets keep every sampling coordinate away from the lattice, where the
  // bilinear interpolant has kinks.
  in.offsets = OffsetField::zeros(n, n, cfg.kernel);
  for (double& v : in.offsets.data().values()) {
    do {
      v = rng.uniform(-1.5, 1.5);
    } while (lattice_distance(v) < kKinkMargin);
  }
  return in;
}

double refine_loss(const Instance& in, const Grid& coarse, const OffsetField& offsets, const EmbeddingParams& emb,
                   int iters) {
  return l2_loss(dspn_refine(coarse, in.sparse, in.mask, in.confidence, in.features, offsets, emb, iters),
                 in.target);
}

Grid loss_gradient(const Grid& output, const Grid& target) {
  Grid g(output.width(), output.height(), 1);
  const double scale = 2.0 / static_cast<double>(output.size());
  for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] = scale * (output.values()[i] - target.values()[i]);
  return g;
}

void fold(std::vector<GradReport>& worst, GradReport r) {
  for (auto& w : worst) {
    if (w.group == r.group) {
      const double abs_err = std::max(w.max_abs_error, r.max_abs_error);
      if (r.max_rel_error > w.max_rel_error) w = std::move(r);
      w.max_abs_error = abs_err;
      return;
    }
  }
  worst.push_back(std::move(r));
}

// Checks dspn_refine (or a single step when `single_step`) on one instance.
void check_refine(const GradcheckConfig& cfg, const Instance& in, bool single_step, std::vector<GradReport>& out) {
  const std::string prefix = single_step ? "step." : "refine.";
  const int iters = single_step ? 1 : cfg.iters;
  const Instance& local = in;
  auto loss_at = [&](const Grid& coarse, const OffsetField& offsets, const EmbeddingParams& emb) {
    if (single_step) return l2_loss(dspn_step(coarse, local.features, offsets, emb), local.target);
    return refine_loss(local, coarse, offsets, emb, iters);
  };
  const DspnForwardState state =
      single_step ? dspn_step_forward(local.coarse, local.features, local.offsets, local.emb)
                  : dspn_refine_forward(local.coarse, local.sparse, local.mask, local.confidence, local.features,
                                        local.offsets, local.emb, iters);
  const DspnGradients g = dspn_backward(loss_gradient(state.output, local.target), state);

  {
    const ParamVector p = flatten(local.coarse, "hidden");
    const auto fd = finite_diff_grad(
        [&](const ParamVector& v) {
          Grid c = local.coarse;
          unflatten(v, "hidden", c);
          return loss_at(c, local.offsets, local.emb);
        },
        p, cfg.eps);
    fold(out, compare_gradients(prefix + "hidden", g.hidden.values(), fd.values));
  }
  {
    const ParamVector p = flatten(local.emb);
    const auto fd = finite_diff_grad(
        [&](const ParamVector& v) {
          EmbeddingParams e = local.emb;
          unflatten(v, e);
          return loss_at(local.coarse, local.offsets, e);
        },
        p, cfg.eps);
    fold(out, compare_gradients(prefix + "theta", g.theta, fd.segment("theta")));
    fold(out, compare_gradients(prefix + "phi", g.phi, fd.segment("phi")));
  }
  {
    const ParamVector p = flatten(local.offsets.data(), "offsets");
    const auto fd = finite_diff_grad(
        [&](const ParamVector& v) {
          OffsetField o = local.offsets;
          unflatten(v, "offsets", o.data());
          return loss_at(local.coarse, o, local.emb);
        },
        p, cfg.eps);
    fold(out, compare_gradients(prefix + "offsets", g.offsets.values(), fd.values));
  }
}

// True when no sampling coordinate or pre-activation sits within the margin of
// a kink.
bool smooth_estimator_point(const OffsetEstimatorTrace& trace, const OffsetField& offsets) {
  for (double v : offsets.data().values()) {
    if (lattice_distance(v) < kKinkMargin) return false;
  }
  for (const Grid* g : {&trace.pre1, &trace.pre2}) {
    for (double v : g->values()) {
      if (std::abs(v) < kKinkMargin) return false;
    }
  }
  return true;
}

// Activation pattern and lattice cells: the piecewise-smooth region a point
// lies in.
std::vector<int> region_signature(const OffsetEstimatorTrace& trace, const OffsetField& offsets) {
  std::vector<int> sig;
  for (const Grid* g : {&trace.pre1, &trace.pre2}) {
    for (double v : g->values()) sig.push_back(v > 0.0);
  }
  for (double v : offsets.data().values()) sig.push_back(static_cast<int>(std::floor(v)));
  return sig;
}

void check_estimator(const GradcheckConfig& cfg, const Instance& in, std::uint64_t seed,
                     std::vector<GradReport>& out) {
  OffsetEstimatorParams params;
  OffsetEstimatorTrace trace;
  OffsetField offsets;
  for (std::uint64_t attempt = 0;; ++attempt) {
    params = OffsetEstimatorParams::make(cfg.feature_dim, cfg.hidden, cfg.kernel, seed + 7919 * attempt);
    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL + attempt));
    for (double& w : params.layers[2].weight) w = rng.normal(0.0, 0.1);
    for (double& b : params.layers[2].bias) b = rng.uniform(-1.0, 1.0);
    for (double& b : params.layers[0].bias) b = rng.uniform(-0.5, 0.5);
    for (double& b : params.layers[1].bias) b = rng.uniform(-0.5, 0.5);
    offsets = offset_estimator(in.features, params, trace);
    if (smooth_estimator_point(trace, offsets)) break;
    if (attempt > 10000) throw Error(Errc::InvalidState, "could not draw a kink-free estimator instance");
  }

  const DspnForwardState state = dspn_refine_forward(in.coarse, in.sparse, in.mask, in.confidence, in.features,
                                                     offsets, in.emb, cfg.iters);
  const DspnGradients g = dspn_backward(loss_gradient(state.output, in.target), state);
  const OffsetEstimatorParams analytic = offset_estimator_backward(g.offsets, params, trace);

  const ParamVector p = flatten(params);
  const auto fd = finite_diff_grad(
      [&](const ParamVector& v) {
        OffsetEstimatorParams q = params;
        unflatten(v, q);
        return refine_loss(in, in.coarse, offset_estimator(in.features, q), in.emb, cfg.iters);
      },
      p, cfg.eps);
  // A probe that leaves the smooth region measures a kink, not the gradient;
  // such coordinates are left out of the comparison.
  const std::vector<int> base = region_signature(trace, offsets);
  std::vector<double> a = flatten(analytic).values, f = fd.values;
  ParamVector probe = p;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double h = cfg.eps * std::max(1.0, std::abs(p.values[i]));
    bool smooth = true;
    for (double sign : {1.0, -1.0}) {
      probe.values[i] = p.values[i] + sign * h;
      OffsetEstimatorParams q = params;
      unflatten(probe, q);
      OffsetEstimatorTrace t;
      const OffsetField o = offset_estimator(in.features, q, t);
      smooth = smooth && region_signature(t, o) == base;
    }
    probe.values[i] = p.values[i];
    if (!smooth) a[i] = f[i] = 0.0;
  }
  fold(out, compare_gradients("estimator", a, f));
}

}  // namespace

GradcheckSummary run_gradcheck(const GradcheckConfig& cfg) {
  if (cfg.instances < 1 || cfg.size < 2 || cfg.iters < 1) {
    throw Error(Errc::InvalidConfig, "gradcheck needs >= 1 instance, size >= 2 and iters >= 1");
  }
  GradcheckSummary s;
  for (int i = 0; i < cfg.instances; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    const Instance in = make_instance(cfg, seed);
    check_refine(cfg, in, true, s.groups);
    check_refine(cfg, in, false, s.groups);
    check_estimator(cfg, in, seed, s.groups);
    ++s.instances;
  }
  for (const auto& g : s.groups) s.max_rel_error = std::max(s.max_rel_error, g.max_rel_error);
  s.passed = s.max_rel_error <= cfg.tolerance;
  return s;
}

}  // namespace dspn
