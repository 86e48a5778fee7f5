#include "dspn/toy_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dspn/rng.hpp"

namespace dspn {

TrainableDspn TrainableDspn::make(int feature_dim, int embed_dim, int hidden, int kernel, std::uint64_t seed) {
  TrainableDspn t;
  t.emb = EmbeddingParams::random(embed_dim, feature_dim, seed, 0.1);
  t.estimator = OffsetEstimatorParams::make(feature_dim, hidden, kernel, seed + 1);
  return t;
}

ParamVector TrainableDspn::flatten() const {
  ParamVector p = dspn::flatten(emb);
  const ParamVector e = dspn::flatten(estimator);
  for (const auto& s : e.segments) p.append(s.name, e.segment(s.name));
  return p;
}

void TrainableDspn::unflatten(const ParamVector& p) {
  dspn::unflatten(p, emb);
  dspn::unflatten(p, estimator);
}

double fit_loss_and_gradient(std::span<const FitScene> scenes, const TrainableDspn& params, int iters,
                             const LossWeights& weights, ParamVector* gradient) {
  if (scenes.empty()) throw Error(Errc::InvalidConfig, "no scenes to fit");
  const double inv_scenes = 1.0 / static_cast<double>(scenes.size());
  double loss = 0.0;
  if (gradient != nullptr) {
    *gradient = params.flatten();
    std::fill(gradient->values.begin(), gradient->values.end(), 0.0);
  }
  for (const FitScene& s : scenes) {
    OffsetEstimatorTrace trace;
    const OffsetField offsets = offset_estimator(s.features, params.estimator, trace);
    const DspnForwardState state = dspn_refine_forward(s.coarse, s.sparse, s.mask, s.confidence, s.features,
                                                       offsets, params.emb, iters);
    const double scene_loss = l2_loss(state.output, s.truth);
    loss += total_loss(0.0, scene_loss, 0.0, weights) * inv_scenes;
    if (gradient == nullptr) continue;

    Grid upstream(state.output.width(), state.output.height(), 1);
    const double scale = weights.alpha * inv_scenes * 2.0 / static_cast<double>(upstream.size());
    for (std::size_t i = 0; i < upstream.size(); ++i) {
      upstream.values()[i] = scale * (state.output.values()[i] - s.truth.values()[i]);
    }
    const DspnGradients g = dspn_backward(upstream, state);
    const OffsetEstimatorParams est = offset_estimator_backward(g.offsets, params.estimator, trace);
    auto add = [&](const std::string& name, std::span<const double> v) {
      auto dst = gradient->segment(name);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += v[i];
    };
    add("theta", g.theta);
    add("phi", g.phi);
    const ParamVector e = flatten(est);
    for (const auto& seg : e.segments) add(seg.name, e.segment(seg.name));
  }
  return loss;
}

FitResult toy_fit(std::span<const FitScene> scenes, TrainableDspn init, const FitOptions& options) {
  if (options.steps < 1) throw Error(Errc::InvalidConfig, "toy_fit needs steps >= 1");
  if (!(options.lr >= 0.0) || !std::isfinite(options.lr)) throw Error(Errc::InvalidConfig, "lr must be >= 0");
  if (options.iters < 0) throw Error(Errc::InvalidConfig, "iteration count must be >= 0");
  if (scenes.empty()) throw Error(Errc::InvalidConfig, "no scenes to fit");

  FitResult result;
  result.params = std::move(init);
  ParamVector p = result.params.flatten();
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.seed);
  const bool minibatch = options.batch_size > 0 && static_cast<std::size_t>(options.batch_size) < scenes.size();
  std::size_t cursor = scenes.size();
  std::vector<FitScene> batch;

  for (int step = 0; step < options.steps; ++step) {
    std::span<const FitScene> active = scenes;
    if (minibatch) {
      batch.clear();
      for (int b = 0; b < options.batch_size; ++b) {
        if (cursor == scenes.size()) {
          // Fisher-Yates reshuffle per epoch.
          for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(static_cast<int>(i))]);
          cursor = 0;
        }
        batch.push_back(scenes[order[cursor++]]);
      }
      active = batch;
    }
    ParamVector grad;
    const double loss = fit_loss_and_gradient(active, result.params, options.iters, options.weights, &grad);
    if (!std::isfinite(loss)) throw Error(Errc::Diverged, "training loss became non-finite");
    result.loss_trace.push_back(loss);
    for (const auto& seg : grad.segments) {
      const bool is_embedding = seg.name == "theta" || seg.name == "phi";
      if ((is_embedding && !options.train_embedding) || (!is_embedding && !options.train_offsets)) continue;
      for (std::size_t i = seg.offset; i < seg.offset + seg.count; ++i) p.values[i] -= options.lr * grad.values[i];
    }
    for (double v : p.values) {
      if (!std::isfinite(v)) throw Error(Errc::Diverged, "parameters became non-finite");
    }
    result.params.unflatten(p);
  }
  return result;
}

}  // namespace dspn
