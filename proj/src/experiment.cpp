#include "dspn/experiment.hpp"

#include "dspn/cspn.hpp"
#include "dspn/dspn.hpp"

namespace dspn {

RefineMethod parse_refine_method(const std::string& name) {
  if (name == "none") return RefineMethod::None;
  if (name == "cspn") return RefineMethod::Cspn;
  if (name == "dspn") return RefineMethod::Dspn;
  throw Error(Errc::InvalidConfig, "unknown refine method '" + name + "'");
}

const char* to_string(RefineMethod m) {
  switch (m) {
    case RefineMethod::None: return "none";
    case RefineMethod::Cspn: return "cspn";
    case RefineMethod::Dspn: return "dspn";
  }
  return "unknown";
}

PreparedScene prepare_scene(int id, const Grid& truth, const SparseSample& sample, int feature_dim,
                            const ConfidenceConfig& confidence) {
  PreparedScene s;
  s.id = id;
  s.truth = truth;
  s.sparse = sample.depth;
  s.mask = sample.mask;
  s.coarse = coarse_predict(s.sparse, s.mask);
  s.features = build_features(s.coarse, s.mask, feature_dim);
  s.confidence = heuristic_confidence(s.sparse, s.mask, confidence);
  return s;
}

std::vector<PreparedScene> make_suite(const SuiteConfig& cfg) {
  if (cfg.scenes < 1) throw Error(Errc::InvalidConfig, "suite needs at least one scene");
  std::vector<PreparedScene> out(static_cast<std::size_t>(cfg.scenes));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < cfg.scenes; ++i) {
    SceneSpec scene = cfg.scene;
    scene.seed += static_cast<std::uint64_t>(i);
    SparseSpec sparse = cfg.sparse;
    sparse.seed += static_cast<std::uint64_t>(i);
    const Grid truth = gen_scene(scene);
    out[static_cast<std::size_t>(i)] = prepare_scene(i, truth, sample_sparse(truth, sparse), cfg.feature_dim,
                                                     cfg.confidence);
  }
  return out;
}

namespace {

Grid full_confidence(const PreparedScene& s) { return Grid(s.mask.width(), s.mask.height(), 1, 1.0); }

}  // namespace

Grid refine_scene(const PreparedScene& scene, const RefineSetup& setup, const TrainableDspn* dspn) {
  const Grid confidence = setup.use_confidence ? scene.confidence : full_confidence(scene);
  switch (setup.method) {
    case RefineMethod::None:
      return soft_replace(scene.coarse, scene.sparse, scene.mask, confidence);
    case RefineMethod::Cspn: {
      const auto stencils =
          AffinityStencilField::uniform(scene.coarse.width(), scene.coarse.height(), setup.kernel, 1.0);
      if (!setup.use_confidence) return cspn_refine(scene.coarse, scene.sparse, scene.mask, stencils, setup.iters);
      return cspn_refine_confident(scene.coarse, scene.sparse, scene.mask, confidence, stencils, setup.iters);
    }
    case RefineMethod::Dspn: {
      if (dspn == nullptr) throw Error(Errc::InvalidConfig, "dspn refinement needs parameters");
      if (dspn->estimator.kernel != setup.kernel) {
        throw Error(Errc::InvalidConfig, "dspn parameters were built for a different kernel size");
      }
      return dspn_refine(scene.coarse, scene.sparse, scene.mask, confidence, scene.features,
                         dspn->offsets_for(scene.features), dspn->emb, setup.iters);
    }
  }
  throw Error(Errc::InvalidConfig, "unhandled refine method");
}

FitScene to_fit_scene(const PreparedScene& scene, bool use_confidence) {
  return {scene.coarse, scene.sparse, scene.mask,
          use_confidence ? scene.confidence : full_confidence(scene), scene.features, scene.truth};
}

std::vector<MetricReport> evaluate_suite(const std::vector<PreparedScene>& suite, const RefineSetup& setup,
                                         const TrainableDspn* dspn) {
  std::vector<MetricReport> out;
  out.reserve(suite.size());
  for (const auto& s : suite) out.push_back(eval_metrics(refine_scene(s, setup, dspn), s.truth));
  return out;
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  if (reports.empty()) throw Error(Errc::EmptyGroundTruth, "no reports to average");
  MetricReport m;
  for (const auto& r : reports) {
    m.rmse += r.rmse;
    m.mae += r.mae;
    m.irmse += r.irmse;
    m.imae += r.imae;
    m.valid_count += r.valid_count;
  }
  const double n = static_cast<double>(reports.size());
  m.rmse /= n;
  m.mae /= n;
  m.irmse /= n;
  m.imae /= n;
  return m;
}

TrainableDspn train_dspn(const std::vector<PreparedScene>& training, const TrainingConfig& cfg, int kernel,
                         int iters, bool use_confidence, std::vector<double>* loss_trace) {
  std::vector<FitScene> scenes;
  scenes.reserve(training.size());
  for (const auto& s : training) scenes.push_back(to_fit_scene(s, use_confidence));
  TrainableDspn init = TrainableDspn::make(cfg.suite.feature_dim, cfg.embed_dim, cfg.hidden, kernel, cfg.init_seed);
  FitOptions fit = cfg.fit;
  fit.iters = iters;
  FitResult r = toy_fit(scenes, std::move(init), fit);
  if (loss_trace != nullptr) *loss_trace = std::move(r.loss_trace);
  return std::move(r.params);
}

std::vector<AblationRow> run_ablation(const AblationConfig& cfg) {
  const auto suite = make_suite(cfg.eval);
  std::vector<PreparedScene> training;
  std::vector<AblationRow> rows;
  auto add_row = [&](std::string name, int iters, int kernel, std::vector<MetricReport> reports,
                     TrainableDspn params = {}) {
    AblationRow row{std::move(name), iters, kernel, mean_report(reports), std::move(reports), std::move(params)};
    rows.push_back(std::move(row));
  };
  if (cfg.include_baselines) {
    add_row("baseline*", 0, 0, evaluate_suite(suite, {RefineMethod::None, 3, 0, false}));
    add_row("baseline", 0, 0, evaluate_suite(suite, {RefineMethod::None, 3, 0, true}));
  }
  for (RefineMethod m : cfg.methods) {
    if (m == RefineMethod::None) continue;
    for (int k : cfg.kernels) {
      for (int it : cfg.iters) {
        const RefineSetup setup{m, k, it, true};
        if (m == RefineMethod::Cspn) {
          add_row("cspn", it, k, evaluate_suite(suite, setup));
          continue;
        }
        if (training.empty()) training = make_suite(cfg.train.suite);
        TrainableDspn params = train_dspn(training, cfg.train, k, it, true);
        auto reports = evaluate_suite(suite, setup, &params);
        add_row("dspn", it, k, std::move(reports), std::move(params));
      }
    }
  }
  return rows;
}

SuiteConfig default_eval_suite() {
  SuiteConfig s;
  s.scenes = 50;
  s.scene = SceneSpec{SceneKind::Composite, 64, 64, 1.0, 10.0, 1000};
  s.sparse = SparseSpec{0.05, 0.02, 0.1, 1.0, 5000};
  s.feature_dim = 16;
  s.confidence.gamma = 0.1;
  return s;
}

TrainingConfig default_training() {
  TrainingConfig t;
  t.suite = default_eval_suite();
  t.suite.scenes = 8;
  t.suite.scene.seed = 900000;
  t.suite.sparse.seed = 950000;
  t.fit.lr = 0.2;
  t.fit.steps = 60;
  t.fit.seed = 3;
  return t;
}

}  // namespace dspn
