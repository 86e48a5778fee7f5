#pragma once

// Scene suites and the refinement comparisons run over them (the ablation
// table and its acceptance checks).

#include <cstdint>
#include <string>
#include <vector>

#include "dspn/confidence.hpp"
#include "dspn/metrics.hpp"
#include "dspn/synth.hpp"
#include "dspn/toy_fit.hpp"

namespace dspn {

/// Scene i of a suite uses seed scene.seed + i for the geometry and
/// sparse.seed + i for the sampling.
struct SuiteConfig {
  int scenes = 50;
  SceneSpec scene;
  SparseSpec sparse;
  int feature_dim = 16;
  ConfidenceConfig confidence;
};

struct PreparedScene {
  int id = 0;
  Grid truth, sparse, mask, coarse, features, confidence;
};

PreparedScene prepare_scene(int id, const Grid& truth, const SparseSample& sample, int feature_dim,
                            const ConfidenceConfig& confidence);
std::vector<PreparedScene> make_suite(const SuiteConfig& cfg);

enum class RefineMethod { None, Cspn, Dspn };
RefineMethod parse_refine_method(const std::string& name);
const char* to_string(RefineMethod m);

struct RefineSetup {
  RefineMethod method = RefineMethod::Dspn;
  int kernel = 3;
  int iters = 12;
  /// Confidence-weighted replacement with the heuristic confidence; otherwise
  /// hard replacement.
  bool use_confidence = true;
};

/// None applies one replacement pass to the coarse depth. Cspn uses uniform
/// positive stencils. Dspn needs trained (or freshly initialized) parameters.
Grid refine_scene(const PreparedScene& scene, const RefineSetup& setup, const TrainableDspn* dspn = nullptr);

FitScene to_fit_scene(const PreparedScene& scene, bool use_confidence);

std::vector<MetricReport> evaluate_suite(const std::vector<PreparedScene>& suite, const RefineSetup& setup,
                                         const TrainableDspn* dspn = nullptr);
MetricReport mean_report(const std::vector<MetricReport>& reports);

struct TrainingConfig {
  SuiteConfig suite;  // training scenes, disjoint seeds from the evaluation suite
  FitOptions fit;
  int embed_dim = 16;
  int hidden = 16;
  std::uint64_t init_seed = 11;
};

TrainableDspn train_dspn(const std::vector<PreparedScene>& training, const TrainingConfig& cfg, int kernel,
                         int iters, bool use_confidence, std::vector<double>* loss_trace = nullptr);

struct AblationRow {
  std::string method;  // baseline*, baseline, cspn, dspn
  int iters = 0;       // 0 where not applicable
  int kernel = 0;
  MetricReport mean;
  std::vector<MetricReport> per_scene;
  TrainableDspn params;  // dspn rows only
};

struct AblationConfig {
  SuiteConfig eval;
  TrainingConfig train;
  std::vector<RefineMethod> methods{RefineMethod::Cspn, RefineMethod::Dspn};
  std::vector<int> iters{3, 6, 12};
  std::vector<int> kernels{3};
  bool include_baselines = true;
};

std::vector<AblationRow> run_ablation(const AblationConfig& cfg);

/// Defaults shared by the CLI and the acceptance suite.
SuiteConfig default_eval_suite();
TrainingConfig default_training();

}  // namespace dspn
