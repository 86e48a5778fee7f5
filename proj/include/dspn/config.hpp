#pragma once

// Run configuration: one JSON document, every key overridable from the
// command line as `--set dotted.key=value`.

#include <string>
#include <vector>

#include "json.hpp"

#include "dspn/experiment.hpp"
#include "dspn/gradcheck.hpp"

namespace dspn {

enum class RunMode { Generate, Complete, Eval, Gradcheck, Ablate };
RunMode parse_run_mode(const std::string& name);
const char* to_string(RunMode mode);

struct IoConfig {
  std::string input_dir = ".";
  std::string output_dir = ".";
  std::string truth_dir;            // eval: defaults to input_dir
  std::string pred_suffix = "refined";
  std::string csv;                  // empty: stdout
  std::string params;               // DSPN parameters to load (complete)
  std::string save_params;          // where complete writes trained parameters
  bool write_pgm = false;           // generate: also emit sparse depth as 16-bit PGM
};

struct RunConfig {
  RunMode mode = RunMode::Eval;
  RefineSetup refine;
  SuiteConfig suite = default_eval_suite();
  TrainingConfig train = default_training();
  GradcheckConfig gradcheck;
  std::vector<RefineMethod> ablate_methods{RefineMethod::Cspn, RefineMethod::Dspn};
  std::vector<int> ablate_iters{3, 6, 12};
  std::vector<int> ablate_kernels{3};
  IoConfig io;

  /// Throws Error(InvalidConfig) on values the pipelines would reject.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Unknown keys are rejected so typos do not pass silently.
RunConfig config_from_json(const nlohmann::json& j);

/// Applies `key=value` with a dotted key. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Defaults, then the file (if any), then overrides, then validation.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace dspn
