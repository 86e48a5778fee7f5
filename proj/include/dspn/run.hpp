#pragma once

// End-to-end pipelines behind the command-line tool.
//
// Scene files are named scene_NNNN_<role>.grd with roles truth, sparse, mask,
// coarse (generate), refined and error (complete).
//
// CSV output uses 6 significant digits and '\n' line endings.
//   eval:   scene_id,rmse,mae,irmse,imae  (one row per scene, then "mean")
//   ablate: method,iters,kernel,rmse,mae,irmse,imae  (iters and kernel are
//           empty on the baseline rows)

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dspn/config.hpp"

namespace dspn {

/// Returns the process exit status. Library errors propagate as Error.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& log);

std::string format_number(double v);
std::string scene_file(const std::filesystem::path& dir, int id, const std::string& role);

void write_eval_csv(std::ostream& os, const std::vector<int>& ids, const std::vector<MetricReport>& reports);
void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows);

nlohmann::json params_to_json(const TrainableDspn& params);
TrainableDspn params_from_json(const nlohmann::json& j);
void save_params(const TrainableDspn& params, const std::filesystem::path& path);
TrainableDspn load_params(const std::filesystem::path& path);

}  // namespace dspn
