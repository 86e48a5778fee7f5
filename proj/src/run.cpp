#include "dspn/run.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <regex>

#include "dspn/io.hpp"

namespace dspn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string scene_file(const fs::path& dir, int id, const std::string& role) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "scene_%04d_%s.grd", id, role.c_str());
  return (dir / buf).string();
}

void write_eval_csv(std::ostream& os, const std::vector<int>& ids, const std::vector<MetricReport>& reports) {
  os << "scene_id,rmse,mae,irmse,imae\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const MetricReport& r = reports[i];
    os << ids[i] << ',' << format_number(r.rmse) << ',' << format_number(r.mae) << ','
       << format_number(r.irmse) << ',' << format_number(r.imae) << '\n';
  }
  const MetricReport m = mean_report(reports);
  os << "mean," << format_number(m.rmse) << ',' << format_number(m.mae) << ',' << format_number(m.irmse) << ','
     << format_number(m.imae) << '\n';
}

void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows) {
  os << "method,iters,kernel,rmse,mae,irmse,imae\n";
  for (const AblationRow& row : rows) {
    os << row.method << ',';
    if (row.kernel > 0) os << row.iters << ',' << row.kernel << 'x' << row.kernel;
    else os << ',';
    os << ',' << format_number(row.mean.rmse) << ',' << format_number(row.mean.mae) << ','
       << format_number(row.mean.irmse) << ',' << format_number(row.mean.imae) << '\n';
  }
}

json params_to_json(const TrainableDspn& params) {
  json layers = json::array();
  for (const ConvLayer& l : params.estimator.layers) {
    layers.push_back({{"in", l.in_channels}, {"out", l.out_channels}, {"weight", l.weight}, {"bias", l.bias}});
  }
  return {{"embedding",
           {{"embed_dim", params.emb.embed_dim},
            {"feature_dim", params.emb.feature_dim},
            {"theta", params.emb.theta},
            {"phi", params.emb.phi}}},
          {"estimator", {{"kernel", params.estimator.kernel}, {"layers", layers}}}};
}

TrainableDspn params_from_json(const json& j) {
  TrainableDspn p;
  try {
    const json& e = j.at("embedding");
    p.emb.embed_dim = e.at("embed_dim").get<int>();
    p.emb.feature_dim = e.at("feature_dim").get<int>();
    p.emb.theta = e.at("theta").get<std::vector<double>>();
    p.emb.phi = e.at("phi").get<std::vector<double>>();
    const json& est = j.at("estimator");
    p.estimator.kernel = est.at("kernel").get<int>();
    const json& layers = est.at("layers");
    if (!layers.is_array() || layers.size() != p.estimator.layers.size()) {
      throw Error(Errc::CorruptFile, "estimator needs exactly 3 layers");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
      ConvLayer& l = p.estimator.layers[i];
      l.in_channels = layers[i].at("in").get<int>();
      l.out_channels = layers[i].at("out").get<int>();
      l.weight = layers[i].at("weight").get<std::vector<double>>();
      l.bias = layers[i].at("bias").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptFile, std::string("malformed parameter file: ") + e.what());
  }
  p.emb.validate();
  p.estimator.validate();
  if (p.estimator.feature_dim() != p.emb.feature_dim) {
    throw Error(Errc::CorruptFile, "estimator and embedding disagree on the feature dimension");
  }
  return p;
}

void save_params(const TrainableDspn& params, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::InvalidConfig, "cannot write '" + path.string() + "'");
  out << params_to_json(params).dump(1) << '\n';
}

TrainableDspn load_params(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidConfig, "cannot open '" + path.string() + "'");
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::CorruptFile, "'" + path.string() + "' is not valid JSON");
  return params_from_json(j);
}

namespace {

// Scene ids with a file of the given role in `dir`, ascending.
std::vector<int> find_scenes(const fs::path& dir, const std::string& role) {
  if (!fs::is_directory(dir)) throw Error(Errc::InvalidConfig, "'" + dir.string() + "' is not a directory");
  const std::regex pattern("scene_([0-9]+)_" + role + "\\.grd");
  std::vector<int> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) ids.push_back(std::stoi(m[1].str()));
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) {
    throw Error(Errc::InvalidConfig, "no scene_*_" + role + ".grd files in '" + dir.string() + "'");
  }
  return ids;
}

std::ostream& open_csv(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty()) return fallback;
  file.open(path, std::ios::binary);
  if (!file) throw Error(Errc::InvalidConfig, "cannot write '" + path + "'");
  return file;
}

int run_generate(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = cfg.io.output_dir;
  fs::create_directories(dir);
  const auto suite = make_suite(cfg.suite);
  for (const PreparedScene& s : suite) {
    write_grd(s.truth, scene_file(dir, s.id, "truth"));
    write_grd(s.sparse, scene_file(dir, s.id, "sparse"));
    write_grd(s.mask, scene_file(dir, s.id, "mask"));
    write_grd(s.coarse, scene_file(dir, s.id, "coarse"));
    if (cfg.io.write_pgm) {
      std::string pgm = scene_file(dir, s.id, "sparse");
      pgm.replace(pgm.size() - 4, 4, ".pgm");
      write_pgm16(s.sparse, pgm);
    }
  }
  log << "generated " << suite.size() << " scenes in " << dir.string() << '\n';
  return 0;
}

int run_complete(const RunConfig& cfg, std::ostream& log) {
  const fs::path in = cfg.io.input_dir;
  const fs::path out = cfg.io.output_dir;
  fs::create_directories(out);

  TrainableDspn params;
  if (cfg.refine.method == RefineMethod::Dspn) {
    if (!cfg.io.params.empty()) {
      params = load_params(cfg.io.params);
    } else {
      log << "training dspn (" << cfg.train.suite.scenes << " scenes, " << cfg.train.fit.steps << " steps)\n";
      params = train_dspn(make_suite(cfg.train.suite), cfg.train, cfg.refine.kernel, cfg.refine.iters,
                          cfg.refine.use_confidence);
    }
    if (params.emb.feature_dim != cfg.suite.feature_dim) {
      throw Error(Errc::InvalidConfig, "parameters expect a different feature dimension");
    }
    if (!cfg.io.save_params.empty()) save_params(params, cfg.io.save_params);
  }

  const auto ids = find_scenes(in, "coarse");
  for (int id : ids) {
    PreparedScene s;
    s.id = id;
    s.coarse = read_grd(scene_file(in, id, "coarse"));
    s.sparse = read_grd(scene_file(in, id, "sparse"));
    s.mask = read_grd(scene_file(in, id, "mask"));
    require_same_shape(s.coarse, s.sparse, "complete");
    require_same_shape(s.coarse, s.mask, "complete");
    s.features = build_features(s.coarse, s.mask, cfg.suite.feature_dim);
    s.confidence = heuristic_confidence(s.sparse, s.mask, cfg.suite.confidence);
    const Grid refined = refine_scene(s, cfg.refine, cfg.refine.method == RefineMethod::Dspn ? &params : nullptr);
    write_grd(refined, scene_file(out, id, "refined"));

    const fs::path truth_path = scene_file(in, id, "truth");
    if (fs::exists(truth_path)) {
      const Grid truth = read_grd(truth_path);
      require_same_shape(truth, refined, "complete");
      Grid error(truth.width(), truth.height(), 1);
      for (std::size_t i = 0; i < error.size(); ++i) {
        if (truth.values()[i] > 0.0) error.values()[i] = refined.values()[i] - truth.values()[i];
      }
      write_grd(error, scene_file(out, id, "error"));
    }
  }
  log << "refined " << ids.size() << " scenes with " << to_string(cfg.refine.method) << '\n';
  return 0;
}

int run_eval(const RunConfig& cfg, std::ostream& out) {
  const fs::path pred_dir = cfg.io.input_dir;
  const fs::path truth_dir = cfg.io.truth_dir.empty() ? pred_dir : fs::path(cfg.io.truth_dir);
  const auto ids = find_scenes(truth_dir, "truth");
  std::vector<MetricReport> reports;
  for (int id : ids) {
    const fs::path pred = scene_file(pred_dir, id, cfg.io.pred_suffix);
    if (!fs::exists(pred)) throw Error(Errc::InvalidConfig, "missing prediction '" + pred.string() + "'");
    reports.push_back(eval_metrics(read_grd(pred), read_grd(scene_file(truth_dir, id, "truth"))));
  }
  std::ofstream file;
  write_eval_csv(open_csv(cfg.io.csv, file, out), ids, reports);
  return 0;
}

int run_gradcheck_mode(const RunConfig& cfg, std::ostream& out) {
  const GradcheckSummary s = run_gradcheck(cfg.gradcheck);
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %14s %14s\n", "group", "max_rel_err", "max_abs_err");
  out << line;
  for (const GradReport& g : s.groups) {
    std::snprintf(line, sizeof line, "%-20s %14.6e %14.6e\n", g.group.c_str(), g.max_rel_error, g.max_abs_error);
    out << line;
  }
  std::snprintf(line, sizeof line, "%d instances, max relative error %.6e (tolerance %.1e): %s\n", s.instances,
                s.max_rel_error, cfg.gradcheck.tolerance, s.passed ? "PASS" : "FAIL");
  out << line;
  return s.passed ? 0 : 1;
}

int run_ablate(const RunConfig& cfg, std::ostream& out) {
  AblationConfig a;
  a.eval = cfg.suite;
  a.train = cfg.train;
  a.methods = cfg.ablate_methods;
  a.iters = cfg.ablate_iters;
  a.kernels = cfg.ablate_kernels;
  const auto rows = run_ablation(a);
  std::ofstream file;
  write_ablation_csv(open_csv(cfg.io.csv, file, out), rows);
  return 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  cfg.validate();
  switch (cfg.mode) {
    case RunMode::Generate: return run_generate(cfg, log);
    case RunMode::Complete: return run_complete(cfg, log);
    case RunMode::Eval: return run_eval(cfg, out);
    case RunMode::Gradcheck: return run_gradcheck_mode(cfg, out);
    case RunMode::Ablate: return run_ablate(cfg, out);
  }
  return 2;
}

}  // namespace dspn
