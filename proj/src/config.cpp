#include "dspn/config.hpp"

#include <algorithm>
#include <fstream>

#include "dspn/error.hpp"

namespace dspn {

using nlohmann::json;

RunMode parse_run_mode(const std::string& name) {
  if (name == "generate") return RunMode::Generate;
  if (name == "complete") return RunMode::Complete;
  if (name == "eval") return RunMode::Eval;
  if (name == "gradcheck") return RunMode::Gradcheck;
  if (name == "ablate") return RunMode::Ablate;
  throw Error(Errc::InvalidConfig, "unknown mode '" + name + "'");
}

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Generate: return "generate";
    case RunMode::Complete: return "complete";
    case RunMode::Eval: return "eval";
    case RunMode::Gradcheck: return "gradcheck";
    case RunMode::Ablate: return "ablate";
  }
  return "unknown";
}

namespace {

json scene_json(const SceneSpec& s) {
  return {{"kind", to_string(s.kind)}, {"width", s.width},         {"height", s.height},
          {"depth_min", s.depth_min},  {"depth_max", s.depth_max}, {"seed", s.seed}};
}

json sparse_json(const SparseSpec& s) {
  return {{"density", s.density},
          {"noise_sigma", s.noise_sigma},
          {"outlier_fraction", s.outlier_fraction},
          {"outlier_sigma", s.outlier_sigma},
          {"seed", s.seed}};
}

json suite_json(const SuiteConfig& s) {
  return {{"scenes", s.scenes},
          {"feature_dim", s.feature_dim},
          {"gamma", s.confidence.gamma},
          {"min_window_samples", s.confidence.min_window_samples},
          {"max_window_radius", s.confidence.max_window_radius},
          {"scene", scene_json(s.scene)},
          {"sparse", sparse_json(s.sparse)}};
}

// Reads keys from an object, remembering which were consumed so leftovers can
// be reported.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(Errc::InvalidConfig, "'" + path_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    const auto it = j_.find(key);
    seen_.emplace_back(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidConfig, "bad value for '" + full(key) + "': " + e.what());
    }
  }

  Reader child(const char* key) {
    seen_.emplace_back(key);
    const auto it = j_.find(key);
    static const json empty = json::object();
    return Reader(it == j_.end() ? empty : *it, full(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        throw Error(Errc::InvalidConfig, "unknown config key '" + full(it.key()) + "'");
      }
    }
  }

 private:
  std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

void read_scene(Reader r, SceneSpec& s) {
  std::string kind = to_string(s.kind);
  r.get("kind", kind);
  s.kind = parse_scene_kind(kind);
  r.get("width", s.width);
  r.get("height", s.height);
  r.get("depth_min", s.depth_min);
  r.get("depth_max", s.depth_max);
  r.get("seed", s.seed);
  r.finish();
}

void read_sparse(Reader r, SparseSpec& s) {
  r.get("density", s.density);
  r.get("noise_sigma", s.noise_sigma);
  r.get("outlier_fraction", s.outlier_fraction);
  r.get("outlier_sigma", s.outlier_sigma);
  r.get("seed", s.seed);
  r.finish();
}

void read_suite(Reader r, SuiteConfig& s) {
  r.get("scenes", s.scenes);
  r.get("feature_dim", s.feature_dim);
  r.get("gamma", s.confidence.gamma);
  r.get("min_window_samples", s.confidence.min_window_samples);
  r.get("max_window_radius", s.confidence.max_window_radius);
  read_scene(r.child("scene"), s.scene);
  read_sparse(r.child("sparse"), s.sparse);
  r.finish();
}

}  // namespace

json to_json(const RunConfig& cfg) {
  std::vector<std::string> methods;
  for (RefineMethod m : cfg.ablate_methods) methods.emplace_back(to_string(m));
  const FitOptions& fit = cfg.train.fit;
  const GradcheckConfig& g = cfg.gradcheck;
  return {
      {"mode", to_string(cfg.mode)},
      {"refine",
       {{"method", to_string(cfg.refine.method)},
        {"kernel", cfg.refine.kernel},
        {"iters", cfg.refine.iters},
        {"use_confidence", cfg.refine.use_confidence}}},
      {"suite", suite_json(cfg.suite)},
      {"train",
       {{"suite", suite_json(cfg.train.suite)},
        {"lr", fit.lr},
        {"steps", fit.steps},
        {"batch_size", fit.batch_size},
        {"seed", fit.seed},
        {"train_offsets", fit.train_offsets},
        {"train_embedding", fit.train_embedding},
        {"embed_dim", cfg.train.embed_dim},
        {"hidden", cfg.train.hidden},
        {"init_seed", cfg.train.init_seed}}},
      {"loss", {{"lambda", fit.weights.lambda}, {"alpha", fit.weights.alpha}, {"beta", fit.weights.beta}}},
      {"gradcheck",
       {{"instances", g.instances},
        {"size", g.size},
        {"feature_dim", g.feature_dim},
        {"embed_dim", g.embed_dim},
        {"hidden", g.hidden},
        {"kernel", g.kernel},
        {"iters", g.iters},
        {"eps", g.eps},
        {"tolerance", g.tolerance},
        {"seed", g.seed}}},
      {"ablate", {{"methods", methods}, {"iters", cfg.ablate_iters}, {"kernels", cfg.ablate_kernels}}},
      {"io",
       {{"input_dir", cfg.io.input_dir},
        {"output_dir", cfg.io.output_dir},
        {"truth_dir", cfg.io.truth_dir},
        {"pred_suffix", cfg.io.pred_suffix},
        {"csv", cfg.io.csv},
        {"params", cfg.io.params},
        {"save_params", cfg.io.save_params},
        {"write_pgm", cfg.io.write_pgm}}},
  };
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  Reader root(j, "");

  std::string mode = to_string(cfg.mode);
  root.get("mode", mode);
  cfg.mode = parse_run_mode(mode);

  {
    Reader r = root.child("refine");
    std::string method = to_string(cfg.refine.method);
    r.get("method", method);
    cfg.refine.method = parse_refine_method(method);
    r.get("kernel", cfg.refine.kernel);
    r.get("iters", cfg.refine.iters);
    r.get("use_confidence", cfg.refine.use_confidence);
    r.finish();
  }

  read_suite(root.child("suite"), cfg.suite);

  {
    Reader r = root.child("train");
    read_suite(r.child("suite"), cfg.train.suite);
    FitOptions& fit = cfg.train.fit;
    r.get("lr", fit.lr);
    r.get("steps", fit.steps);
    r.get("batch_size", fit.batch_size);
    r.get("seed", fit.seed);
    r.get("train_offsets", fit.train_offsets);
    r.get("train_embedding", fit.train_embedding);
    r.get("embed_dim", cfg.train.embed_dim);
    r.get("hidden", cfg.train.hidden);
    r.get("init_seed", cfg.train.init_seed);
    r.finish();
  }

  {
    Reader r = root.child("loss");
    r.get("lambda", cfg.train.fit.weights.lambda);
    r.get("alpha", cfg.train.fit.weights.alpha);
    r.get("beta", cfg.train.fit.weights.beta);
    r.finish();
  }

  {
    Reader r = root.child("gradcheck");
    GradcheckConfig& g = cfg.gradcheck;
    r.get("instances", g.instances);
    r.get("size", g.size);
    r.get("feature_dim", g.feature_dim);
    r.get("embed_dim", g.embed_dim);
    r.get("hidden", g.hidden);
    r.get("kernel", g.kernel);
    r.get("iters", g.iters);
    r.get("eps", g.eps);
    r.get("tolerance", g.tolerance);
    r.get("seed", g.seed);
    r.finish();
  }

  {
    Reader r = root.child("ablate");
    std::vector<std::string> methods;
    for (RefineMethod m : cfg.ablate_methods) methods.emplace_back(to_string(m));
    r.get("methods", methods);
    cfg.ablate_methods.clear();
    for (const auto& m : methods) cfg.ablate_methods.push_back(parse_refine_method(m));
    r.get("iters", cfg.ablate_iters);
    r.get("kernels", cfg.ablate_kernels);
    r.finish();
  }

  {
    Reader r = root.child("io");
    r.get("input_dir", cfg.io.input_dir);
    r.get("output_dir", cfg.io.output_dir);
    r.get("truth_dir", cfg.io.truth_dir);
    r.get("pred_suffix", cfg.io.pred_suffix);
    r.get("csv", cfg.io.csv);
    r.get("params", cfg.io.params);
    r.get("save_params", cfg.io.save_params);
    r.get("write_pgm", cfg.io.write_pgm);
    r.finish();
  }

  root.finish();
  return cfg;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(Errc::InvalidConfig, "override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  std::string pointer;
  std::size_t start = 0;
  while (start <= key.size()) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(Errc::InvalidConfig, "empty component in key '" + key + "'");
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }

  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  doc[json::json_pointer(pointer)] = std::move(value);
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidConfig, what);
}

void validate_suite(const SuiteConfig& s, const std::string& name) {
  require(s.scenes >= 1, name + ".scenes must be >= 1");
  require(s.feature_dim >= 1, name + ".feature_dim must be >= 1");
  require(s.confidence.gamma > 0.0, name + ".gamma must be > 0");
  require(s.confidence.min_window_samples >= 1, name + ".min_window_samples must be >= 1");
  require(s.confidence.max_window_radius >= 1, name + ".max_window_radius must be >= 1");
  s.scene.validate();
  s.sparse.validate();
}

}  // namespace

void RunConfig::validate() const {
  require_kernel(refine.kernel);
  require(refine.iters >= 0, "refine.iters must be >= 0");
  validate_suite(suite, "suite");
  validate_suite(train.suite, "train.suite");
  require(train.suite.feature_dim == suite.feature_dim, "train.suite.feature_dim must equal suite.feature_dim");
  require(train.fit.lr >= 0.0, "train.lr must be >= 0");
  require(train.fit.steps >= 1, "train.steps must be >= 1");
  require(train.fit.batch_size >= 0, "train.batch_size must be >= 0");
  require(train.embed_dim >= 1 && train.hidden >= 1, "train.embed_dim and train.hidden must be >= 1");
  const LossWeights& w = train.fit.weights;
  require(w.lambda >= 0.0 && w.alpha >= 0.0 && w.beta >= 0.0, "loss weights must be >= 0");
  require(gradcheck.instances >= 1, "gradcheck.instances must be >= 1");
  require(gradcheck.size >= 4, "gradcheck.size must be >= 4");
  require(gradcheck.feature_dim >= 1 && gradcheck.embed_dim >= 1 && gradcheck.hidden >= 1,
          "gradcheck dimensions must be >= 1");
  require_kernel(gradcheck.kernel);
  require(gradcheck.iters >= 1, "gradcheck.iters must be >= 1");
  require(gradcheck.eps > 0.0 && gradcheck.tolerance > 0.0, "gradcheck.eps and tolerance must be > 0");
  require(!ablate_iters.empty() && !ablate_kernels.empty(), "ablate.iters and ablate.kernels must be non-empty");
  for (int it : ablate_iters) require(it >= 0, "ablate.iters entries must be >= 0");
  for (int k : ablate_kernels) require_kernel(k);
  require(!io.pred_suffix.empty(), "io.pred_suffix must be non-empty");
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json doc = to_json(RunConfig{});
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::InvalidConfig, "cannot open config '" + path + "'");
    json file = json::parse(in, nullptr, false);
    if (file.is_discarded()) throw Error(Errc::InvalidConfig, "config '" + path + "' is not valid JSON");
    doc.merge_patch(file);
  }
  for (const auto& o : overrides) apply_override(doc, o);
  RunConfig cfg = config_from_json(doc);
  cfg.validate();
  return cfg;
}

}  // namespace dspn
