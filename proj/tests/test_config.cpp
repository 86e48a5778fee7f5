#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dspn/io.hpp"
#include "dspn/run.hpp"

using namespace dspn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dspn_config_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidState;
}

}  // namespace

TEST_CASE("defaults load and validate") {
  const RunConfig cfg = load_config("", {});
  CHECK(cfg.refine.kernel == 3);
  CHECK(cfg.refine.iters == 12);
  CHECK(cfg.suite.scenes == 50);
  CHECK(cfg.suite.confidence.gamma == 0.1);
  CHECK(cfg.train.fit.weights.lambda == 1.0);
  CHECK(config_from_json(to_json(cfg)).suite.sparse.outlier_fraction == cfg.suite.sparse.outlier_fraction);
}

TEST_CASE("overrides") {
  const RunConfig cfg = load_config(
      "", {"mode=ablate", "refine.iters=3", "suite.scene.kind=step", "train.lr=0.5", "ablate.iters=[1,2]",
           "refine.use_confidence=false"});
  CHECK(cfg.mode == RunMode::Ablate);
  CHECK(cfg.refine.iters == 3);
  CHECK(cfg.suite.scene.kind == SceneKind::Step);
  CHECK(cfg.train.fit.lr == 0.5);
  CHECK(cfg.ablate_iters == std::vector<int>{1, 2});
  CHECK_FALSE(cfg.refine.use_confidence);

  CHECK(code_of([] { load_config("", {"refine.itres=3"}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { load_config("", {"refine.iters"}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { load_config("", {"refine.iters=three"}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { load_config("", {"refine.kernel=4"}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { load_config("", {"suite.gamma=0"}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { load_config("", {"mode=train"}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { load_config("", {"suite.sparse.density=0"}); }) == Errc::InvalidSpec);
}

TEST_CASE("file values sit between defaults and overrides") {
  const fs::path dir = temp_dir("layering");
  const fs::path path = dir / "cfg.json";
  std::ofstream(path) << R"({"refine": {"iters": 6, "kernel": 5}, "suite": {"scenes": 7}})";
  const RunConfig cfg = load_config(path.string(), {"refine.iters=2"});
  CHECK(cfg.refine.iters == 2);
  CHECK(cfg.refine.kernel == 5);
  CHECK(cfg.suite.scenes == 7);
  CHECK(cfg.suite.scene.width == 64);
  std::ofstream(dir / "broken.json") << "{";
  CHECK(code_of([&] { load_config((dir / "broken.json").string(), {}); }) == Errc::InvalidConfig);
}

TEST_CASE("csv formatting") {
  CHECK(format_number(1013.5812345) == "1013.58");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(68.8125) == "68.8125");
  std::ostringstream os;
  MetricReport a, b;
  a.rmse = 1.0;
  a.mae = 2.0;
  b.rmse = 3.0;
  b.mae = 4.0;
  b.irmse = 0.5;
  write_eval_csv(os, {0, 4}, {a, b});
  CHECK(os.str() == "scene_id,rmse,mae,irmse,imae\n0,1,2,0,0\n4,3,4,0.5,0\nmean,2,3,0.25,0\n");

  std::ostringstream ab;
  write_ablation_csv(ab, {{"baseline", 0, 0, a, {}, {}}, {"dspn", 3, 3, b, {}, {}}});
  CHECK(ab.str() == "method,iters,kernel,rmse,mae,irmse,imae\nbaseline,,,1,2,0,0\ndspn,3,3x3,3,4,0.5,0\n");
}

TEST_CASE("parameter files roundtrip") {
  const TrainableDspn p = TrainableDspn::make(6, 4, 5, 3, 21);
  const fs::path path = temp_dir("params") / "p.json";
  save_params(p, path);
  const TrainableDspn q = load_params(path);
  CHECK(q.emb == p.emb);
  CHECK(q.estimator == p.estimator);
  std::ofstream(path) << R"({"embedding": {}})";
  CHECK(code_of([&] { load_params(path); }) == Errc::CorruptFile);
}

TEST_CASE("eval of exact predictions reports zeros") {
  const fs::path dir = temp_dir("eval");
  for (int id : {0, 3}) {
    Grid g(8, 8, 1, 2.0 + id);
    g.at(1, 1) = 0.0;
    write_grd(g, scene_file(dir, id, "truth"));
  }
  RunConfig cfg = load_config("", {"mode=eval", "io.input_dir=" + dir.string(), "io.pred_suffix=truth"});
  std::ostringstream out, log;
  CHECK(run(cfg, out, log) == 0);
  CHECK(out.str() == "scene_id,rmse,mae,irmse,imae\n0,0,0,0,0\n3,0,0,0,0\nmean,0,0,0,0\n");

  cfg.io.pred_suffix = "refined";
  CHECK(code_of([&] { run(cfg, out, log); }) == Errc::InvalidConfig);
}

TEST_CASE("generate then complete with fixed stencils") {
  const fs::path dir = temp_dir("pipeline");
  const std::vector<std::string> common{"suite.scenes=2", "suite.scene.width=16", "suite.scene.height=16",
                                        "io.input_dir=" + dir.string(), "io.output_dir=" + dir.string()};
  std::ostringstream out, log;
  auto with = [&](std::vector<std::string> extra) {
    extra.insert(extra.end(), common.begin(), common.end());
    return load_config("", extra);
  };
  CHECK(run(with({"mode=generate", "io.write_pgm=true"}), out, log) == 0);
  CHECK(fs::exists(scene_file(dir, 1, "coarse")));
  CHECK(fs::exists(dir / "scene_0001_sparse.pgm"));
  CHECK(run(with({"mode=complete", "refine.method=cspn", "refine.iters=3"}), out, log) == 0);
  const Grid refined = read_grd(scene_file(dir, 0, "refined"));
  const Grid error = read_grd(scene_file(dir, 0, "error"));
  const Grid truth = read_grd(scene_file(dir, 0, "truth"));
  for (std::size_t i = 0; i < truth.size(); ++i)
    CHECK(error.values()[i] == doctest::Approx(refined.values()[i] - truth.values()[i]).epsilon(1e-6));
  CHECK(run(with({"mode=eval"}), out, log) == 0);
  CHECK(out.str().find("mean,") != std::string::npos);
}
