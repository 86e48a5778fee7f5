// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "dspn/confidence.hpp"
#include "dspn/cspn.hpp"
#include "dspn/dspn.hpp"
#include "dspn/experiment.hpp"
#include "dspn/gradcheck.hpp"
#include "dspn/io.hpp"
#include "dspn/metrics.hpp"
#include "dspn/parallel.hpp"
#include "dspn/rng.hpp"
#include "reference/scalar_reference.hpp"

using namespace dspn;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s -- %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Grid random_grid(int w, int h, int c, Rng& rng, double lo, double hi) {
  Grid g(w, h, c);
  for (double& v : g.values()) v = rng.uniform(lo, hi);
  return g;
}

Grid random_mask(int w, int h, Rng& rng, double p) {
  Grid g(w, h, 1);
  for (double& v : g.values()) v = rng.bernoulli(p) ? 1.0 : 0.0;
  return g;
}

double max_abs_diff(const Grid& a, const Grid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

ref::Embedding to_ref(const EmbeddingParams& e) { return {e.embed_dim, e.feature_dim, e.theta, e.phi}; }

void oracle_equivalence() {
  const auto t0 = Clock::now();
  double worst[4] = {0, 0, 0, 0};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    const int n = 5 + static_cast<int>(seed % 4);
    const int df = 1 + rng.below(4);
    const Grid h = random_grid(n, n, 1, rng, 1.0, 10.0);
    const Grid ds = random_grid(n, n, 1, rng, 1.0, 10.0);
    const Grid m = random_mask(n, n, rng, 0.3);
    const Grid conf = random_grid(n, n, 1, rng, 0.0, 1.0);
    const Grid raw = random_grid(n, n, 8, rng, -1.0, 1.0);
    const Grid feat = random_grid(n, n, df, rng, -1.0, 1.0);
    const OffsetField off(3, random_grid(n, n, 16, rng, -2.0, 2.0));
    const auto emb = EmbeddingParams::random(1 + rng.below(4), df, rng.next_u64(), 2.0);
    const AffinityStencilField st(3, raw);
    const int iters = 1 + rng.below(4);

    worst[0] = std::max(worst[0], max_abs_diff(cspn_step(h, st), ref::cspn_step(h, raw, 3)));
    worst[1] = std::max(worst[1], max_abs_diff(dspn_step(h, feat, off, emb),
                                               ref::dspn_step(h, feat, off.data(), to_ref(emb), 3)));
    worst[2] = std::max(worst[2], max_abs_diff(cspn_refine(h, ds, m, st, iters),
                                               ref::cspn_refine(h, ds, m, raw, 3, iters)));
    worst[3] = std::max(worst[3], max_abs_diff(dspn_refine(h, ds, m, conf, feat, off, emb, iters),
                                               ref::dspn_refine(h, ds, m, conf, feat, off.data(), to_ref(emb), 3,
                                                                iters)));
  }
  const double secs = since(t0);
  const double w = *std::max_element(worst, worst + 4);
  report(1, "oracle equivalence", w <= 1e-12 && secs < 10.0,
         fmt("max |diff| cspn_step %.2e dspn_step %.2e cspn_refine %.2e dspn_refine %.2e over 100 seeds each, "
             "%.2f s",
             worst[0], worst[1], worst[2], worst[3], secs));
}

void invariant_suite() {
  long violations[6] = {0, 0, 0, 0, 0, 0};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(50000 + seed);
    const int n = 5 + rng.below(4);
    const int df = 1 + rng.below(4);

    // Affinity weights form a positive distribution.
    const Grid feat = random_grid(n, n, df, rng, -2.0, 2.0);
    const OffsetField off(3, random_grid(n, n, 16, rng, -3.0, 3.0));
    const auto emb = EmbeddingParams::random(1 + rng.below(4), df, rng.next_u64(), 3.0);
    const int x = rng.below(n), y = rng.below(n);
    const auto w = compute_affinity(feat, emb, x, y, deformed_neighborhood(x, y, off));
    double sum = w.self_weight;
    bool positive = w.self_weight > 0.0;
    for (double v : w.neighbor) sum += v, positive = positive && v > 0.0;
    if (!positive || std::abs(sum - 1.0) > 1e-9) ++violations[0];

    // Maximum principle of the deformable step.
    const Grid h = random_grid(n, n, 1, rng, -10.0, 10.0);
    const Grid out = dspn_step(h, feat, off, emb);
    const double lo = h.min_value(), hi = h.max_value();
    for (double v : out.values())
      if (v < lo || v > hi) ++violations[1];

    // Abs-normalized stencils.
    std::vector<double> raw(8);
    for (double& v : raw) v = rng.uniform(-5.0, 5.0);
    const auto s = normalize_stencil(raw);
    double sum_abs = 0.0;
    for (double v : s.neighbor) sum_abs += std::abs(v);
    if (std::abs(sum_abs - 1.0) > 1e-12) ++violations[2];

    // Hard replacement is bit exact at measured pixels.
    const Grid ds = random_grid(n, n, 1, rng, 0.0, 10.0);
    const Grid m = random_mask(n, n, rng, 0.4);
    const Grid hard = hard_replace(h, ds, m);
    for (std::size_t i = 0; i < hard.size(); ++i)
      if (m.values()[i] == 1.0 && hard.values()[i] != ds.values()[i]) ++violations[3];

    // Soft replacement stays between H and Hs.
    const Grid conf = random_grid(n, n, 1, rng, 0.0, 1.0);
    const Grid soft = soft_replace(h, ds, m, conf);
    for (std::size_t i = 0; i < soft.size(); ++i) {
      const double a = h.values()[i], b = ds.values()[i], o = soft.values()[i];
      if (o < std::min(a, b) || o > std::max(a, b)) ++violations[4];
    }

    // Confidence target range and the exp(-1) anchor at a residual of gamma.
    const double gamma = (1 + rng.below(16)) / 16.0;
    const double truth_v = (8 + rng.below(64)) / 8.0;
    const Grid truth(2, 1, 1, {truth_v, truth_v});
    const Grid sparse(2, 1, 1, {truth_v + gamma, rng.uniform(0.0, 20.0)});
    const Grid target = confidence_target(truth, sparse, Grid(2, 1, 1, 1.0), ConfidenceConfig{gamma});
    if (target.values()[0] != std::exp(-1.0)) ++violations[5];
    for (double v : target.values())
      if (v < 0.0 || v > 1.0) ++violations[5];
  }
  long total = 0;
  for (long v : violations) total += v;
  report(2, "invariant suite", total == 0,
         fmt("violations over 1000 instances: affinity %ld, max principle %ld, stencil norm %ld, hard replace %ld, "
             "soft replace %ld, confidence %ld",
             violations[0], violations[1], violations[2], violations[3], violations[4], violations[5]));
}

void gradient_verification() {
  const auto t0 = Clock::now();
  GradcheckConfig cfg;  // 20 instances, 8x8, d_F = 4, k = 3
  const auto s = run_gradcheck(cfg);
  const double secs = since(t0);
  std::string groups;
  for (const auto& g : s.groups) groups += fmt(" %s=%.1e", g.group.c_str(), g.max_rel_error);
  report(3, "gradient verification", s.passed && s.max_rel_error <= 1e-4 && secs < 60.0,
         fmt("max rel err %.2e over %d instances (%.1f s);%s", s.max_rel_error, s.instances, secs, groups.c_str()));
}

const AblationRow* find_row(const std::vector<AblationRow>& rows, const std::string& method, int iters) {
  for (const auto& r : rows)
    if (r.method == method && r.iters == iters) return &r;
  return nullptr;
}

void print_table(const std::vector<AblationRow>& rows) {
  std::printf("    %-10s %5s %5s %10s %10s %10s %10s\n", "method", "iters", "size", "rmse", "mae", "irmse", "imae");
  for (const auto& r : rows) {
    const std::string size = r.kernel > 0 ? fmt("%dx%d", r.kernel, r.kernel) : "-";
    const std::string iters = r.kernel > 0 ? fmt("%d", r.iters) : "-";
    std::printf("    %-10s %5s %5s %10.2f %10.2f %10.3f %10.3f\n", r.method.c_str(), iters.c_str(), size.c_str(),
                r.mean.rmse, r.mean.mae, r.mean.irmse, r.mean.imae);
  }
}

void experiments() {
  const auto t0 = Clock::now();
  AblationConfig cfg;
  cfg.eval = default_eval_suite();
  cfg.train = default_training();
  const auto rows = run_ablation(cfg);
  const double secs = since(t0);
  print_table(rows);

  const AblationRow* cspn12 = find_row(rows, "cspn", 12);
  const AblationRow* dspn3 = find_row(rows, "dspn", 3);
  const AblationRow* dspn12 = find_row(rows, "dspn", 12);
  if (!cspn12 || !dspn3 || !dspn12) {
    report(4, "ablation trend", false, "missing ablation rows");
    return;
  }
  const bool order = dspn3->mean.rmse < cspn12->mean.rmse;
  const bool flat = dspn12->mean.rmse <= dspn3->mean.rmse * 1.05;
  report(4, "ablation trend", order && flat && secs < 300.0,
         fmt("DSPN-3 %.2f < CSPN-12 %.2f: %s; DSPN-12 %.2f <= DSPN-3 + 5%% (%.2f): %s; %.1f s", dspn3->mean.rmse,
             cspn12->mean.rmse, order ? "yes" : "no", dspn12->mean.rmse, dspn3->mean.rmse * 1.05,
             flat ? "yes" : "no", secs));

  // Criteria 5 and 6 reuse the trained DSPN-3 refiner.
  const auto suite = make_suite(cfg.eval);
  const TrainableDspn& params = dspn3->params;
  int improved = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    if (dspn3->per_scene[i].rmse < eval_metrics(suite[i].coarse, suite[i].truth).rmse) ++improved;
  }
  const int n = static_cast<int>(suite.size());
  report(5, "refinement helps", improved * 10 >= n * 9,
         fmt("trained DSPN-3 beats the coarse depth on %d/%d scenes (need >= 90%%)", improved, n));

  const auto hard = evaluate_suite(suite, {RefineMethod::Dspn, 3, 3, false}, &params);
  int soft_wins = 0;
  double soft_mean = 0.0, hard_mean = 0.0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    soft_wins += dspn3->per_scene[i].rmse < hard[i].rmse;
    soft_mean += dspn3->per_scene[i].rmse / n;
    hard_mean += hard[i].rmse / n;
  }
  // Same comparison for the replacement-only baseline and fixed stencils, for
  // the record.
  auto wins = [&](const RefineSetup& soft_setup) {
    RefineSetup hard_setup = soft_setup;
    hard_setup.use_confidence = false;
    const auto s = evaluate_suite(suite, soft_setup);
    const auto h = evaluate_suite(suite, hard_setup);
    int w = 0;
    for (std::size_t i = 0; i < s.size(); ++i) w += s[i].rmse < h[i].rmse;
    return w;
  };
  report(6, "confidence helps under noise", soft_wins * 10 >= n * 8,
         fmt("soft (heuristic M) beats hard replacement on %d/%d scenes with trained DSPN-3 (need >= 80%%); "
             "mean rmse soft %.2f hard %.2f; baseline %d/%d, CSPN-3 %d/%d, CSPN-12 %d/%d",
             soft_wins, n, soft_mean, hard_mean, wins({RefineMethod::None, 3, 0, true}), n,
             wins({RefineMethod::Cspn, 3, 3, true}), n, wins({RefineMethod::Cspn, 3, 12, true}), n));
}

void toy_fit_boundary_scenes() {
  // Boundary-heavy training set: 50 step scenes, plain gradient descent from
  // the zero-offset initialization.
  const auto t0 = Clock::now();
  SuiteConfig suite = default_eval_suite();
  suite.scenes = 50;
  suite.scene = SceneSpec{SceneKind::Step, 16, 16, 1.0, 10.0, 300000};
  suite.sparse.seed = 310000;
  const auto scenes = make_suite(suite);
  std::vector<FitScene> fit;
  for (const auto& s : scenes) fit.push_back(to_fit_scene(s, true));
  const TrainableDspn init = TrainableDspn::make(suite.feature_dim, 16, 16, 3, 11);
  FitOptions opt;
  opt.lr = 0.2;
  opt.steps = 200;
  opt.iters = 3;
  const auto result = toy_fit(fit, init, opt);
  auto mean_rmse = [&](const TrainableDspn& p) {
    return mean_report(evaluate_suite(scenes, {RefineMethod::Dspn, 3, 3, true}, &p)).rmse;
  };
  const double before = mean_rmse(init), after = mean_rmse(result.params);
  const bool ok = after < before;
  std::printf("[%s] toy_fit: 50 step scenes, 200 steps: mean rmse %.2f -> %.2f (%.1f s)\n", ok ? "PASS" : "FAIL",
              before, after, since(t0));
  if (!ok) ++failures;
}

void metrics_fixtures() {
  bool ok = true;
  auto close = [&](double a, double b) { ok = ok && std::abs(a - b) <= 1e-9; };
  const auto zero = eval_metrics(Grid(2, 2, 1, {1, 2, 3, 4}), Grid(2, 2, 1, {1, 2, 3, 4}));
  close(zero.rmse, 0.0);
  close(zero.irmse, 0.0);
  const auto one = eval_metrics(Grid(1, 1, 1, 2.0), Grid(1, 1, 1, 1.0));
  close(one.rmse, 1000.0);
  close(one.mae, 1000.0);
  close(one.irmse, 500.0);
  close(one.imae, 500.0);
  const auto two = eval_metrics(Grid(2, 1, 1, {3.0, 1.0}), Grid(2, 1, 1, {2.0, 2.0}));
  close(two.mae, 1000.0);
  close(two.rmse, 1000.0);
  close(two.imae, 1000.0 * (std::abs(1.0 / 3.0 - 0.5) + 0.5) / 2.0);

  int order_violations = 0;
  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + rng.below(15);
    const Grid pred = random_grid(n, n, 1, rng, 0.1, 20.0);
    const Grid gt = random_grid(n, n, 1, rng, 0.1, 20.0);
    const auto r = eval_metrics(pred, gt);
    if (r.rmse < r.mae || r.irmse < r.imae) ++order_violations;
  }
  report(7, "metrics fixtures", ok && order_violations == 0,
         fmt("hand fixtures %s; rmse>=mae and irmse>=imae violations on 100 random grids: %d",
             ok ? "match to 1e-9" : "MISMATCH", order_violations));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void performance_and_io() {
  const int n = 256;
  Rng rng(5);
  const Grid d0 = random_grid(n, n, 1, rng, 1.0, 10.0);
  const Grid ds = random_grid(n, n, 1, rng, 1.0, 10.0);
  const Grid m = random_mask(n, n, rng, 0.05);
  const Grid conf = random_grid(n, n, 1, rng, 0.0, 1.0);
  const Grid feat = random_grid(n, n, 16, rng, 0.0, 1.0);
  const OffsetField off(3, random_grid(n, n, 16, rng, -1.0, 1.0));
  const auto emb = EmbeddingParams::random(16, 16, 3);

  const int threads = max_threads();
  set_thread_count(1);
  double best = 1e300;
  for (int r = 0; r < 3; ++r) {
    const auto t0 = Clock::now();
    const Grid out = dspn_refine(d0, ds, m, conf, feat, off, emb, 12);
    best = std::min(best, since(t0));
    if (!out.all_finite()) best = 1e300;
  }
  set_thread_count(threads);

  const auto dir = std::filesystem::temp_directory_path() / "dspn_acceptance";
  std::filesystem::create_directories(dir);
  Grid g = random_grid(37, 23, 2, rng, -1e3, 1e3);
  for (double& v : g.values()) v = static_cast<float>(v);
  write_grd(g, dir / "a.grd");
  const Grid g2 = read_grd(dir / "a.grd");
  write_grd(g2, dir / "b.grd");
  const bool grd_ok = g2 == g && slurp(dir / "a.grd") == slurp(dir / "b.grd");

  Grid depth(31, 17, 1);
  for (double& v : depth.values()) v = rng.below(65536) / 256.0;
  write_pgm16(depth, dir / "a.pgm");
  const auto img = read_pgm16(dir / "a.pgm");
  write_pgm16(img.depth, dir / "b.pgm");
  const bool pgm_ok = img.depth == depth && slurp(dir / "a.pgm") == slurp(dir / "b.pgm");

  report(8, "performance and file roundtrips", best < 1.0 && grd_ok && pgm_ok,
         fmt("12 DSPN iterations, k=3, 256x256, 1 thread: %.3f s (need < 1 s); GRD roundtrip %s; PGM roundtrip %s",
             best, grd_ok ? "bit-exact" : "MISMATCH", pgm_ok ? "bit-exact" : "MISMATCH"));
}

}  // namespace

int main() {
  configure_threads_from_env();
  const std::vector<std::function<void()>> steps{oracle_equivalence, invariant_suite, gradient_verification,
                                                 experiments,        metrics_fixtures, performance_and_io,
                                                 toy_fit_boundary_scenes};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      std::printf("[FAIL] unexpected error: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%s: %d failing check(s)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
