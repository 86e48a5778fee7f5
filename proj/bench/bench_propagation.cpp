// Times the OpenMP propagation kernels against the serial scalar reference.
//
//   bench_propagation [size=256] [iters=12] [repeats=3]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "dspn/cspn.hpp"
#include "dspn/dspn.hpp"
#include "dspn/parallel.hpp"
#include "dspn/rng.hpp"
#include "reference/scalar_reference.hpp"

using namespace dspn;

namespace {

double seconds(const std::function<void()>& fn, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

Grid random_grid(int w, int h, int c, Rng& rng, double lo, double hi) {
  Grid g(w, h, c);
  for (double& v : g.values()) v = rng.uniform(lo, hi);
  return g;
}

double max_diff(const Grid& a, const Grid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 256;
  const int iters = argc > 2 ? std::atoi(argv[2]) : 12;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
  const int k = 3, df = 16, de = 16;
  const int threads = configure_threads_from_env();

  Rng rng(7);
  const Grid d0 = random_grid(n, n, 1, rng, 1.0, 10.0);
  const Grid ds = random_grid(n, n, 1, rng, 1.0, 10.0);
  Grid mask(n, n, 1);
  for (double& v : mask.values()) v = rng.bernoulli(0.05) ? 1.0 : 0.0;
  const Grid conf = random_grid(n, n, 1, rng, 0.0, 1.0);
  const Grid feat = random_grid(n, n, df, rng, 0.0, 1.0);
  const OffsetField offsets(k, random_grid(n, n, 2 * (k * k - 1), rng, -1.0, 1.0));
  const EmbeddingParams emb = EmbeddingParams::random(de, df, 3);
  const Grid raw = random_grid(n, n, k * k - 1, rng, 0.0, 1.0);
  const AffinityStencilField stencils(k, raw);
  const ref::Embedding ref_emb{de, df, emb.theta, emb.phi};

  std::printf("grid %dx%d, %d iterations, k=%d, d_F=%d, %d thread(s) available\n", n, n, iters, k, df, threads);

  Grid fast, serial, scalar;
  set_thread_count(threads);
  const double t_cspn = seconds([&] { fast = cspn_refine(d0, ds, mask, stencils, iters); }, repeats);
  set_thread_count(1);
  const double t_cspn1 = seconds([&] { serial = cspn_refine(d0, ds, mask, stencils, iters); }, repeats);
  const double t_cspn_ref = seconds([&] { scalar = ref::cspn_refine(d0, ds, mask, raw, k, iters); }, 1);
  std::printf("cspn_refine  openmp %8.4f s   1 thread %8.4f s   scalar reference %8.4f s   max |diff| %.3g\n",
              t_cspn, t_cspn1, t_cspn_ref, max_diff(fast, scalar));

  set_thread_count(threads);
  const double t_dspn = seconds([&] { fast = dspn_refine(d0, ds, mask, conf, feat, offsets, emb, iters); }, repeats);
  set_thread_count(1);
  const double t_dspn1 =
      seconds([&] { serial = dspn_refine(d0, ds, mask, conf, feat, offsets, emb, iters); }, repeats);
  const double t_dspn_ref =
      seconds([&] { scalar = ref::dspn_refine(d0, ds, mask, conf, feat, offsets.data(), ref_emb, k, iters); }, 1);
  std::printf("dspn_refine  openmp %8.4f s   1 thread %8.4f s   scalar reference %8.4f s   max |diff| %.3g\n",
              t_dspn, t_dspn1, t_dspn_ref, max_diff(fast, scalar));
  return 0;
}
