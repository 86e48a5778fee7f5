#include "reference/scalar_reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ref {

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

double at(const Grid& g, int x, int y, int c = 0) {
  return g.values()[(static_cast<std::size_t>(clampi(y, 0, g.height() - 1)) * g.width() +
                     clampi(x, 0, g.width() - 1)) *
                        g.channels() +
                    c];
}

void put(Grid& g, int x, int y, int c, double v) {
  g.values()[(static_cast<std::size_t>(y) * g.width() + x) * g.channels() + c] = v;
}

struct Offset {
  int dx, dy;
};

std::vector<Offset> ring(int k) {
  std::vector<Offset> out;
  const int r = k / 2;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx != 0 || dy != 0) out.push_back({dx, dy});
  return out;
}

std::vector<double> embed(const std::vector<double>& mat, int de, int df, const std::vector<double>& v) {
  std::vector<double> out(de, 0.0);
  for (int e = 0; e < de; ++e)
    for (int d = 0; d < df; ++d) out[e] += mat[e * df + d] * v[d];
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double bilinear(const Grid& g, double x, double y, int c) {
  const double xf = std::floor(x), yf = std::floor(y);
  const double fx = x - xf, fy = y - yf;
  const int x0 = static_cast<int>(xf), y0 = static_cast<int>(yf);
  const double v00 = at(g, x0, y0, c), v10 = at(g, x0 + 1, y0, c);
  const double v01 = at(g, x0, y0 + 1, c), v11 = at(g, x0 + 1, y0 + 1, c);
  return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 + (1 - fx) * fy * v01 + fx * fy * v11;
}

Grid cspn_step(const Grid& h, const Grid& raw, int k) {
  const auto nb = ring(k);
  Grid out(h.width(), h.height(), 1);
  for (int y = 0; y < h.height(); ++y) {
    for (int x = 0; x < h.width(); ++x) {
      double denom = 0.0;
      for (std::size_t n = 0; n < nb.size(); ++n) denom += std::abs(at(raw, x, y, static_cast<int>(n)));
      if (denom == 0.0) {
        put(out, x, y, 0, at(h, x, y));
        continue;
      }
      double sum_kappa = 0.0, acc = 0.0;
      for (std::size_t n = 0; n < nb.size(); ++n) {
        const double kappa = at(raw, x, y, static_cast<int>(n)) / denom;
        sum_kappa += kappa;
        acc += kappa * at(h, x + nb[n].dx, y + nb[n].dy);
      }
      put(out, x, y, 0, (1.0 - sum_kappa) * at(h, x, y) + acc);
    }
  }
  return out;
}

Grid hard_replace(const Grid& h, const Grid& hs, const Grid& m) {
  Grid out = h;
  for (int y = 0; y < h.height(); ++y)
    for (int x = 0; x < h.width(); ++x)
      if (at(m, x, y) == 1.0) put(out, x, y, 0, at(hs, x, y));
  return out;
}

Grid cspn_refine(const Grid& d0, const Grid& ds, const Grid& m, const Grid& raw, int k, int iters) {
  Grid h = d0;
  for (int t = 0; t < iters; ++t) h = hard_replace(cspn_step(h, raw, k), ds, m);
  return h;
}

std::vector<double> affinity(const Grid& f, const Grid& offsets, const Embedding& emb, int k, int x, int y) {
  const auto nb = ring(k);
  const int df = f.channels();
  std::vector<double> center(df);
  for (int c = 0; c < df; ++c) center[c] = at(f, x, y, c);
  const auto q = embed(emb.theta, emb.de, df, center);
  const double scale = 1.0 / std::sqrt(static_cast<double>(df));

  std::vector<double> e(nb.size() + 1);
  for (std::size_t n = 0; n < nb.size(); ++n) {
    const double px = x + nb[n].dx + at(offsets, x, y, static_cast<int>(2 * n));
    const double py = y + nb[n].dy + at(offsets, x, y, static_cast<int>(2 * n + 1));
    std::vector<double> sampled(df);
    for (int c = 0; c < df; ++c) sampled[c] = bilinear(f, px, py, c);
    e[n] = std::exp(dot(q, embed(emb.phi, emb.de, df, sampled)) * scale);
  }
  e.back() = std::exp(dot(q, embed(emb.phi, emb.de, df, center)) * scale);
  double z = 0.0;
  for (double v : e) z += v;
  for (double& v : e) v /= z;
  return e;
}

Grid dspn_step(const Grid& h, const Grid& f, const Grid& offsets, const Embedding& emb, int k) {
  const auto nb = ring(k);
  Grid out(h.width(), h.height(), 1);
  for (int y = 0; y < h.height(); ++y) {
    for (int x = 0; x < h.width(); ++x) {
      const auto w = affinity(f, offsets, emb, k, x, y);
      double acc = w.back() * at(h, x, y);
      for (std::size_t n = 0; n < nb.size(); ++n) {
        const double px = x + nb[n].dx + at(offsets, x, y, static_cast<int>(2 * n));
        const double py = y + nb[n].dy + at(offsets, x, y, static_cast<int>(2 * n + 1));
        acc += w[n] * bilinear(h, px, py, 0);
      }
      put(out, x, y, 0, acc);
    }
  }
  return out;
}

Grid soft_replace(const Grid& h, const Grid& hs, const Grid& m, const Grid& conf) {
  Grid out(h.width(), h.height(), 1);
  for (int y = 0; y < h.height(); ++y) {
    for (int x = 0; x < h.width(); ++x) {
      const double w = at(m, x, y) * at(conf, x, y);
      put(out, x, y, 0, (1.0 - w) * at(h, x, y) + w * at(hs, x, y));
    }
  }
  return out;
}

Grid dspn_refine(const Grid& d0, const Grid& ds, const Grid& m, const Grid& conf, const Grid& f,
                 const Grid& offsets, const Embedding& emb, int k, int iters) {
  Grid h = d0;
  for (int t = 0; t < iters; ++t) h = soft_replace(dspn_step(h, f, offsets, emb, k), ds, m, conf);
  return h;
}

Grid box_mean3(const Grid& g) {
  Grid out(g.width(), g.height(), 1);
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) s += at(g, x + dx, y + dy);
      put(out, x, y, 0, s / 9.0);
    }
  }
  return out;
}

Grid coarse_predict(const Grid& ds, const Grid& m) {
  Grid fill(ds.width(), ds.height(), 1);
  for (int y = 0; y < ds.height(); ++y) {
    for (int x = 0; x < ds.width(); ++x) {
      long best = std::numeric_limits<long>::max();
      double value = 0.0;
      for (int sy = 0; sy < ds.height(); ++sy) {
        for (int sx = 0; sx < ds.width(); ++sx) {
          if (at(m, sx, sy) != 1.0) continue;
          const long d = static_cast<long>(sx - x) * (sx - x) + static_cast<long>(sy - y) * (sy - y);
          if (d < best) {
            best = d;
            value = at(ds, sx, sy);
          }
        }
      }
      put(fill, x, y, 0, value);
    }
  }
  return box_mean3(box_mean3(fill));
}

}  // namespace ref
