#include "dspn/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dspn/cspn.hpp"

namespace dspn {

namespace {

void require_gamma(const ConfidenceConfig& cfg) {
  if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) {
    throw Error(Errc::InvalidConfig, "gamma must be a positive finite tolerance");
  }
}

}  // namespace

Grid confidence_target(const Grid& truth, const Grid& sparse, const Grid& mask,
                       const ConfidenceConfig& cfg) {
  require_gamma(cfg);
  require_same_shape(truth, sparse, "confidence_target sparse");
  require_same_shape(truth, mask, "confidence_target mask");
  require_binary_mask(mask);
  Grid out(truth.width(), truth.height(), truth.channels());
  auto o = out.values();
  auto t = truth.values();
  auto s = sparse.values();
  auto m = mask.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = m[i] == 1.0 ? std::exp(-std::abs(t[i] - s[i]) / cfg.gamma) : 0.0;
  }
  return out;
}

Grid soft_replace(const Grid& hidden, const Grid& sparse, const Grid& mask, const Grid& confidence) {
  require_same_shape(hidden, sparse, "soft_replace sparse");
  require_same_shape(hidden, mask, "soft_replace mask");
  require_same_shape(hidden, confidence, "soft_replace confidence");
  require_binary_mask(mask);
  for (double v : confidence.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::InvalidConfidence, "confidence outside [0,1]");
  }
  Grid out(hidden.width(), hidden.height(), hidden.channels());
  auto o = out.values();
  auto h = hidden.values();
  auto s = sparse.values();
  auto m = mask.values();
  auto c = confidence.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double w = m[i] * c[i];
    o[i] = (1.0 - w) * h[i] + w * s[i];
  }
  return out;
}

Grid heuristic_confidence(const Grid& sparse, const Grid& mask, const ConfidenceConfig& cfg) {
  require_gamma(cfg);
  require_single_channel(sparse, "heuristic_confidence");
  require_same_shape(sparse, mask, "heuristic_confidence mask");
  require_binary_mask(mask);
  if (cfg.min_window_samples < 1 || cfg.max_window_radius < 1) {
    throw Error(Errc::InvalidConfig, "heuristic window needs min samples >= 1 and radius >= 1");
  }
  Grid out(sparse.width(), sparse.height(), 1);
  std::vector<double> window;
  for (int y = 0; y < sparse.height(); ++y) {
    for (int x = 0; x < sparse.width(); ++x) {
      if (mask.at(x, y) != 1.0) continue;
      for (int r = 1; r <= cfg.max_window_radius; ++r) {
        window.clear();
        for (int ny = std::max(0, y - r); ny <= std::min(sparse.height() - 1, y + r); ++ny) {
          for (int nx = std::max(0, x - r); nx <= std::min(sparse.width() - 1, x + r); ++nx) {
            if (mask.at(nx, ny) == 1.0) window.push_back(sparse.at(nx, ny));
          }
        }
        if (static_cast<int>(window.size()) >= cfg.min_window_samples) break;
      }
      std::sort(window.begin(), window.end());
      const std::size_t n = window.size();
      const double median = n % 2 == 1 ? window[n / 2] : 0.5 * (window[n / 2 - 1] + window[n / 2]);
      out.at(x, y) = std::exp(-std::abs(sparse.at(x, y) - median) / cfg.gamma);
    }
  }
  return out;
}

}  // namespace dspn
