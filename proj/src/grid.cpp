#include "dspn/grid.hpp"

#include <algorithm>
#include <string>

namespace dspn {

Grid::Grid(int width, int height, int channels, double fill) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw Error(Errc::InvalidGrid, "grid dimensions must be positive");
  }
  width_ = width;
  height_ = height;
  channels_ = channels;
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Grid::Grid(int width, int height, int channels, std::vector<double> data) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw Error(Errc::InvalidGrid, "grid dimensions must be positive");
  }
  if (data.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(Errc::InvalidGrid, "data length does not match width*height*channels");
  }
  width_ = width;
  height_ = height;
  channels_ = channels;
  data_ = std::move(data);
}

double Grid::min_value() const {
  if (data_.empty()) throw Error(Errc::InvalidGrid, "min of empty grid");
  return *std::min_element(data_.begin(), data_.end());
}

double Grid::max_value() const {
  if (data_.empty()) throw Error(Errc::InvalidGrid, "max of empty grid");
  return *std::max_element(data_.begin(), data_.end());
}

bool Grid::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_extent(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_extent(b)) {
    throw Error(Errc::ShapeMismatch,
                std::string(what) + ": " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  require_same_extent(a, b, what);
  if (a.channels() != b.channels()) {
    throw Error(Errc::ShapeMismatch, std::string(what) + ": channel count differs");
  }
}

void require_single_channel(const Grid& g, const char* what) {
  if (g.empty()) throw Error(Errc::InvalidGrid, std::string(what) + ": empty grid");
  if (g.channels() != 1) {
    throw Error(Errc::ShapeMismatch, std::string(what) + ": expected a single-channel grid");
  }
}

double bilinear_sample(const Grid& g, ContinuousPos p, int c) {
  if (g.empty()) throw Error(Errc::InvalidGrid, "sampling an empty grid");
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw Error(Errc::InvalidPosition, "non-finite sample position");
  }
  if (c < 0 || c >= g.channels()) throw Error(Errc::InvalidGrid, "channel out of range");
  return sample_tap(g, bilinear_tap(g.width(), g.height(), p), c);
}

void require_kernel(int kernel) {
  if (kernel < 3 || kernel % 2 == 0) {
    throw Error(Errc::InvalidConfig, "kernel size must be odd and >= 3");
  }
}

int neighbor_count(int kernel) { return kernel * kernel - 1; }

std::vector<RingOffset> ring_offsets(int kernel) {
  require_kernel(kernel);
  const int r = kernel / 2;
  std::vector<RingOffset> out;
  out.reserve(static_cast<std::size_t>(neighbor_count(kernel)));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx == 0 && dy == 0) continue;
      out.push_back({dx, dy});
    }
  }
  return out;
}

}  // namespace dspn
