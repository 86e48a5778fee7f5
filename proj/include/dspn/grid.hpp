#pragma once

// Dense row-major grids and continuous sampling.
//
// Coordinates: x is the column index, y is the row index, origin at the
// top-left pixel. Storage order is (y, x, c). Reads outside the image clamp
// the integer source coordinate to the border.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dspn/error.hpp"

namespace dspn {

struct ContinuousPos {
  double x = 0.0;
  double y = 0.0;
};

class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, int channels = 1, double fill = 0.0);
  Grid(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  double& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  /// Border-clamped read.
  double clamped(int x, int y, int c = 0) const noexcept {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return data_[index(x, y, c)];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> pixel(int x, int y) const noexcept {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }
  std::span<double> pixel(int x, int y) noexcept {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }

  bool same_shape(const Grid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  bool same_extent(const Grid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  double min_value() const;
  double max_value() const;
  bool all_finite() const noexcept;

  bool operator==(const Grid& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Throws ShapeMismatch naming `what` unless both grids share width and height.
void require_same_extent(const Grid& a, const Grid& b, const char* what);
void require_same_shape(const Grid& a, const Grid& b, const char* what);
void require_single_channel(const Grid& g, const char* what);

/// Integer corners and fractional weights of one bilinear read.
struct BilinearTap {
  int x0, x1, y0, y1;
  double fx, fy;
};

inline BilinearTap bilinear_tap(int width, int height, ContinuousPos p) noexcept {
  const double fxf = std::floor(p.x);
  const double fyf = std::floor(p.y);
  BilinearTap t{};
  t.fx = p.x - fxf;
  t.fy = p.y - fyf;
  // Clamp in floating point first so far-away positions cannot overflow int.
  const double max_x = width - 1;
  const double max_y = height - 1;
  auto clamp_to = [](double v, double hi) { return v < 0.0 ? 0.0 : (v > hi ? hi : v); };
  t.x0 = static_cast<int>(clamp_to(fxf, max_x));
  t.x1 = static_cast<int>(clamp_to(fxf + 1.0, max_x));
  t.y0 = static_cast<int>(clamp_to(fyf, max_y));
  t.y1 = static_cast<int>(clamp_to(fyf + 1.0, max_y));
  return t;
}

/// Unchecked bilinear read through a precomputed tap.
inline double sample_tap(const Grid& g, const BilinearTap& t, int c) noexcept {
  const double v00 = g.at(t.x0, t.y0, c);
  const double v10 = g.at(t.x1, t.y0, c);
  const double v01 = g.at(t.x0, t.y1, c);
  const double v11 = g.at(t.x1, t.y1, c);
  const double top = v00 + t.fx * (v10 - v00);
  const double bottom = v01 + t.fx * (v11 - v01);
  return top + t.fy * (bottom - top);
}

/// Spatial derivative of the bilinear interpolant. At lattice points the
/// floor convention yields the right-sided derivative.
struct SampleGradient {
  double value;
  double d_x;
  double d_y;
};

inline SampleGradient sample_tap_gradient(const Grid& g, const BilinearTap& t, int c) noexcept {
  const double v00 = g.at(t.x0, t.y0, c);
  const double v10 = g.at(t.x1, t.y0, c);
  const double v01 = g.at(t.x0, t.y1, c);
  const double v11 = g.at(t.x1, t.y1, c);
  const double top = v00 + t.fx * (v10 - v00);
  const double bottom = v01 + t.fx * (v11 - v01);
  SampleGradient out{};
  out.value = top + t.fy * (bottom - top);
  out.d_x = (1.0 - t.fy) * (v10 - v00) + t.fy * (v11 - v01);
  out.d_y = bottom - top;
  return out;
}

/// Scatters `grad` into `target` channel c with the tap's bilinear weights
/// (adjoint of sample_tap).
inline void scatter_tap(Grid& target, const BilinearTap& t, int c, double grad) noexcept {
  target.at(t.x0, t.y0, c) += grad * (1.0 - t.fx) * (1.0 - t.fy);
  target.at(t.x1, t.y0, c) += grad * t.fx * (1.0 - t.fy);
  target.at(t.x0, t.y1, c) += grad * (1.0 - t.fx) * t.fy;
  target.at(t.x1, t.y1, c) += grad * t.fx * t.fy;
}

/// Checked 4-tap bilinear interpolation of channel c at p.
double bilinear_sample(const Grid& g, ContinuousPos p, int c = 0);

/// Raster-ordered displacement of each neighbor in a k x k window, center
/// excluded. Size k*k - 1.
struct RingOffset {
  int dx;
  int dy;
};
std::vector<RingOffset> ring_offsets(int kernel);
int neighbor_count(int kernel);
void require_kernel(int kernel);

}  // namespace dspn
