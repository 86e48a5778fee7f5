#pragma once

// File formats.
//
// GRD1: "GRD1", then width, height, channels as little-endian u32, then
// width*height*channels little-endian IEEE-754 float32 values in (y, x, c)
// order. Values widen to double on read.
//
// PGM: binary P5 with maxval 65535 and big-endian 16-bit samples.
// depth = raw / scale (KITTI uses scale 256); raw 0 marks a missing pixel.

#include <filesystem>

#include "dspn/grid.hpp"

namespace dspn {

Grid read_grd(const std::filesystem::path& path);
void write_grd(const Grid& grid, const std::filesystem::path& path);

struct DepthImage {
  Grid depth;  // meters, 0 where missing
  Grid mask;   // 1 where raw > 0
};

inline constexpr double kKittiDepthScale = 256.0;

DepthImage read_pgm16(const std::filesystem::path& path, double scale = kKittiDepthScale);
/// Depth is rounded to the nearest raw step and clamped to [0, 65535].
void write_pgm16(const Grid& depth, const std::filesystem::path& path, double scale = kKittiDepthScale);

}  // namespace dspn
