#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vmpm/mpm.hpp"

namespace vmpm {

/// One binary frame dump. Layout (little-endian): magic "VMP1",
/// u32 particle count, u32 frame index, f32 frame_dt, count x 3 f32 positions.
void write_frame_dump(const std::string& path, const std::vector<Vec3>& frame,
                      std::uint32_t frame_index, float frame_dt);

struct FrameDump {
  std::vector<Vec3> positions;
  std::uint32_t frame_index = 0;
  float frame_dt = 0;
};

FrameDump read_frame_dump(const std::string& path);

/// Reads frame_0000.bin ... until a gap; at least one frame must exist.
Trajectory read_trajectory_dir(const std::string& dir);

void write_trajectory_dir(const std::string& dir, const Trajectory& traj);

/// 8-bit grayscale image with PGM (P5) serialization.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t& at(int row, int col) { return pixels[row * width + col]; }
  std::uint8_t at(int row, int col) const { return pixels[row * width + col]; }
};

void write_pgm(const std::string& path, const Image& img);
Image read_pgm(const std::string& path);

struct ViewSpec {
  int axis = 1;       // projection axis: 0=x, 1=y, 2=z
  int width = 256;
  int height = 256;
  Vec3 domain_lo;     // world box mapped onto the image
  Vec3 domain_hi;
  int splat = 1;      // 1 or 3 pixel splat
};

/// Orthographic projection along view.axis; intensity encodes depth
/// (nearest particle wins, closer is brighter).
Image rasterize_frame(const std::vector<Vec3>& frame, const ViewSpec& view);

struct SliceSpec {
  int row = 0;  // pixel row extracted from each rasterized frame
  ViewSpec view;
};

/// Row t of the output is the selected pixel row of frame t's raster.
Image spacetime_slice(const std::vector<std::vector<Vec3>>& frames,
                      const SliceSpec& slice);

void write_diagnostics_csv(const std::string& path,
                           const std::vector<FrameDiagnostics>& diags);

}  // namespace vmpm
