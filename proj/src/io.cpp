#include "vmpm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace vmpm {
namespace {

constexpr char kMagic[4] = {'V', 'M', 'P', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ofstream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(std::ifstream& in) {
  std::uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::string frame_path(const std::string& dir, std::size_t idx) {
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%04zu.bin", idx);
  return dir + "/" + name;
}

}  // namespace

void write_frame_dump(const std::string& path, const std::vector<Vec3>& frame,
                      std::uint32_t frame_index, float frame_dt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_frame_dump: cannot open " + path);
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(frame.size()));
  put_u32(out, frame_index);
  put_f32(out, frame_dt);
  for (const Vec3& p : frame) {
    put_f32(out, static_cast<float>(p.x));
    put_f32(out, static_cast<float>(p.y));
    put_f32(out, static_cast<float>(p.z));
  }
  if (!out) throw std::runtime_error("write_frame_dump: write failed: " + path);
}

FrameDump read_frame_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_frame_dump: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("read_frame_dump: bad magic in " + path);
  FrameDump fd;
  std::uint32_t count = get_u32(in);
  fd.frame_index = get_u32(in);
  fd.frame_dt = get_f32(in);
  fd.positions.resize(count);
  for (auto& p : fd.positions) {
    p.x = get_f32(in);
    p.y = get_f32(in);
    p.z = get_f32(in);
  }
  if (!in) throw std::runtime_error("read_frame_dump: truncated file " + path);
  return fd;
}

Trajectory read_trajectory_dir(const std::string& dir) {
  Trajectory traj;
  for (std::size_t i = 0;; ++i) {
    std::string path = frame_path(dir, i);
    if (!std::filesystem::exists(path)) break;
    FrameDump fd = read_frame_dump(path);
    if (!traj.frames.empty() && fd.positions.size() != traj.frames[0].size())
      throw std::runtime_error("read_trajectory_dir: particle count changes at " +
                               path);
    traj.frame_dt = fd.frame_dt;
    traj.frames.push_back(std::move(fd.positions));
  }
  if (traj.frames.empty())
    throw std::runtime_error("read_trajectory_dir: no frame_0000.bin in " + dir);
  return traj;
}

void write_trajectory_dir(const std::string& dir, const Trajectory& traj) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < traj.frames.size(); ++i)
    write_frame_dump(frame_path(dir, i), traj.frames[i],
                     static_cast<std::uint32_t>(i),
                     static_cast<float>(traj.frame_dt));
}

void write_pgm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
  std::string magic;
  int w, h, maxv;
  in >> magic >> w >> h >> maxv;
  if (magic != "P5" || maxv != 255)
    throw std::runtime_error("read_pgm: unsupported format in " + path);
  in.get();  // single whitespace after header
  Image img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw std::runtime_error("read_pgm: truncated file " + path);
  return img;
}

Image rasterize_frame(const std::vector<Vec3>& frame, const ViewSpec& view) {
  if (frame.empty())
    throw std::invalid_argument("rasterize_frame: empty frame");
  if (view.axis < 0 || view.axis > 2)
    throw std::invalid_argument("rasterize_frame: axis must be 0, 1 or 2");

  // Image columns map to the first remaining world axis, rows to the second
  // (top row = highest coordinate).
  int ax_col = (view.axis + 1) % 3;
  int ax_row = (view.axis + 2) % 3;

  Image img;
  img.width = view.width;
  img.height = view.height;
  img.pixels.assign(static_cast<std::size_t>(view.width) * view.height, 0);
  std::vector<real> depth(img.pixels.size(),
                          std::numeric_limits<real>::infinity());

  Vec3 span = view.domain_hi - view.domain_lo;
  for (const Vec3& p : frame) {
    real u = (p[ax_col] - view.domain_lo[ax_col]) / span[ax_col];
    real v = (p[ax_row] - view.domain_lo[ax_row]) / span[ax_row];
    int col = static_cast<int>(u * view.width);
    int row = view.height - 1 - static_cast<int>(v * view.height);
    real d = p[view.axis];  // depth along the projection axis
    real dn = (d - view.domain_lo[view.axis]) / span[view.axis];
    auto intensity =
        static_cast<std::uint8_t>(std::clamp(255.0 * (1.0 - dn), 64.0, 255.0));
    int r = view.splat >= 3 ? 1 : 0;
    for (int dr = -r; dr <= r; ++dr)
      for (int dc = -r; dc <= r; ++dc) {
        int rr = row + dr, cc = col + dc;
        if (rr < 0 || cc < 0 || rr >= view.height || cc >= view.width) continue;
        std::size_t n = static_cast<std::size_t>(rr) * view.width + cc;
        if (d < depth[n]) {
          depth[n] = d;
          img.pixels[n] = intensity;
        }
      }
  }
  return img;
}

Image spacetime_slice(const std::vector<std::vector<Vec3>>& frames,
                      const SliceSpec& slice) {
  if (frames.empty())
    throw std::invalid_argument("spacetime_slice: need at least one frame");
  if (slice.row < 0 || slice.row >= slice.view.height)
    throw std::out_of_range("spacetime_slice: row out of image height");

  Image out;
  out.width = slice.view.width;
  out.height = static_cast<int>(frames.size());
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    Image frame_img = rasterize_frame(frames[t], slice.view);
    std::memcpy(out.pixels.data() + t * out.width,
                frame_img.pixels.data() + static_cast<std::size_t>(slice.row) *
                                              out.width,
                static_cast<std::size_t>(out.width));
  }
  return out;
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<FrameDiagnostics>& diags) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_diagnostics_csv: cannot open " + path);
  out << "frame,kinetic_energy,elastic_energy,max_velocity,clamp_events,"
         "oob_advections\n";
  for (std::size_t i = 0; i < diags.size(); ++i) {
    const auto& d = diags[i];
    out << i << "," << d.kinetic_energy << "," << d.elastic_energy << ","
        << d.max_velocity << "," << d.clamp_events << "," << d.oob_advections
        << "\n";
  }
}

}  // namespace vmpm
