#include "vmpm/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace vmpm {
namespace {

std::vector<Vec3> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_particles: cannot open " + path);
  std::vector<Vec3> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Trim whitespace; skip blank lines.
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Vec3 p;
    if (!(ss >> p.x >> p.y >> p.z) || !p.finite())
      throw std::runtime_error("load_particles: malformed CSV line " +
                               std::to_string(lineno) + " in " + path);
    pts.push_back(p);
  }
  if (pts.empty())
    throw std::runtime_error("load_particles: empty file " + path);
  return pts;
}

struct PlyProperty {
  std::string name;
  std::string type;
};

std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
      t == "float" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw std::runtime_error("load_particles: unsupported PLY property type " + t);
}

double read_scalar_le(const char* p, const std::string& t) {
  if (t == "float" || t == "float32") {
    float f;
    std::memcpy(&f, p, 4);
    return f;
  }
  if (t == "double" || t == "float64") {
    double d;
    std::memcpy(&d, p, 8);
    return d;
  }
  throw std::runtime_error("load_particles: PLY coordinate must be float/double");
}

std::vector<Vec3> load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_particles: cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw std::runtime_error("load_particles: not a PLY file: " + path);

  std::string format;
  std::size_t vertex_count = 0;
  std::vector<PlyProperty> props;
  bool in_vertex_element = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      ss >> format;
    } else if (tok == "element") {
      std::string name;
      std::size_t count;
      ss >> name >> count;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = count;
      else if (vertex_count > 0) break;  // vertex props done; later elements ignored
    } else if (tok == "property" && in_vertex_element) {
      PlyProperty p;
      ss >> p.type >> p.name;
      if (p.type == "list")
        throw std::runtime_error(
            "load_particles: list properties on vertices unsupported");
      props.push_back(p);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (vertex_count == 0)
    throw std::runtime_error("load_particles: PLY has no vertices: " + path);

  int ix = -1, iy = -1, iz = -1;
  std::size_t stride = 0;
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < props.size(); ++i) {
    offsets.push_back(stride);
    if (props[i].name == "x") ix = static_cast<int>(i);
    if (props[i].name == "y") iy = static_cast<int>(i);
    if (props[i].name == "z") iz = static_cast<int>(i);
    stride += ply_type_size(props[i].type);
  }
  if (ix < 0 || iy < 0 || iz < 0)
    throw std::runtime_error("load_particles: PLY lacks x/y/z properties");

  std::vector<Vec3> pts;
  pts.reserve(vertex_count);
  if (format == "ascii") {
    for (std::size_t v = 0; v < vertex_count; ++v) {
      std::vector<double> vals(props.size());
      for (std::size_t i = 0; i < props.size(); ++i)
        if (!(in >> vals[i]))
          throw std::runtime_error("load_particles: truncated PLY element " +
                                   std::to_string(v));
      pts.push_back({vals[ix], vals[iy], vals[iz]});
    }
  } else if (format == "binary_little_endian") {
    std::vector<char> buf(stride);
    for (std::size_t v = 0; v < vertex_count; ++v) {
      if (!in.read(buf.data(), static_cast<std::streamsize>(stride)))
        throw std::runtime_error("load_particles: truncated PLY element " +
                                 std::to_string(v));
      pts.push_back({read_scalar_le(buf.data() + offsets[ix], props[ix].type),
                     read_scalar_le(buf.data() + offsets[iy], props[iy].type),
                     read_scalar_le(buf.data() + offsets[iz], props[iz].type)});
    }
  } else {
    throw std::runtime_error("load_particles: unsupported PLY format " + format);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!pts[i].finite())
      throw std::runtime_error("load_particles: non-finite PLY vertex " +
                               std::to_string(i));
  return pts;
}

}  // namespace

std::vector<Vec3> load_particles(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "ply") return load_ply(path);
  return load_csv(path);
}

FillResult internal_fill(const std::vector<Vec3>& points, const FillSpec& fill,
                         std::uint64_t seed) {
  if (points.empty())
    throw std::invalid_argument("internal_fill: empty input");
  for (int r : fill.voxel_resolution)
    if (r < 8 || r > 256)
      throw std::invalid_argument(
          "internal_fill: voxel_resolution out of [8, 256]");
  if (fill.seed_per_voxel < 1)
    throw std::invalid_argument("internal_fill: seed_per_voxel must be >= 1");

  Vec3 lo = points[0], hi = points[0];
  for (const Vec3& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }

  const auto& res = fill.voxel_resolution;
  Vec3 ext = hi - lo;
  Vec3 cell{ext.x / res[0], ext.y / res[1], ext.z / res[2]};
  for (int a = 0; a < 3; ++a)
    if (cell[a] <= 0) cell[a] = 1e-12;  // flat axis: degenerate, no interior

  auto vidx = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * res[1] + j) * res[2] + k;
  };
  enum : std::uint8_t { kEmpty = 0, kShell = 1, kExterior = 2 };
  std::vector<std::uint8_t> vox(
      static_cast<std::size_t>(res[0]) * res[1] * res[2], kEmpty);

  for (const Vec3& p : points) {
    int i = std::min(res[0] - 1, static_cast<int>((p.x - lo.x) / cell.x));
    int j = std::min(res[1] - 1, static_cast<int>((p.y - lo.y) / cell.y));
    int k = std::min(res[2] - 1, static_cast<int>((p.z - lo.z) / cell.z));
    vox[vidx(i, j, k)] = kShell;
  }

  // Flood-fill exterior air from all boundary faces, 6-connected.
  std::deque<std::array<int, 3>> queue;
  auto try_seed = [&](int i, int j, int k) {
    std::size_t n = vidx(i, j, k);
    if (vox[n] == kEmpty) {
      vox[n] = kExterior;
      queue.push_back({i, j, k});
    }
  };
  for (int i = 0; i < res[0]; ++i)
    for (int j = 0; j < res[1]; ++j) {
      try_seed(i, j, 0);
      try_seed(i, j, res[2] - 1);
    }
  for (int i = 0; i < res[0]; ++i)
    for (int k = 0; k < res[2]; ++k) {
      try_seed(i, 0, k);
      try_seed(i, res[1] - 1, k);
    }
  for (int j = 0; j < res[1]; ++j)
    for (int k = 0; k < res[2]; ++k) {
      try_seed(0, j, k);
      try_seed(res[0] - 1, j, k);
    }
  const int dirs[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                          {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  while (!queue.empty()) {
    auto [i, j, k] = queue.front();
    queue.pop_front();
    for (const auto& d : dirs) {
      int ni = i + d[0], nj = j + d[1], nk = k + d[2];
      if (ni < 0 || nj < 0 || nk < 0 || ni >= res[0] || nj >= res[1] ||
          nk >= res[2])
        continue;
      try_seed(ni, nj, nk);
    }
  }

  FillResult out;
  out.points = points;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<real> jitter(0.0, 1.0);
  for (int i = 0; i < res[0]; ++i)
    for (int j = 0; j < res[1]; ++j)
      for (int k = 0; k < res[2]; ++k) {
        if (vox[vidx(i, j, k)] != kEmpty) continue;
        for (int s = 0; s < fill.seed_per_voxel; ++s) {
          Vec3 p{lo.x + (i + jitter(rng)) * cell.x,
                 lo.y + (j + jitter(rng)) * cell.y,
                 lo.z + (k + jitter(rng)) * cell.z};
          out.points.push_back(p);
          ++out.seeded;
        }
      }
  out.nothing_to_fill = out.seeded == 0;
  return out;
}

std::vector<MassVolume> assign_mass_volume(const std::vector<Vec3>& points,
                                           const SimConfig& config, real rho) {
  if (!(rho > 0))
    throw std::invalid_argument("assign_mass_volume: density must be positive");
  std::unordered_map<std::uint64_t, int> cell_count;
  std::vector<std::uint64_t> cell_of(points.size());
  const real inv_dx = 1.0 / config.dx;
  for (std::size_t p = 0; p < points.size(); ++p) {
    auto i = static_cast<std::uint64_t>(std::floor(points[p].x * inv_dx));
    auto j = static_cast<std::uint64_t>(std::floor(points[p].y * inv_dx));
    auto k = static_cast<std::uint64_t>(std::floor(points[p].z * inv_dx));
    std::uint64_t key = (i << 42) | ((j & 0x1fffff) << 21) | (k & 0x1fffff);
    cell_of[p] = key;
    ++cell_count[key];
  }
  const real cell_vol = config.dx * config.dx * config.dx;
  std::vector<MassVolume> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    real v = cell_vol / cell_count[cell_of[p]];
    out[p] = {rho * v, v};
  }
  return out;
}

std::vector<Particle> build_scene_from_points(const std::vector<Vec3>& points,
                                              const SceneSpec& spec,
                                              const SimConfig& config) {
  std::vector<Vec3> pts = points;
  if (spec.fill) {
    FillResult fr = internal_fill(pts, *spec.fill, spec.seed);
    pts = std::move(fr.points);
  }
  auto mv = assign_mass_volume(pts, config, spec.density_rho);

  std::vector<Particle> particles(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Particle& p = particles[i];
    p.x = pts[i];
    p.v = spec.initial_velocity;
    p.mass = mv[i].mass;
    p.volume0 = mv[i].volume0;
    p.material = 0;
    for (const Aabb& box : spec.anchors)
      if (box.contains(p.x)) p.anchored = true;
    if (p.anchored) p.v = Vec3{};
  }
  return particles;
}

std::vector<Particle> build_scene(const SceneSpec& spec,
                                  const SimConfig& config) {
  return build_scene_from_points(load_particles(spec.particle_source), spec,
                                 config);
}

void apply_impulse_and_anchors(std::vector<Particle>& particles, int frame,
                               const SceneSpec& spec) {
  for (Particle& p : particles) {
    p.ext_accel = Vec3{};
    for (const ImpulseSpec& imp : spec.impulses) {
      if (frame < imp.start_frame || frame > imp.end_frame) continue;
      if (imp.region.contains(p.x)) p.ext_accel += imp.acceleration;
    }
  }
}

}  // namespace vmpm
