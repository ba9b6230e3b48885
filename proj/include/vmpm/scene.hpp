#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vmpm/mpm.hpp"

namespace vmpm {

struct Aabb {
  Vec3 lo, hi;
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
           p.z >= lo.z && p.z <= hi.z;
  }
};

struct FillSpec {
  std::array<int, 3> voxel_resolution{32, 32, 32};
  int seed_per_voxel = 1;
};

struct ImpulseSpec {
  Aabb region;
  Vec3 acceleration;  // m/s^2
  int start_frame = 0;
  int end_frame = 0;  // inclusive
};

struct SceneSpec {
  std::string particle_source;
  real density_rho = 1000;  // kg/m^3
  std::optional<FillSpec> fill;
  std::vector<Aabb> anchors;
  std::vector<ImpulseSpec> impulses;
  MaterialSet material;
  // Initial rigid velocity applied to every particle.
  Vec3 initial_velocity;
  std::uint64_t seed = 0;
};

/// CSV ("x,y,z" per line) or PLY (ascii / binary little-endian; float or
/// double x,y,z vertex properties, extras ignored). Dispatches on extension.
std::vector<Vec3> load_particles(const std::string& path);

struct FillResult {
  std::vector<Vec3> points;  // input followed by seeded interior points
  std::size_t seeded = 0;
  bool nothing_to_fill = false;
};

/// Voxelizes the input's bounding box, flood-fills exterior air from the
/// boundary (6-connected), and seeds jittered points in enclosed interior
/// voxels. Deterministic for a given seed.
FillResult internal_fill(const std::vector<Vec3>& points, const FillSpec& fill,
                         std::uint64_t seed = 0);

struct MassVolume {
  real mass = 0;
  real volume0 = 0;
};

/// Splits each occupied sim-grid cell's volume dx^3 evenly among the
/// particles inside it; mass = rho * volume.
std::vector<MassVolume> assign_mass_volume(const std::vector<Vec3>& points,
                                           const SimConfig& config, real rho);

/// Builds the full particle list (loading, optional fill, mass/volume,
/// anchor flags, initial velocity) from a spec.
std::vector<Particle> build_scene(const SceneSpec& spec,
                                  const SimConfig& config);

/// Same, but from in-memory points (used by tests and synthetic fixtures).
std::vector<Particle> build_scene_from_points(const std::vector<Vec3>& points,
                                              const SceneSpec& spec,
                                              const SimConfig& config);

/// Sets each particle's external acceleration from the impulse regions
/// active at `frame`. Anchor flags are static and set at build time.
void apply_impulse_and_anchors(std::vector<Particle>& particles, int frame,
                               const SceneSpec& spec);

}  // namespace vmpm
