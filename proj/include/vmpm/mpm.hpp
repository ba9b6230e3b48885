#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "vmpm/constitutive.hpp"
#include "vmpm/tensor3.hpp"

namespace vmpm {

struct MaterialSet {
  ElasticParams elastic;
  ViscoParams visco;
};

struct Particle {
  Vec3 x;          // position, m
  Vec3 v;          // velocity, m/s
  Mat3 c;          // affine velocity matrix, 1/s
  Mat3 f_e = Mat3::identity();
  Mat3 f_n = Mat3::identity();
  real mass = 0;     // kg
  real volume0 = 0;  // initial volume, m^3
  Vec3 ext_accel;    // per-frame external acceleration (impulses)
  bool anchored = false;
  int material = 0;  // index into the scene's material table
};

enum class BoundaryPolicy { sticky, slip };

struct SimConfig {
  std::array<int, 3> grid_dims{50, 50, 50};
  real dx = 0.02;  // m
  real dt = 1e-4;  // s
  int substeps_per_frame = 400;
  Vec3 gravity{0, 0, -9.8};
  int boundary_margin = 2;
  BoundaryPolicy boundary_policy = BoundaryPolicy::sticky;
  bool deterministic = true;

  real frame_dt() const { return dt * substeps_per_frame; }
  Vec3 domain_size() const {
    return {grid_dims[0] * dx, grid_dims[1] * dx, grid_dims[2] * dx};
  }
  void validate() const;
};

/// Dense background grid, SoA. Between clear() and grid_update the vx/vy/vz
/// arrays hold momentum; after grid_update they hold velocity.
struct Grid {
  std::array<int, 3> dims{};
  std::vector<real> mass;
  std::vector<real> vx, vy, vz;

  void resize(const std::array<int, 3>& d);
  void clear();
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k;
  }
  std::size_t node_count() const { return mass.size(); }

  real total_mass() const;
  Vec3 total_momentum() const;  // only meaningful before normalization
};

/// Quadratic B-spline stencil (3x3x3) around a particle. Weights are
/// separable; grad(i) returns the MLS-form gradient (4/dx^2) w (x_i - x_p).
struct BsplineStencil {
  std::array<int, 3> base;        // lowest node index per axis
  std::array<real, 3> wx, wy, wz;  // 1D weights
  Vec3 xp;
  real dx;

  real weight(int i, int j, int k) const { return wx[i] * wy[j] * wz[k]; }
  Vec3 node_pos(int i, int j, int k) const {
    return {(base[0] + i) * dx, (base[1] + j) * dx, (base[2] + k) * dx};
  }
  Vec3 grad(int i, int j, int k) const {
    return (4.0 / (dx * dx)) * weight(i, j, k) * (node_pos(i, j, k) - xp);
  }
};

/// Throws std::domain_error if the stencil would leave the grid interior.
BsplineStencil bspline_stencil(const Vec3& xp, const SimConfig& config);

struct StepDiagnostics {
  std::uint64_t clamp_events = 0;     // constitutive singular-value clamps
  std::uint64_t oob_advections = 0;   // particles clamped back to the interior
  real max_velocity = 0;
};

struct FrameDiagnostics {
  real kinetic_energy = 0;
  real elastic_energy = 0;  // corotated + Hencky potential, summed over particles
  real max_velocity = 0;
  std::uint64_t clamp_events = 0;
  std::uint64_t oob_advections = 0;
};

struct Trajectory {
  std::vector<std::vector<Vec3>> frames;  // per-frame particle positions
  real frame_dt = 0;
  std::vector<FrameDiagnostics> diagnostics;  // one per recorded frame
};

void p2g(const std::vector<Particle>& particles, Grid& grid,
         const SimConfig& config);

void grid_update(const std::vector<Particle>& particles,
                 const std::vector<MaterialSet>& materials, Grid& grid,
                 const SimConfig& config, StepDiagnostics* diag = nullptr);

void g2p(std::vector<Particle>& particles,
         const std::vector<MaterialSet>& materials, const Grid& grid,
         const SimConfig& config, StepDiagnostics* diag = nullptr);

/// clear -> p2g -> grid_update -> g2p. Throws on CFL violation or NaN.
void substep(std::vector<Particle>& particles,
             const std::vector<MaterialSet>& materials, Grid& grid,
             const SimConfig& config, StepDiagnostics* diag = nullptr);

/// Mechanical energy of the current particle state (kinetic + stored
/// elastic energy of both branches).
FrameDiagnostics measure_frame(const std::vector<Particle>& particles,
                               const std::vector<MaterialSet>& materials);

/// Called before each frame's substeps, e.g. to apply impulses.
using FrameHook = std::function<void(std::vector<Particle>&, int frame)>;

/// Runs frames * substeps_per_frame substeps; returns frames + 1 snapshots
/// (initial state included).
Trajectory simulate(std::vector<Particle>& particles,
                    const std::vector<MaterialSet>& materials,
                    const SimConfig& config, int frames,
                    const FrameHook& pre_frame = nullptr);

}  // namespace vmpm
