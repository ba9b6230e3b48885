#include "vmpm/mpm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "vmpm/kernels.hpp"

namespace vmpm {
namespace {

constexpr real kMassEps = 1e-12;  // kg; nodes below this are inert

int thread_count() {
  if (const char* env = std::getenv("VISCOMPM_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Partition [0, n) into contiguous chunks, one thread each. Writes are
// disjoint per index, so the result is bitwise independent of the split.
template <typename Fn>
void parallel_for(std::size_t n, const Fn& fn) {
  int nt = thread_count();
  if (nt <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0)) throw std::invalid_argument("SimConfig: dt must be positive");
  if (!(dx > 0)) throw std::invalid_argument("SimConfig: dx must be positive");
  for (int d : grid_dims)
    if (d < 8) throw std::invalid_argument("SimConfig: grid_dims must be >= 8");
  if (boundary_margin < 2)
    throw std::invalid_argument("SimConfig: boundary_margin must be >= 2");
  if (substeps_per_frame < 1)
    throw std::invalid_argument("SimConfig: substeps_per_frame must be >= 1");
}

void Grid::resize(const std::array<int, 3>& d) {
  dims = d;
  std::size_t n = static_cast<std::size_t>(d[0]) * d[1] * d[2];
  mass.assign(n, 0);
  vx.assign(n, 0);
  vy.assign(n, 0);
  vz.assign(n, 0);
}

void Grid::clear() {
  std::fill(mass.begin(), mass.end(), 0.0);
  std::fill(vx.begin(), vx.end(), 0.0);
  std::fill(vy.begin(), vy.end(), 0.0);
  std::fill(vz.begin(), vz.end(), 0.0);
}

real Grid::total_mass() const {
  real s = 0;
  for (real m : mass) s += m;
  return s;
}

Vec3 Grid::total_momentum() const {
  Vec3 s;
  for (std::size_t i = 0; i < mass.size(); ++i)
    s += Vec3{vx[i], vy[i], vz[i]};
  return s;
}

BsplineStencil bspline_stencil(const Vec3& xp, const SimConfig& config) {
  BsplineStencil st;
  st.xp = xp;
  st.dx = config.dx;
  const real inv_dx = 1.0 / config.dx;
  for (int a = 0; a < 3; ++a) {
    real gp = xp[a] * inv_dx;  // position in grid units
    if (!(gp >= config.boundary_margin &&
          gp <= config.grid_dims[a] - 1 - config.boundary_margin))
      throw std::domain_error("bspline_stencil: particle outside grid interior");
    int base = static_cast<int>(std::floor(gp - 0.5));
    real fx = gp - base;  // in [0.5, 1.5]
    st.base[a] = base;
    std::array<real, 3> w = {0.5 * (1.5 - fx) * (1.5 - fx),
                             0.75 - (fx - 1.0) * (fx - 1.0),
                             0.5 * (fx - 0.5) * (fx - 0.5)};
    if (a == 0) st.wx = w;
    else if (a == 1) st.wy = w;
    else st.wz = w;
  }
  return st;
}

void p2g(const std::vector<Particle>& particles, Grid& grid,
         const SimConfig& config) {
  for (std::size_t pi = 0; pi < particles.size(); ++pi) {
    const Particle& p = particles[pi];
    BsplineStencil st;
    try {
      st = bspline_stencil(p.x, config);
    } catch (const std::domain_error&) {
      throw std::runtime_error("p2g: particle " + std::to_string(pi) +
                               " outside grid interior");
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          real w = st.weight(i, j, k);
          Vec3 dpos = st.node_pos(i, j, k) - p.x;
          Vec3 mom = (p.v + p.c * dpos) * (w * p.mass);
          std::size_t n = grid.index(st.base[0] + i, st.base[1] + j,
                                     st.base[2] + k);
          grid.mass[n] += w * p.mass;
          grid.vx[n] += mom.x;
          grid.vy[n] += mom.y;
          grid.vz[n] += mom.z;
        }
  }
}

void grid_update(const std::vector<Particle>& particles,
                 const std::vector<MaterialSet>& materials, Grid& grid,
                 const SimConfig& config, StepDiagnostics* diag) {
  ClampCounter clamps;

  // Internal forces: scatter -dt * V0 * tau * grad(w) as momentum. External
  // per-particle accelerations (impulse regions) go in alongside.
  for (const Particle& p : particles) {
    const MaterialSet& mat = materials[p.material];
    StressPair tau = total_stress(p.f_e, p.f_n, mat.elastic, mat.visco, &clamps);
    Mat3 tau_total = tau.total();
    BsplineStencil st = bspline_stencil(p.x, config);
    bool has_ext = p.ext_accel.norm2() > 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          Vec3 dmom = (tau_total * st.grad(i, j, k)) * (-config.dt * p.volume0);
          if (has_ext)
            dmom += p.ext_accel * (config.dt * st.weight(i, j, k) * p.mass);
          std::size_t n = grid.index(st.base[0] + i, st.base[1] + j,
                                     st.base[2] + k);
          grid.vx[n] += dmom.x;
          grid.vy[n] += dmom.y;
          grid.vz[n] += dmom.z;
        }
  }

  // Momentum -> velocity, plus gravity.
  kernels::active().grid_finalize(grid.mass.data(), grid.vx.data(),
                                  grid.vy.data(), grid.vz.data(),
                                  grid.node_count(), kMassEps,
                                  config.dt * config.gravity.x,
                                  config.dt * config.gravity.y,
                                  config.dt * config.gravity.z);

  // Boundary band.
  const int m = config.boundary_margin;
  const auto& d = grid.dims;
  for (int i = 0; i < d[0]; ++i)
    for (int j = 0; j < d[1]; ++j)
      for (int k = 0; k < d[2]; ++k) {
        bool bx = i < m || i >= d[0] - m;
        bool by = j < m || j >= d[1] - m;
        bool bz = k < m || k >= d[2] - m;
        if (!(bx || by || bz)) {
          k = d[2] - m - 1;  // skip the interior span of this k-row
          continue;
        }
        std::size_t n = grid.index(i, j, k);
        if (config.boundary_policy == BoundaryPolicy::sticky) {
          grid.vx[n] = 0;
          grid.vy[n] = 0;
          grid.vz[n] = 0;
        } else {
          if (bx) grid.vx[n] = 0;
          if (by) grid.vy[n] = 0;
          if (bz) grid.vz[n] = 0;
        }
      }

  real maxv = 0;
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    if (std::isnan(grid.vx[n]) || std::isnan(grid.vy[n]) ||
        std::isnan(grid.vz[n]))
      throw std::runtime_error("grid_update: NaN node velocity at index " +
                               std::to_string(n));
    maxv = std::max(maxv, std::abs(grid.vx[n]));
    maxv = std::max(maxv, std::abs(grid.vy[n]));
    maxv = std::max(maxv, std::abs(grid.vz[n]));
  }
  if (diag) {
    diag->max_velocity = std::max(diag->max_velocity, maxv);
    diag->clamp_events += clamps.events;
  }
}

void g2p(std::vector<Particle>& particles,
         const std::vector<MaterialSet>& materials, const Grid& grid,
         const SimConfig& config, StepDiagnostics* diag) {
  // Per-material viscous correction coefficients for this substep.
  std::vector<std::pair<real, real>> ab(materials.size());
  for (std::size_t i = 0; i < materials.size(); ++i)
    ab[i] = derive_ab(materials[i].visco, config.dt);

  std::vector<std::uint64_t> clamp_per(particles.size(), 0);
  std::vector<std::uint64_t> oob_per(particles.size(), 0);

  const real lo_pad = 1e-9 * config.dx;
  parallel_for(particles.size(), [&](std::size_t pi) {
    Particle& p = particles[pi];
    BsplineStencil st = bspline_stencil(p.x, config);
    Vec3 v_new;
    Mat3 grad_v;  // equals the APIC C matrix under the MLS-form gradient
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          std::size_t n = grid.index(st.base[0] + i, st.base[1] + j,
                                     st.base[2] + k);
          Vec3 vi{grid.vx[n], grid.vy[n], grid.vz[n]};
          v_new += st.weight(i, j, k) * vi;
          grad_v += Mat3::outer(vi, st.grad(i, j, k));
        }

    if (p.anchored) {
      p.v = Vec3{};
      p.c = Mat3::zero();
    } else {
      p.v = v_new;
      p.x += config.dt * v_new;
      p.c = grad_v;

      // Keep the stencil valid; clamped advections are counted, not fatal.
      for (int a = 0; a < 3; ++a) {
        real lo = config.boundary_margin * config.dx + lo_pad;
        real hi = (config.grid_dims[a] - 1 - config.boundary_margin) * config.dx -
                  lo_pad;
        if (p.x[a] < lo || p.x[a] > hi) {
          p.x[a] = std::clamp(p.x[a], lo, hi);
          ++oob_per[pi];
        }
      }
    }

    Mat3 incr = Mat3::identity() + config.dt * grad_v;
    p.f_e = incr * p.f_e;
    Mat3 f_n_trial = incr * p.f_n;
    ClampCounter clamps;
    auto [a, b] = ab[p.material];
    p.f_n = viscous_return_map(f_n_trial, a, b, &clamps);
    clamp_per[pi] = clamps.events;
  });

  if (diag)
    for (std::size_t pi = 0; pi < particles.size(); ++pi) {
      diag->clamp_events += clamp_per[pi];
      diag->oob_advections += oob_per[pi];
    }
}

void substep(std::vector<Particle>& particles,
             const std::vector<MaterialSet>& materials, Grid& grid,
             const SimConfig& config, StepDiagnostics* diag) {
  real maxv = 0;
  for (const Particle& p : particles)
    maxv = std::max(maxv, p.v.norm());
  if (config.dt * maxv > config.dx)
    throw std::runtime_error("substep: CFL violation, dt*|v| = " +
                             std::to_string(config.dt * maxv) +
                             " > dx = " + std::to_string(config.dx));
  if (diag) diag->max_velocity = std::max(diag->max_velocity, maxv);

  grid.clear();
  p2g(particles, grid, config);
  grid_update(particles, materials, grid, config, diag);
  g2p(particles, materials, grid, config, diag);
}

FrameDiagnostics measure_frame(const std::vector<Particle>& particles,
                               const std::vector<MaterialSet>& materials) {
  FrameDiagnostics fd;
  for (const Particle& p : particles) {
    const MaterialSet& mat = materials[p.material];
    fd.kinetic_energy += 0.5 * p.mass * p.v.norm2();
    fd.elastic_energy +=
        p.volume0 * (corotated_energy(p.f_e, mat.elastic.lame_lambda,
                                      mat.elastic.lame_mu) +
                     hencky_energy(p.f_n, mat.visco.lame_lambda_n,
                                   mat.visco.lame_mu_n));
    fd.max_velocity = std::max(fd.max_velocity, p.v.norm());
  }
  return fd;
}

Trajectory simulate(std::vector<Particle>& particles,
                    const std::vector<MaterialSet>& materials,
                    const SimConfig& config, int frames,
                    const FrameHook& pre_frame) {
  config.validate();
  if (frames < 0) throw std::invalid_argument("simulate: frames must be >= 0");

  Grid grid;
  grid.resize(config.grid_dims);

  Trajectory traj;
  traj.frame_dt = config.frame_dt();

  auto snapshot = [&] {
    std::vector<Vec3> frame(particles.size());
    for (std::size_t i = 0; i < particles.size(); ++i) frame[i] = particles[i].x;
    traj.frames.push_back(std::move(frame));
  };

  snapshot();
  traj.diagnostics.push_back(measure_frame(particles, materials));

  for (int f = 0; f < frames; ++f) {
    if (pre_frame) pre_frame(particles, f);
    StepDiagnostics sd;
    for (int s = 0; s < config.substeps_per_frame; ++s) {
      try {
        substep(particles, materials, grid, config, &sd);
      } catch (const std::exception& e) {
        throw std::runtime_error("simulate: frame " + std::to_string(f) +
                                 " substep " + std::to_string(s) + ": " +
                                 e.what());
      }
    }
    snapshot();
    FrameDiagnostics fd = measure_frame(particles, materials);
    fd.max_velocity = std::max(fd.max_velocity, sd.max_velocity);
    fd.clamp_events = sd.clamp_events;
    fd.oob_advections = sd.oob_advections;
    traj.diagnostics.push_back(fd);
  }
  return traj;
}

}  // namespace vmpm
