#include "vmpm/kernels.hpp"

namespace vmpm::kernels {

void grid_finalize_scalar(const double* mass, double* vx, double* vy,
                          double* vz, std::size_t n, double mass_eps,
                          double dt_gx, double dt_gy, double dt_gz) {
  for (std::size_t i = 0; i < n; ++i) {
    if (mass[i] > mass_eps) {
      double inv = 1.0 / mass[i];
      vx[i] = vx[i] * inv + dt_gx;
      vy[i] = vy[i] * inv + dt_gy;
      vz[i] = vz[i] * inv + dt_gz;
    } else {
      vx[i] = 0.0;
      vy[i] = 0.0;
      vz[i] = 0.0;
    }
  }
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace vmpm::kernels
