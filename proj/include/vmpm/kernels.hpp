#pragma once

#include <cstddef>
#include <string>

namespace vmpm::kernels {

/// Normalizes grid momentum to velocity and adds dt * g, in place.
/// Nodes with mass <= mass_eps are zeroed. Arrays are SoA, length n.
using GridFinalizeFn = void (*)(const double* mass, double* vx, double* vy,
                                double* vz, std::size_t n, double mass_eps,
                                double dt_gx, double dt_gy, double dt_gz);

/// Sum of squared differences of two arrays of length n.
using SumSqDiffFn = double (*)(const double* a, const double* b, std::size_t n);

void grid_finalize_scalar(const double* mass, double* vx, double* vy,
                          double* vz, std::size_t n, double mass_eps,
                          double dt_gx, double dt_gy, double dt_gz);
double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
void grid_finalize_avx2(const double* mass, double* vx, double* vy, double* vz,
                        std::size_t n, double mass_eps, double dt_gx,
                        double dt_gy, double dt_gz);
double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n);
#endif

/// Dispatch table, filled in at first use. Honors VISCOMPM_SIMD=scalar|avx2
/// as an override; otherwise picks the widest supported instruction set.
struct Dispatch {
  GridFinalizeFn grid_finalize;
  SumSqDiffFn sum_sq_diff;
  const char* name;
};

const Dispatch& active();

/// Name of the selected variant ("scalar" or "avx2").
inline std::string variant() { return active().name; }

}  // namespace vmpm::kernels
