// AVX2 variants. Built with -mavx2; only called when cpuid reports support.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "vmpm/kernels.hpp"

namespace vmpm::kernels {

// No FMA contraction here: mul + add matches the scalar kernel bit for bit,
// which the equivalence tests assert.
void grid_finalize_avx2(const double* mass, double* vx, double* vy, double* vz,
                        std::size_t n, double mass_eps, double dt_gx,
                        double dt_gy, double dt_gz) {
  const __m256d eps = _mm256_set1_pd(mass_eps);
  const __m256d gx = _mm256_set1_pd(dt_gx);
  const __m256d gy = _mm256_set1_pd(dt_gy);
  const __m256d gz = _mm256_set1_pd(dt_gz);
  const __m256d one = _mm256_set1_pd(1.0);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_loadu_pd(mass + i);
    __m256d loaded = _mm256_cmp_pd(m, eps, _CMP_GT_OQ);
    __m256d inv = _mm256_div_pd(one, m);

    __m256d x = _mm256_loadu_pd(vx + i);
    __m256d y = _mm256_loadu_pd(vy + i);
    __m256d z = _mm256_loadu_pd(vz + i);
    x = _mm256_add_pd(_mm256_mul_pd(x, inv), gx);
    y = _mm256_add_pd(_mm256_mul_pd(y, inv), gy);
    z = _mm256_add_pd(_mm256_mul_pd(z, inv), gz);
    _mm256_storeu_pd(vx + i, _mm256_and_pd(x, loaded));
    _mm256_storeu_pd(vy + i, _mm256_and_pd(y, loaded));
    _mm256_storeu_pd(vz + i, _mm256_and_pd(z, loaded));
  }
  if (i < n)
    grid_finalize_scalar(mass + i, vx + i, vy + i, vz + i, n - i, mass_eps,
                         dt_gx, dt_gy, dt_gz);
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace vmpm::kernels

#endif
