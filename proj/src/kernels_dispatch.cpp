#include <cstdlib>
#include <cstring>

#include "vmpm/kernels.hpp"

namespace vmpm::kernels {
namespace {

Dispatch select() {
  const char* force = std::getenv("VISCOMPM_SIMD");
#if defined(__x86_64__) || defined(_M_X64)
  bool want_avx2 = __builtin_cpu_supports("avx2");
  if (force) want_avx2 = std::strcmp(force, "avx2") == 0;
  if (want_avx2) return {grid_finalize_avx2, sum_sq_diff_avx2, "avx2"};
#else
  (void)force;
#endif
  return {grid_finalize_scalar, sum_sq_diff_scalar, "scalar"};
}

}  // namespace

const Dispatch& active() {
  static const Dispatch d = select();
  return d;
}

}  // namespace vmpm::kernels
