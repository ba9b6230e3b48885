#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "vmpm/tensor3.hpp"

using namespace vmpm;

namespace {

// Independent oracle: eigenvalues of a symmetric 3x3 matrix via the
// trigonometric solution of the characteristic polynomial.
std::array<real, 3> sym_eigenvalues(const Mat3& s) {
  real p1 = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
  real q = trace3(s) / 3.0;
  if (p1 < 1e-30) {
    std::array<real, 3> e = {s(0, 0), s(1, 1), s(2, 2)};
    std::sort(e.begin(), e.end(), std::greater<>());
    return e;
  }
  real p2 = (s(0, 0) - q) * (s(0, 0) - q) + (s(1, 1) - q) * (s(1, 1) - q) +
            (s(2, 2) - q) * (s(2, 2) - q) + 2 * p1;
  real p = std::sqrt(p2 / 6.0);
  Mat3 b = (s - q * Mat3::identity()) * (1.0 / p);
  real r = det3(b) / 2.0;
  r = std::clamp(r, real(-1), real(1));
  real phi = std::acos(r) / 3.0;
  real e0 = q + 2 * p * std::cos(phi);
  real e2 = q + 2 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  real e1 = 3 * q - e0 - e2;
  return {e0, e1, e2};
}

Mat3 random_matrix(std::mt19937_64& rng, real lo = -2, real hi = 2) {
  std::uniform_real_distribution<real> d(lo, hi);
  Mat3 m;
  for (int i = 0; i < 9; ++i) m.m[i] = d(rng);
  return m;
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<real> d(0, 1);
  // Normalized quaternion to rotation matrix.
  real w = d(rng), x = d(rng), y = d(rng), z = d(rng);
  real n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n; x /= n; y /= n; z /= n;
  return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
          2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)};
}

Mat3 rot_z(real angle) {
  real c = std::cos(angle), s = std::sin(angle);
  return {c, -s, 0, s, c, 0, 0, 0, 1};
}

}  // namespace

TEST_CASE("svd3 identity and diagonal") {
  Svd3 s = svd3(Mat3::identity());
  CHECK(s.sigma.x == doctest::Approx(1.0));
  CHECK(s.sigma.y == doctest::Approx(1.0));
  CHECK(s.sigma.z == doctest::Approx(1.0));
  CHECK((s.reconstruct() - Mat3::identity()).frobenius() < 1e-12);

  Svd3 d = svd3(Mat3::diag(3, 2, 1));
  CHECK(d.sigma.x == doctest::Approx(3.0));
  CHECK(d.sigma.y == doctest::Approx(2.0));
  CHECK(d.sigma.z == doctest::Approx(1.0));
}

TEST_CASE("svd3 rotated diagonal matches characteristic-polynomial oracle") {
  Mat3 m = rot_z(M_PI / 4) * Mat3::diag(2, 1, 0.5);
  Svd3 s = svd3(m);
  CHECK((s.reconstruct() - m).frobenius() < 1e-6);

  auto eig = sym_eigenvalues(m.transposed() * m);
  CHECK(s.sigma.x == doctest::Approx(std::sqrt(eig[0])).epsilon(1e-9));
  CHECK(s.sigma.y == doctest::Approx(std::sqrt(eig[1])).epsilon(1e-9));
  CHECK(std::abs(s.sigma.z) == doctest::Approx(std::sqrt(eig[2])).epsilon(1e-9));
}

TEST_CASE("svd3 random-matrix invariants") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 1000; ++t) {
    Mat3 m = random_matrix(rng);
    Svd3 s = svd3(m);
    real scale = std::max(real(1), m.frobenius());
    CHECK((s.reconstruct() - m).frobenius() <= 1e-6 * scale);
    CHECK((s.u.transposed() * s.u - Mat3::identity()).frobenius() <= 1e-8);
    CHECK((s.v.transposed() * s.v - Mat3::identity()).frobenius() <= 1e-8);
    CHECK(det3(s.u) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(det3(s.v) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.sigma.x >= s.sigma.y);
    CHECK(s.sigma.y >= std::abs(s.sigma.z) - 1e-12);
    // Oracle cross-check on the singular values.
    auto eig = sym_eigenvalues(m.transposed() * m);
    for (int i = 0; i < 3; ++i) {
      real expect = std::sqrt(std::max(eig[i], real(0)));
      CHECK(std::abs(std::abs(s.sigma[i]) - expect) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("svd3 deterministic for identical input") {
  std::mt19937_64 rng(7);
  Mat3 m = random_matrix(rng);
  Svd3 a = svd3(m), b = svd3(m);
  for (int i = 0; i < 9; ++i) {
    CHECK(a.u.m[i] == b.u.m[i]);
    CHECK(a.v.m[i] == b.v.m[i]);
  }
}

TEST_CASE("svd3 degenerate inputs stay valid") {
  for (const Mat3& m : {Mat3::zero(), Mat3::diag(1, 1, 0), Mat3::diag(2, 0, 0)}) {
    Svd3 s = svd3(m);
    CHECK((s.u.transposed() * s.u - Mat3::identity()).frobenius() <= 1e-8);
    CHECK((s.reconstruct() - m).frobenius() <= 1e-6);
    CHECK(det3(s.u) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("svd3 reflective input keeps rotation factors") {
  Mat3 refl = Mat3::diag(1, 1, -1);
  Svd3 s = svd3(refl);
  CHECK(det3(s.u) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(det3(s.v) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.sigma.z == doctest::Approx(-1.0));
  CHECK((s.reconstruct() - refl).frobenius() < 1e-9);
}

TEST_CASE("polar_rotation basics") {
  CHECK((polar_rotation(Mat3::identity()) - Mat3::identity()).frobenius() <
        1e-12);

  std::mt19937_64 rng(3);
  Mat3 r = random_rotation(rng);
  CHECK((polar_rotation(r) - r).frobenius() < 1e-9);

  Mat3 f = r * Mat3::diag(2, 1, 1);
  Svd3 s = svd3(f);
  Mat3 oracle = s.u * s.v.transposed();
  CHECK((polar_rotation(f) - oracle).frobenius() < 1e-12);
  CHECK((polar_rotation(f) - r).frobenius() < 1e-6);
}

TEST_CASE("polar_rotation of rotation times SPD recovers the rotation") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    Mat3 r = random_rotation(rng);
    Mat3 a = random_matrix(rng, -1, 1);
    Mat3 spd = a.transposed() * a + 0.2 * Mat3::identity();
    CHECK((polar_rotation(r * spd) - r).frobenius() < 1e-6);
  }
}

TEST_CASE("polar_rotation rejects inverted elements") {
  CHECK_THROWS_AS(polar_rotation(Mat3::diag(1, 1, -1)), std::domain_error);
  CHECK_THROWS_AS(polar_rotation(Mat3::zero()), std::domain_error);
}

TEST_CASE("det3 / trace3 / deviator") {
  CHECK(det3(Mat3::identity()) == doctest::Approx(1.0));
  CHECK(trace3(Mat3::diag(1, 2, 3)) == doctest::Approx(6.0));
  CHECK(deviator(3.7 * Mat3::identity()).frobenius() < 1e-15);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    Mat3 m = random_matrix(rng);
    Mat3 d = deviator(m);
    CHECK(std::abs(trace3(d)) <= 1e-12 * std::max(real(1), m.frobenius()));
    Mat3 expect = m - (trace3(m) / 3.0) * Mat3::identity();
    CHECK((d - expect).frobenius() < 1e-14);
  }
}
