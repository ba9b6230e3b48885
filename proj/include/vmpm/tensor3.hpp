#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace vmpm {

using real = double;

struct Vec3 {
  real x = 0, y = 0, z = 0;

  constexpr Vec3() = default;
  constexpr Vec3(real x_, real y_, real z_) : x(x_), y(y_), z(z_) {}

  real& operator[](int i) { return (&x)[i]; }
  real operator[](int i) const { return (&x)[i]; }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(real s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(real s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(real s) { x *= s; y *= s; z *= s; return *this; }

  real dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  real norm2() const { return dot(*this); }
  real norm() const { return std::sqrt(norm2()); }
  Vec3 normalized() const { return *this / norm(); }
  real sum() const { return x + y + z; }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(real s, const Vec3& v) { return v * s; }

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<real, 9> m{};

  constexpr Mat3() = default;
  constexpr Mat3(real a00, real a01, real a02,
                 real a10, real a11, real a12,
                 real a20, real a21, real a22)
      : m{a00, a01, a02, a10, a11, a12, a20, a21, a22} {}

  static Mat3 identity() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }
  static Mat3 zero() { return {}; }
  static Mat3 diag(real a, real b, real c) { return {a, 0, 0, 0, b, 0, 0, 0, c}; }
  static Mat3 diag(const Vec3& d) { return diag(d.x, d.y, d.z); }
  /// a * b^T
  static Mat3 outer(const Vec3& a, const Vec3& b) {
    return {a.x * b.x, a.x * b.y, a.x * b.z,
            a.y * b.x, a.y * b.y, a.y * b.z,
            a.z * b.x, a.z * b.y, a.z * b.z};
  }

  real& operator()(int r, int c) { return m[3 * r + c]; }
  real operator()(int r, int c) const { return m[3 * r + c]; }

  Vec3 row(int r) const { return {m[3 * r], m[3 * r + 1], m[3 * r + 2]}; }
  Vec3 col(int c) const { return {m[c], m[c + 3], m[c + 6]}; }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
    return r;
  }
  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
    return r;
  }
  Mat3 operator*(real s) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] * s;
    return r;
  }
  Mat3& operator+=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) m[i] += o.m[i];
    return *this;
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        real s = 0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }
  Vec3 operator*(const Vec3& v) const {
    return {row(0).dot(v), row(1).dot(v), row(2).dot(v)};
  }

  Mat3 transposed() const {
    return {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
  }

  real frobenius() const {
    real s = 0;
    for (real e : m) s += e * e;
    return std::sqrt(s);
  }
  bool finite() const {
    for (real e : m)
      if (!std::isfinite(e)) return false;
    return true;
  }
};

inline Mat3 operator*(real s, const Mat3& a) { return a * s; }

inline real det3(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

inline real trace3(const Mat3& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

/// m - (tr(m)/3) I
inline Mat3 deviator(const Mat3& a) {
  real t = trace3(a) / 3.0;
  Mat3 r = a;
  r(0, 0) -= t;
  r(1, 1) -= t;
  r(2, 2) -= t;
  return r;
}

/// Rotation-variant SVD: u, v are proper rotations (det +1); a reflective
/// input is absorbed into the sign of the smallest singular value, so
/// sigma.x >= sigma.y >= |sigma.z|.
struct Svd3 {
  Mat3 u;
  Vec3 sigma;
  Mat3 v;

  Mat3 reconstruct() const { return u * Mat3::diag(sigma) * v.transposed(); }
};

Svd3 svd3(const Mat3& a);

/// R = U V^T from the SVD of f. Requires det(f) > 0.
Mat3 polar_rotation(const Mat3& f);

}  // namespace vmpm
