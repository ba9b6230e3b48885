#include "vmpm/tensor3.hpp"

#include <algorithm>
#include <utility>

namespace vmpm {
namespace {

// Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix.
// Returns eigenvalues in w and eigenvectors as columns of q.
void jacobi_eigen_sym3(const Mat3& s, Vec3& w, Mat3& q) {
  Mat3 a = s;
  q = Mat3::identity();
  for (int sweep = 0; sweep < 32; ++sweep) {
    real off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off < 1e-30) break;
    for (int p = 0; p < 2; ++p) {
      for (int r = p + 1; r < 3; ++r) {
        real apr = a(p, r);
        if (std::abs(apr) < 1e-300) continue;
        real theta = (a(r, r) - a(p, p)) / (2 * apr);
        real t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0) t = -t;
        real c = 1.0 / std::sqrt(t * t + 1.0);
        real sn = t * c;
        for (int k = 0; k < 3; ++k) {
          real akp = a(k, p), akr = a(k, r);
          a(k, p) = c * akp - sn * akr;
          a(k, r) = sn * akp + c * akr;
        }
        for (int k = 0; k < 3; ++k) {
          real apk = a(p, k), ark = a(r, k);
          a(p, k) = c * apk - sn * ark;
          a(r, k) = sn * apk + c * ark;
        }
        for (int k = 0; k < 3; ++k) {
          real qkp = q(k, p), qkr = q(k, r);
          q(k, p) = c * qkp - sn * qkr;
          q(k, r) = sn * qkp + c * qkr;
        }
      }
    }
  }
  w = {a(0, 0), a(1, 1), a(2, 2)};
}

}  // namespace

Svd3 svd3(const Mat3& a) {
  if (!a.finite()) throw std::domain_error("svd3: non-finite input");

  // Eigen-decompose A^T A; singular values are sqrt of its eigenvalues.
  Mat3 ata = a.transposed() * a;
  Vec3 w;
  Mat3 q;
  jacobi_eigen_sym3(ata, w, q);

  // Sort descending; ties keep the input ordering of the eigenvectors.
  std::array<int, 3> idx = {0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int i, int j) { return w[i] > w[j]; });

  Svd3 out;
  Mat3 v;
  for (int c = 0; c < 3; ++c) {
    out.sigma[c] = std::sqrt(std::max(w[idx[c]], real(0)));
    for (int r = 0; r < 3; ++r) v(r, c) = q(r, idx[c]);
  }

  // Make V a proper rotation.
  if (det3(v) < 0)
    for (int r = 0; r < 3; ++r) v(r, 2) = -v(r, 2);

  // U columns from A v_i / sigma_i, with orthonormal completion when a
  // singular value is too small to normalize against.
  Mat3 b = a * v;
  Mat3 u;
  const real tiny = 1e-12 * std::max(real(1), out.sigma[0]);
  Vec3 u0, u1;
  if (out.sigma[0] > tiny) {
    u0 = b.col(0) / out.sigma[0];
  } else {
    u0 = {1, 0, 0};
  }
  if (out.sigma[1] > tiny) {
    u1 = b.col(1) / out.sigma[1];
    u1 = (u1 - u0 * u0.dot(u1)).normalized();
  } else {
    // Any unit vector orthogonal to u0.
    Vec3 seed = std::abs(u0.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    u1 = (seed - u0 * u0.dot(seed)).normalized();
  }
  Vec3 u2 = u0.cross(u1);
  for (int r = 0; r < 3; ++r) {
    u(r, 0) = u0[r];
    u(r, 1) = u1[r];
    u(r, 2) = u2[r];
  }

  // A reflective input shows up as det(A) < 0; absorb it into the sign of
  // the smallest singular value so both factors stay rotations.
  if (out.sigma[2] > tiny && (a.col(0).cross(a.col(1)).dot(a.col(2))) < 0)
    out.sigma[2] = -out.sigma[2];

  out.u = u;
  out.v = v;

  // One polish pass: re-derive sigma from U^T A V to reduce the sqrt
  // rounding from the eigenvalue route.
  Mat3 d = u.transposed() * a * v;
  out.sigma = {d(0, 0), d(1, 1), d(2, 2)};

  return out;
}

Mat3 polar_rotation(const Mat3& f) {
  if (det3(f) <= 0)
    throw std::domain_error("polar_rotation: non-positive determinant");
  Svd3 s = svd3(f);
  return s.u * s.v.transposed();
}

}  // namespace vmpm
