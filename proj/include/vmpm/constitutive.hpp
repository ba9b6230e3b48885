#pragma once

#include <cstdint>
#include <limits>

#include "vmpm/tensor3.hpp"

namespace vmpm {

/// Sentinel for "no viscous dissipation" on a viscosity field.
inline constexpr real kNoDissipation = std::numeric_limits<real>::infinity();

/// Singular values of the viscoelastic gradient are clamped to this range
/// before taking logs; clamp events are counted for diagnostics.
inline constexpr real kSigmaClampLo = 0.05;
inline constexpr real kSigmaClampHi = 20.0;

struct ElasticParams {
  real youngs_e = 0;
  real poisson_nu = 0;
  real lame_lambda = 0;
  real lame_mu = 0;

  static ElasticParams from_young_poisson(real e, real nu);
};

/// (lambda, mu) from Young's modulus and Poisson's ratio.
std::pair<real, real> lame_from_young_poisson(real e, real nu);

struct ViscoParams {
  real lame_lambda_n = 0;
  real lame_mu_n = 0;
  real nu_d = kNoDissipation;  // deviatoric viscosity, Pa*s
  real nu_v = kNoDissipation;  // dilational viscosity, Pa*s
  // Per-substep correction coefficients. Either derived from the
  // viscosities via derive_ab, or set directly when calibrating (a, b)
  // themselves.
  real coeff_a = 1.0;
  real coeff_b = 0.0;
  bool direct_ab = false;  // if set, coeff_a/coeff_b are authoritative

  /// Both viscosities tied to one value.
  static ViscoParams tied(real lambda_n, real mu_n, real nu) {
    ViscoParams p;
    p.lame_lambda_n = lambda_n;
    p.lame_mu_n = mu_n;
    p.nu_d = nu;
    p.nu_v = nu;
    return p;
  }
};

struct StressPair {
  Mat3 tau_e;
  Mat3 tau_n;
  Mat3 total() const { return tau_e + tau_n; }
};

/// Counts singular-value clamp events in the viscoelastic branch.
struct ClampCounter {
  std::uint64_t events = 0;
};

/// Fixed corotated energy density: mu*sum(sigma_i-1)^2 + lambda/2*(J-1)^2.
real corotated_energy(const Mat3& f_e, real lambda, real mu);

/// Kirchhoff stress of the fixed corotated model:
/// tau = 2 mu (F - R) F^T + lambda J (J - 1) I.
Mat3 corotated_kirchhoff(const Mat3& f_e, real lambda, real mu);

/// Hencky energy density of the viscoelastic branch:
/// mu_n*|log Sigma|^2 + lambda_n/2*(tr log Sigma)^2.
real hencky_energy(const Mat3& f_n, real lambda_n, real mu_n,
                   ClampCounter* clamps = nullptr);

/// Kirchhoff stress of the log-principal (Hencky) branch:
/// principal values 2 mu_n eps + lambda_n tr(eps) 1, rotated back as
/// U diag(tau) U^T.
Mat3 hencky_kirchhoff(const Mat3& f_n, real lambda_n, real mu_n,
                      ClampCounter* clamps = nullptr);

/// Closed-form solve of the implicit viscous strain update
/// eps^{n+1} = eps_tr - dt * dPsiV/dtau(eps^{n+1}) for the correction
/// coefficients: deviatoric part eps' = a * dev(eps_tr), trace part
/// tr(eps') = a(1-3b) * tr(eps_tr).
std::pair<real, real> derive_ab(const ViscoParams& visco, real dt);

/// Applies eps' = a (eps_tr - b tr(eps_tr) 1) in the log-principal frame
/// of the trial gradient.
Mat3 viscous_return_map(const Mat3& f_n_trial, real a, real b,
                        ClampCounter* clamps = nullptr);

StressPair total_stress(const Mat3& f_e, const Mat3& f_n,
                        const ElasticParams& elastic, const ViscoParams& visco,
                        ClampCounter* clamps = nullptr);

}  // namespace vmpm
