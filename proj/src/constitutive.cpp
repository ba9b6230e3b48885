#include "vmpm/constitutive.hpp"

#include <cmath>

namespace vmpm {
namespace {

Vec3 clamped_log_sigma(const Vec3& sigma, ClampCounter* clamps) {
  Vec3 eps;
  for (int i = 0; i < 3; ++i) {
    real s = sigma[i];
    if (s < kSigmaClampLo || s > kSigmaClampHi) {
      s = std::clamp(s, kSigmaClampLo, kSigmaClampHi);
      if (clamps) ++clamps->events;
    }
    eps[i] = std::log(s);
  }
  return eps;
}

}  // namespace

std::pair<real, real> lame_from_young_poisson(real e, real nu) {
  if (!(e > 0)) throw std::domain_error("lame: Young's modulus must be positive");
  if (!(nu > -1 && nu < 0.5 - 1e-4))
    throw std::domain_error("lame: Poisson's ratio out of range (-1, 0.5)");
  real lambda = e * nu / ((1 + nu) * (1 - 2 * nu));
  real mu = e / (2 * (1 + nu));
  return {lambda, mu};
}

ElasticParams ElasticParams::from_young_poisson(real e, real nu) {
  auto [lambda, mu] = lame_from_young_poisson(e, nu);
  return {e, nu, lambda, mu};
}

real corotated_energy(const Mat3& f_e, real lambda, real mu) {
  real j = det3(f_e);
  if (j <= 0) throw std::domain_error("corotated_energy: inverted element");
  Svd3 s = svd3(f_e);
  real dev = 0;
  for (int i = 0; i < 3; ++i) {
    real d = s.sigma[i] - 1;
    dev += d * d;
  }
  return mu * dev + 0.5 * lambda * (j - 1) * (j - 1);
}

Mat3 corotated_kirchhoff(const Mat3& f_e, real lambda, real mu) {
  real j = det3(f_e);
  if (j <= 0) throw std::domain_error("corotated_kirchhoff: inverted element");
  Mat3 r = polar_rotation(f_e);
  Mat3 tau = 2 * mu * ((f_e - r) * f_e.transposed());
  real vol = lambda * j * (j - 1);
  tau(0, 0) += vol;
  tau(1, 1) += vol;
  tau(2, 2) += vol;
  return tau;
}

real hencky_energy(const Mat3& f_n, real lambda_n, real mu_n,
                   ClampCounter* clamps) {
  Svd3 s = svd3(f_n);
  Vec3 eps = clamped_log_sigma(s.sigma, clamps);
  real tr = eps.sum();
  return mu_n * eps.norm2() + 0.5 * lambda_n * tr * tr;
}

Mat3 hencky_kirchhoff(const Mat3& f_n, real lambda_n, real mu_n,
                      ClampCounter* clamps) {
  if (det3(f_n) <= 0)
    throw std::domain_error("hencky_kirchhoff: inverted element");
  Svd3 s = svd3(f_n);
  Vec3 eps = clamped_log_sigma(s.sigma, clamps);
  real tr = eps.sum();
  Vec3 tau_p = 2 * mu_n * eps + Vec3{1, 1, 1} * (lambda_n * tr);
  return s.u * Mat3::diag(tau_p) * s.u.transposed();
}

std::pair<real, real> derive_ab(const ViscoParams& visco, real dt) {
  if (dt < 0) throw std::domain_error("derive_ab: negative dt");
  if (visco.direct_ab) return {visco.coeff_a, visco.coeff_b};

  // Deviatoric part: (1 + 2 dt mu_n / nu_d) eps' = eps_tr.
  real a = 1.0;
  if (dt > 0 && std::isfinite(visco.nu_d))
    a = 1.0 / (1.0 + 2.0 * dt * visco.lame_mu_n / visco.nu_d);

  // Trace part: (1 + 2 dt (2 mu_n + 3 lambda_n) / (3 nu_v)) tr' = tr_tr,
  // and the update form gives tr' = a (1 - 3b) tr_tr.
  real c = 1.0;
  if (dt > 0 && std::isfinite(visco.nu_v))
    c = 1.0 / (1.0 + 2.0 * dt * (2.0 * visco.lame_mu_n + 3.0 * visco.lame_lambda_n) /
                         (3.0 * visco.nu_v));

  real b = (a == 0) ? 0.0 : (1.0 - c / a) / 3.0;
  return {a, b};
}

Mat3 viscous_return_map(const Mat3& f_n_trial, real a, real b,
                        ClampCounter* clamps) {
  if (det3(f_n_trial) <= 0)
    throw std::domain_error("viscous_return_map: inverted trial gradient");
  if (a == 1.0 && b == 0.0) return f_n_trial;  // elastic limit, bit-exact
  Svd3 s = svd3(f_n_trial);
  Vec3 eps = clamped_log_sigma(s.sigma, clamps);
  real tr = eps.sum();
  Vec3 eps_new = a * (eps - Vec3{1, 1, 1} * (b * tr));
  Vec3 sig_new{std::exp(eps_new.x), std::exp(eps_new.y), std::exp(eps_new.z)};
  return s.u * Mat3::diag(sig_new) * s.v.transposed();
}

StressPair total_stress(const Mat3& f_e, const Mat3& f_n,
                        const ElasticParams& elastic, const ViscoParams& visco,
                        ClampCounter* clamps) {
  StressPair out;
  out.tau_e = corotated_kirchhoff(f_e, elastic.lame_lambda, elastic.lame_mu);
  out.tau_n = hencky_kirchhoff(f_n, visco.lame_lambda_n, visco.lame_mu_n, clamps);
  return out;
}

}  // namespace vmpm
