#include "vmpm/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "vmpm/kernels.hpp"

namespace vmpm {

ParamVector& ParamVector::add(const std::string& name, real value, real lo,
                              real hi, bool log_scale) {
  entries.push_back({name, value, lo, hi, log_scale});
  return *this;
}

const ParamEntry& ParamVector::at(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw std::out_of_range("ParamVector: no entry named " + name);
}

std::vector<real> ParamVector::to_scaled() const {
  std::vector<real> s;
  s.reserve(entries.size());
  for (const auto& e : entries)
    s.push_back(e.log_scale ? std::log10(e.value) : e.value);
  return s;
}

void ParamVector::from_scaled(const std::vector<real>& s) {
  if (s.size() != entries.size())
    throw std::invalid_argument("ParamVector: scaled size mismatch");
  for (std::size_t i = 0; i < s.size(); ++i) {
    real v = entries[i].log_scale ? std::pow(10.0, s[i]) : s[i];
    entries[i].value = std::clamp(v, entries[i].lo, entries[i].hi);
  }
}

void ParamVector::validate() const {
  for (const auto& e : entries) {
    if (!(e.lo <= e.value && e.value <= e.hi))
      throw std::invalid_argument("ParamVector: entry " + e.name +
                                  " out of bounds");
    if (e.log_scale && !(e.lo > 0))
      throw std::invalid_argument("ParamVector: log-scaled entry " + e.name +
                                  " needs positive bounds");
  }
}

real trajectory_loss(const Trajectory& sim, const Trajectory& ref) {
  if (sim.frames.size() != ref.frames.size())
    throw std::invalid_argument("trajectory_loss: frame count mismatch (" +
                                std::to_string(sim.frames.size()) + " vs " +
                                std::to_string(ref.frames.size()) + ")");
  if (sim.frames.empty()) return 0;
  real total = 0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < sim.frames.size(); ++f) {
    const auto& a = sim.frames[f];
    const auto& b = ref.frames[f];
    if (a.size() != b.size())
      throw std::invalid_argument("trajectory_loss: particle count mismatch "
                                  "at frame " + std::to_string(f));
    if (a.empty()) continue;
    static_assert(sizeof(Vec3) == 3 * sizeof(real));
    total += kernels::active().sum_sq_diff(&a[0].x, &b[0].x, 3 * a.size());
    count += a.size();
  }
  return count ? total / static_cast<real>(count) : 0;
}

std::vector<real> finite_diff_grad(const LossFn& loss, const ParamVector& theta,
                                   real h) {
  if (!(h > 0)) throw std::invalid_argument("finite_diff_grad: h must be > 0");
  std::vector<real> s0 = theta.to_scaled();
  std::vector<real> grad(s0.size());
  for (std::size_t i = 0; i < s0.size(); ++i) {
    ParamVector plus = theta, minus = theta;
    std::vector<real> sp = s0, sm = s0;
    sp[i] += h;
    sm[i] -= h;
    plus.from_scaled(sp);
    minus.from_scaled(sm);
    real lp, lm;
    try {
      lp = loss(plus);
      lm = loss(minus);
    } catch (const std::exception& e) {
      throw std::runtime_error("finite_diff_grad: evaluation failed for " +
                               theta.entries[i].name + ": " + e.what());
    }
    grad[i] = (lp - lm) / (2 * h);
  }
  return grad;
}

namespace {

real safe_eval(const LossFn& loss, const ParamVector& theta,
               CalibrationResult& result) {
  real v;
  try {
    v = loss(theta);
    if (std::isnan(v)) v = std::numeric_limits<real>::infinity();
  } catch (const std::exception&) {
    v = std::numeric_limits<real>::infinity();
  }
  ++result.evaluations;
  result.loss_history.push_back(v);
  if (v < result.loss) {
    result.loss = v;
    result.theta = theta;
  }
  return v;
}

}  // namespace

CalibrationResult calibrate(const LossFn& loss, const ParamVector& theta0,
                            int budget) {
  if (budget < 0) throw std::invalid_argument("calibrate: negative budget");
  theta0.validate();

  CalibrationResult result;
  result.theta = theta0;
  result.loss = std::numeric_limits<real>::infinity();
  if (budget == 0) {
    // Still report the starting loss without counting it against the budget.
    try {
      result.loss = loss(theta0);
    } catch (const std::exception&) {
      result.loss = std::numeric_limits<real>::infinity();
    }
    return result;
  }

  const std::size_t n = theta0.entries.size();

  // Bounds of the scaled coordinates; simplex vertices are kept inside them
  // so points beyond a bound do not alias to the same clamped parameter.
  std::vector<real> scaled_lo(n), scaled_hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ParamEntry& e = theta0.entries[i];
    scaled_lo[i] = e.log_scale ? std::log10(e.lo) : e.lo;
    scaled_hi[i] = e.log_scale ? std::log10(e.hi) : e.hi;
  }
  auto clamp_scaled = [&](std::vector<real> v) {
    for (std::size_t i = 0; i < n; ++i)
      v[i] = std::clamp(v[i], scaled_lo[i], scaled_hi[i]);
    return v;
  };

  auto make_theta = [&](const std::vector<real>& s) {
    ParamVector t = theta0;
    t.from_scaled(s);
    return t;
  };

  // Initial simplex: center plus one perturbed vertex per dimension; the
  // restart flips the perturbation direction to escape a bad first probe.
  auto init_simplex = [&](const std::vector<real>& center, real sign) {
    std::vector<std::vector<real>> simplex{clamp_scaled(center)};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<real> v = simplex[0];
      const ParamEntry& e = theta0.entries[i];
      real step = e.log_scale ? 0.5 : 0.1 * (e.hi - e.lo);
      if (step == 0) step = 0.5;
      v[i] += sign * step;
      if (v[i] > scaled_hi[i] || v[i] < scaled_lo[i]) v[i] -= 2 * sign * step;
      simplex.push_back(clamp_scaled(v));
    }
    return simplex;
  };

  std::vector<std::vector<real>> simplex =
      init_simplex(theta0.to_scaled(), 1.0);
  std::vector<real> fvals;
  for (const auto& v : simplex) {
    if (result.evaluations >= budget) break;
    fvals.push_back(safe_eval(loss, make_theta(v), result));
  }
  while (fvals.size() < simplex.size())
    fvals.push_back(std::numeric_limits<real>::infinity());

  bool restarted = false;
  const real alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;

  while (result.evaluations < budget) {
    std::vector<std::size_t> order(simplex.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });

    std::size_t best = order.front(), worst = order.back();
    std::size_t second_worst = order[order.size() - 2];

    // Stagnation: simplex collapsed in scaled space.
    real spread = 0;
    for (std::size_t i = 0; i < n; ++i) {
      real mn = simplex[0][i], mx = simplex[0][i];
      for (const auto& v : simplex) {
        mn = std::min(mn, v[i]);
        mx = std::max(mx, v[i]);
      }
      spread = std::max(spread, mx - mn);
    }
    if (spread < 1e-7 || !std::isfinite(fvals[best])) {
      if (restarted) break;
      restarted = true;
      simplex = init_simplex(simplex[best], -1.0);
      fvals.assign(simplex.size(), std::numeric_limits<real>::infinity());
      for (std::size_t i = 0;
           i < simplex.size() && result.evaluations < budget; ++i)
        fvals[i] = safe_eval(loss, make_theta(simplex[i]), result);
      continue;
    }

    // Centroid of all but the worst vertex.
    std::vector<real> centroid(n, 0);
    for (std::size_t vi = 0; vi < simplex.size(); ++vi) {
      if (vi == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[vi][i];
    }
    for (real& c : centroid) c /= static_cast<real>(simplex.size() - 1);

    auto blend = [&](real t) {
      std::vector<real> v(n);
      for (std::size_t i = 0; i < n; ++i)
        v[i] = centroid[i] + t * (centroid[i] - simplex[worst][i]);
      return clamp_scaled(v);
    };

    std::vector<real> refl = blend(alpha);
    real f_refl = safe_eval(loss, make_theta(refl), result);

    if (f_refl < fvals[best] && result.evaluations < budget) {
      std::vector<real> exp_v = blend(gamma);
      real f_exp = safe_eval(loss, make_theta(exp_v), result);
      if (f_exp < f_refl) {
        simplex[worst] = exp_v;
        fvals[worst] = f_exp;
      } else {
        simplex[worst] = refl;
        fvals[worst] = f_refl;
      }
    } else if (f_refl < fvals[second_worst]) {
      simplex[worst] = refl;
      fvals[worst] = f_refl;
    } else if (result.evaluations < budget) {
      std::vector<real> con = blend(f_refl < fvals[worst] ? rho : -rho);
      real f_con = safe_eval(loss, make_theta(con), result);
      if (f_con < std::min(f_refl, fvals[worst])) {
        simplex[worst] = con;
        fvals[worst] = f_con;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t vi = 0;
             vi < simplex.size() && result.evaluations < budget; ++vi) {
          if (vi == best) continue;
          for (std::size_t i = 0; i < n; ++i)
            simplex[vi][i] =
                simplex[best][i] + shrink * (simplex[vi][i] - simplex[best][i]);
          fvals[vi] = safe_eval(loss, make_theta(simplex[vi]), result);
        }
      }
    }
  }

  if (!std::isfinite(result.loss)) {
    // Nothing evaluated successfully; fall back to the start point.
    result.theta = theta0;
  }
  return result;
}

}  // namespace vmpm
