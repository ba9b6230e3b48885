#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vmpm/mpm.hpp"

namespace vmpm {

/// One search dimension. Log-scaled entries are searched in log10 space.
struct ParamEntry {
  std::string name;
  real value = 0;
  real lo = 0;
  real hi = 0;
  bool log_scale = false;
};

struct ParamVector {
  std::vector<ParamEntry> entries;

  ParamVector& add(const std::string& name, real value, real lo, real hi,
                   bool log_scale = false);
  const ParamEntry& at(const std::string& name) const;
  real get(const std::string& name) const { return at(name).value; }

  /// Scaled coordinates (log10 where flagged), for the optimizer.
  std::vector<real> to_scaled() const;
  void from_scaled(const std::vector<real>& s);
  void validate() const;
};

/// Mean over frames and particles of squared position error, m^2.
real trajectory_loss(const Trajectory& sim, const Trajectory& ref);

using LossFn = std::function<real(const ParamVector&)>;

/// Central differences in the scaled space of each entry.
std::vector<real> finite_diff_grad(const LossFn& loss, const ParamVector& theta,
                                   real h);

struct CalibrationResult {
  ParamVector theta;
  real loss = 0;
  std::vector<real> loss_history;  // every evaluation, in order
  int evaluations = 0;
};

/// Derivative-free downhill simplex in the scaled parameter space, with one
/// restart on stagnation. Trial points that throw are scored +infinity.
CalibrationResult calibrate(const LossFn& loss, const ParamVector& theta0,
                            int budget);

}  // namespace vmpm
