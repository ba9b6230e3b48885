#pragma once

#include <string>

#include "vmpm/calibrate.hpp"
#include "vmpm/scene.hpp"

namespace vmpm {

struct CalibrateSpec {
  int budget = 60;
  ParamVector params;
  std::string reference_dir;
};

struct RunConfig {
  SceneSpec scene;
  SimConfig sim;
  int frames = 0;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  CalibrateSpec calib;  // used by the calibrate subcommand only
};

/// Parses a JSON run config. Unknown keys anywhere are errors; messages
/// carry the JSON path of the offending key or value.
RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text,
                                const std::string& origin = "<inline>");

/// Serializes the resolved config back to JSON (the manifest payload).
std::string run_config_to_json(const RunConfig& cfg);

/// Applies named calibration entries to the scene's material. Recognized
/// names: youngs_modulus, poisson_ratio, visco_mu, visco_lambda, nu_d, nu_v,
/// coeff_a, coeff_b.
void apply_params(MaterialSet& mat, const ParamVector& params);

}  // namespace vmpm
