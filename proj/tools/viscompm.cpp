#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vmpm/config.hpp"
#include "vmpm/io.hpp"
#include "vmpm/kernels.hpp"

namespace fs = std::filesystem;
using namespace vmpm;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int frames_override = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool deterministic = true;
};

RunConfig load_config(const CommonOpts& opts) {
  RunConfig cfg = parse_run_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.frames_override >= 0) cfg.frames = opts.frames_override;
  if (opts.seed_set) {
    cfg.seed = opts.seed;
    cfg.scene.seed = opts.seed;
  }
  cfg.sim.deterministic = opts.deterministic;
  return cfg;
}

void write_manifest(const RunConfig& cfg) {
  std::ofstream out(cfg.output_dir + "/manifest.json");
  out << run_config_to_json(cfg) << "\n";
}

int run_simulate(const CommonOpts& opts) {
  RunConfig cfg = load_config(opts);
  fs::create_directories(cfg.output_dir);

  std::vector<Particle> particles = build_scene(cfg.scene, cfg.sim);
  std::vector<MaterialSet> materials{cfg.scene.material};
  FrameHook hook = [&cfg](std::vector<Particle>& ps, int frame) {
    apply_impulse_and_anchors(ps, frame, cfg.scene);
  };

  Trajectory traj = simulate(particles, materials, cfg.sim, cfg.frames, hook);

  write_trajectory_dir(cfg.output_dir, traj);
  write_diagnostics_csv(cfg.output_dir + "/diagnostics.csv", traj.diagnostics);
  write_manifest(cfg);
  std::cout << "wrote " << traj.frames.size() << " frames ("
            << particles.size() << " particles) to " << cfg.output_dir
            << " [kernels: " << kernels::variant() << "]\n";
  return 0;
}

int run_calibrate(const CommonOpts& opts, const std::string& ref_dir_flag) {
  RunConfig cfg = load_config(opts);
  if (cfg.calib.params.entries.empty())
    throw std::runtime_error("calibrate: config has no calibrate.params");
  std::string ref_dir =
      ref_dir_flag.empty() ? cfg.calib.reference_dir : ref_dir_flag;
  if (ref_dir.empty())
    throw std::runtime_error("calibrate: no reference directory given");

  fs::create_directories(cfg.output_dir);
  Trajectory ref = read_trajectory_dir(ref_dir);

  std::vector<Vec3> points = load_particles(cfg.scene.particle_source);
  std::vector<Particle> initial =
      build_scene_from_points(points, cfg.scene, cfg.sim);
  if (!ref.frames.empty() && ref.frames[0].size() != initial.size())
    throw std::runtime_error(
        "calibrate: reference frame 0 has " +
        std::to_string(ref.frames[0].size()) + " particles, scene has " +
        std::to_string(initial.size()));
  int frames = static_cast<int>(ref.frames.size()) - 1;

  LossFn loss = [&](const ParamVector& theta) {
    std::vector<Particle> particles = initial;
    std::vector<MaterialSet> materials{cfg.scene.material};
    apply_params(materials[0], theta);
    FrameHook hook = [&cfg](std::vector<Particle>& ps, int frame) {
      apply_impulse_and_anchors(ps, frame, cfg.scene);
    };
    Trajectory sim = simulate(particles, materials, cfg.sim, frames, hook);
    return trajectory_loss(sim, ref);
  };

  CalibrationResult result = calibrate(loss, cfg.calib.params, cfg.calib.budget);

  nlohmann::json theta_json;
  for (const auto& e : result.theta.entries) theta_json[e.name] = e.value;
  theta_json["loss"] = result.loss;
  theta_json["evaluations"] = result.evaluations;
  std::ofstream(cfg.output_dir + "/theta_best.json") << theta_json.dump(2)
                                                     << "\n";
  std::ofstream hist(cfg.output_dir + "/loss_history.csv");
  hist << "evaluation,loss,best_so_far\n";
  real best = std::numeric_limits<real>::infinity();
  for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
    best = std::min(best, result.loss_history[i]);
    hist << i << "," << result.loss_history[i] << "," << best << "\n";
  }
  write_manifest(cfg);
  std::cout << "best loss " << result.loss << " after " << result.evaluations
            << " evaluations\n";
  for (const auto& e : result.theta.entries)
    std::cout << "  " << e.name << " = " << e.value << "\n";
  return 0;
}

int run_fill(const std::string& input, const std::string& output,
             std::array<int, 3> res, int seed_per_voxel, std::uint64_t seed) {
  std::vector<Vec3> points = load_particles(input);
  FillSpec spec;
  spec.voxel_resolution = res;
  spec.seed_per_voxel = seed_per_voxel;
  FillResult fr = internal_fill(points, spec, seed);
  std::ofstream out(output);
  if (!out) throw std::runtime_error("fill: cannot open " + output);
  out.precision(17);
  for (const Vec3& p : fr.points)
    out << p.x << "," << p.y << "," << p.z << "\n";
  if (fr.nothing_to_fill)
    std::cout << "nothing to fill (no enclosed interior voxels)\n";
  else
    std::cout << "seeded " << fr.seeded << " interior points ("
              << points.size() << " -> " << fr.points.size() << ")\n";
  return 0;
}

int run_slice(const std::string& frames_dir, const std::string& output,
              int row, int axis, int width, int height) {
  Trajectory traj = read_trajectory_dir(frames_dir);

  ViewSpec view;
  view.axis = axis;
  view.width = width;
  view.height = height;
  Vec3 lo = traj.frames[0][0], hi = lo;
  for (const auto& frame : traj.frames)
    for (const Vec3& p : frame) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
  Vec3 pad = (hi - lo) * 0.05 + Vec3{1e-6, 1e-6, 1e-6};
  view.domain_lo = lo - pad;
  view.domain_hi = hi + pad;

  SliceSpec spec;
  spec.row = row;
  spec.view = view;
  Image img = spacetime_slice(traj.frames, spec);
  write_pgm(output, img);
  std::cout << "wrote " << img.height << "x" << img.width << " slice to "
            << output << "\n";
  return 0;
}

int run_inspect(const std::string& dir) {
  std::ifstream manifest(dir + "/manifest.json");
  if (manifest) {
    std::cout << "manifest:\n" << manifest.rdbuf() << "\n";
  } else {
    std::cout << "no manifest.json in " << dir << "\n";
  }
  std::ifstream diag(dir + "/diagnostics.csv");
  if (diag) {
    std::string line;
    std::getline(diag, line);  // header
    int frames = 0;
    real max_v = 0, last_ke = 0, last_ee = 0;
    std::uint64_t clamps = 0;
    while (std::getline(diag, line)) {
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      int f;
      real ke, ee, mv;
      std::uint64_t cl, oob;
      if (ss >> f >> ke >> ee >> mv >> cl >> oob) {
        ++frames;
        max_v = std::max(max_v, mv);
        last_ke = ke;
        last_ee = ee;
        clamps += cl;
      }
    }
    std::cout << "diagnostics: " << frames << " frames, max |v| = " << max_v
              << " m/s, final kinetic = " << last_ke
              << " J, final elastic = " << last_ee
              << " J, clamp events = " << clamps << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Viscoelastic MPM simulator and parameter calibration"};
  app.require_subcommand(1);

  CommonOpts opts;
  bool no_det = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON run config")
        ->required();
    sub->add_option("--out", opts.out_dir, "output directory override");
    sub->add_option("--frames", opts.frames_override, "frame count override");
    sub->add_option("--seed", opts.seed, "seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sub->add_flag("--no-deterministic", no_det,
                  "disable deterministic mode (default on)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "run a simulation");
  add_common(sim);

  CLI::App* cal = app.add_subcommand("calibrate", "fit material parameters");
  add_common(cal);
  std::string ref_dir;
  cal->add_option("--ref", ref_dir, "reference trajectory directory");

  CLI::App* fill = app.add_subcommand("fill", "fill hollow shells (CSV in/out)");
  std::string fill_in, fill_out;
  std::array<int, 3> fill_res{32, 32, 32};
  int seed_per_voxel = 1;
  std::uint64_t fill_seed = 0;
  fill->add_option("--input", fill_in, "input CSV/PLY")->required();
  fill->add_option("--output", fill_out, "output CSV")->required();
  fill->add_option("--resolution", fill_res, "voxel resolution (3 ints)");
  fill->add_option("--seed-per-voxel", seed_per_voxel, "points per voxel");
  fill->add_option("--seed", fill_seed, "jitter seed");

  CLI::App* slice = app.add_subcommand("slice", "space-time slice image");
  std::string slice_frames, slice_out = "slice.pgm";
  int slice_row = 128, slice_axis = 1, slice_w = 256, slice_h = 256;
  slice->add_option("--frames-dir", slice_frames, "frame dump directory")
      ->required();
  slice->add_option("--output", slice_out, "output PGM path");
  slice->add_option("--row", slice_row, "image row to extract");
  slice->add_option("--axis", slice_axis, "projection axis (0/1/2)");
  slice->add_option("--width", slice_w, "image width");
  slice->add_option("--height", slice_h, "image height");

  CLI::App* inspect = app.add_subcommand("inspect", "summarize a run directory");
  std::string inspect_dir;
  inspect->add_option("dir", inspect_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);
  opts.deterministic = !no_det;

  try {
    if (sim->parsed()) return run_simulate(opts);
    if (cal->parsed()) return run_calibrate(opts, ref_dir);
    if (fill->parsed())
      return run_fill(fill_in, fill_out, fill_res, seed_per_voxel, fill_seed);
    if (slice->parsed())
      return run_slice(slice_frames, slice_out, slice_row, slice_axis, slice_w,
                       slice_h);
    if (inspect->parsed()) return run_inspect(inspect_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
