#include "vmpm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vmpm {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::runtime_error("config: " + path + ": " + msg);
}

// Unknown keys are errors, not warnings: a typo silently ignored would
// corrupt calibration studies.
void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail(path + "." + key, "unknown key");
}

Vec3 get_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected [x, y, z]");
  return {j[0].get<real>(), j[1].get<real>(), j[2].get<real>()};
}

std::array<int, 3> get_dims(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected 3 integers");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

Aabb get_box(const json& j, const std::string& path) {
  check_keys(j, {"lo", "hi"}, path);
  if (!j.contains("lo") || !j.contains("hi")) fail(path, "needs lo and hi");
  return {get_vec3(j["lo"], path + ".lo"), get_vec3(j["hi"], path + ".hi")};
}

MaterialSet parse_material(const json& j, const std::string& path) {
  check_keys(j,
             {"youngs_modulus", "poisson_ratio", "visco_mu", "visco_lambda",
              "nu_d", "nu_v", "coeff_a", "coeff_b", "direct_ab"},
             path);
  real e = j.value("youngs_modulus", 1e4);
  real nu = j.value("poisson_ratio", 0.3);
  MaterialSet mat;
  mat.elastic = ElasticParams::from_young_poisson(e, nu);
  // Viscoelastic Lame pair defaults to the elastic pair.
  mat.visco.lame_lambda_n = j.value("visco_lambda", mat.elastic.lame_lambda);
  mat.visco.lame_mu_n = j.value("visco_mu", mat.elastic.lame_mu);
  mat.visco.nu_d = j.value("nu_d", kNoDissipation);
  mat.visco.nu_v = j.value("nu_v", kNoDissipation);
  mat.visco.direct_ab = j.value("direct_ab", false);
  mat.visco.coeff_a = j.value("coeff_a", 1.0);
  mat.visco.coeff_b = j.value("coeff_b", 0.0);
  return mat;
}

SceneSpec parse_scene(const json& j, const std::string& path) {
  check_keys(j,
             {"particle_source", "density", "initial_velocity", "fill",
              "anchors", "impulses", "material"},
             path);
  SceneSpec s;
  if (!j.contains("particle_source"))
    fail(path + ".particle_source", "required");
  s.particle_source = j["particle_source"].get<std::string>();
  s.density_rho = j.value("density", 1000.0);
  if (!(s.density_rho > 0)) fail(path + ".density", "must be positive");
  if (j.contains("initial_velocity"))
    s.initial_velocity =
        get_vec3(j["initial_velocity"], path + ".initial_velocity");
  if (j.contains("fill")) {
    check_keys(j["fill"], {"voxel_resolution", "seed_per_voxel"},
               path + ".fill");
    FillSpec f;
    if (j["fill"].contains("voxel_resolution"))
      f.voxel_resolution =
          get_dims(j["fill"]["voxel_resolution"], path + ".fill.voxel_resolution");
    f.seed_per_voxel = j["fill"].value("seed_per_voxel", 1);
    s.fill = f;
  }
  if (j.contains("anchors")) {
    int i = 0;
    for (const auto& a : j["anchors"])
      s.anchors.push_back(
          get_box(a, path + ".anchors[" + std::to_string(i++) + "]"));
  }
  if (j.contains("impulses")) {
    int i = 0;
    for (const auto& imp : j["impulses"]) {
      std::string p = path + ".impulses[" + std::to_string(i++) + "]";
      check_keys(imp, {"lo", "hi", "acceleration", "start_frame", "end_frame"},
                 p);
      ImpulseSpec is;
      is.region = {get_vec3(imp["lo"], p + ".lo"),
                   get_vec3(imp["hi"], p + ".hi")};
      is.acceleration = get_vec3(imp["acceleration"], p + ".acceleration");
      is.start_frame = imp.value("start_frame", 0);
      is.end_frame = imp.value("end_frame", 0);
      if (is.start_frame > is.end_frame)
        fail(p, "start_frame must be <= end_frame");
      s.impulses.push_back(is);
    }
  }
  if (j.contains("material"))
    s.material = parse_material(j["material"], path + ".material");
  else
    s.material.elastic = ElasticParams::from_young_poisson(1e4, 0.3);
  return s;
}

SimConfig parse_sim(const json& j, const std::string& path) {
  check_keys(j,
             {"grid_dims", "dx", "dt", "substeps_per_frame", "gravity",
              "boundary_margin", "boundary_policy", "deterministic"},
             path);
  SimConfig c;
  if (j.contains("grid_dims"))
    c.grid_dims = get_dims(j["grid_dims"], path + ".grid_dims");
  c.dx = j.value("dx", c.dx);
  c.dt = j.value("dt", c.dt);
  c.substeps_per_frame = j.value("substeps_per_frame", c.substeps_per_frame);
  if (j.contains("gravity")) c.gravity = get_vec3(j["gravity"], path + ".gravity");
  c.boundary_margin = j.value("boundary_margin", c.boundary_margin);
  if (j.contains("boundary_policy")) {
    std::string p = j["boundary_policy"].get<std::string>();
    if (p == "sticky") c.boundary_policy = BoundaryPolicy::sticky;
    else if (p == "slip") c.boundary_policy = BoundaryPolicy::slip;
    else fail(path + ".boundary_policy", "must be \"sticky\" or \"slip\"");
  }
  c.deterministic = j.value("deterministic", true);
  c.validate();
  return c;
}

CalibrateSpec parse_calibrate(const json& j, const std::string& path) {
  check_keys(j, {"budget", "params", "reference_dir"}, path);
  CalibrateSpec c;
  c.budget = j.value("budget", 60);
  if (c.budget < 0) fail(path + ".budget", "must be >= 0");
  c.reference_dir = j.value("reference_dir", std::string{});
  if (!j.contains("params") || j["params"].empty())
    fail(path + ".params", "at least one parameter required");
  int i = 0;
  for (const auto& p : j["params"]) {
    std::string pp = path + ".params[" + std::to_string(i++) + "]";
    check_keys(p, {"name", "init", "lo", "hi", "log"}, pp);
    for (const char* req : {"name", "init", "lo", "hi"})
      if (!p.contains(req)) fail(pp + "." + req, "required");
    c.params.add(p["name"].get<std::string>(), p["init"].get<real>(),
                 p["lo"].get<real>(), p["hi"].get<real>(),
                 p.value("log", false));
  }
  c.params.validate();
  return c;
}

RunConfig parse_json(const json& j, const std::string& origin) {
  check_keys(j, {"scene", "sim", "frames", "output_dir", "seed", "calibrate"},
             origin);
  RunConfig cfg;
  if (!j.contains("scene")) fail(origin + ".scene", "required");
  cfg.scene = parse_scene(j["scene"], origin + ".scene");
  if (j.contains("sim")) cfg.sim = parse_sim(j["sim"], origin + ".sim");
  cfg.frames = j.value("frames", 0);
  if (cfg.frames < 0) fail(origin + ".frames", "must be >= 0");
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.scene.seed = cfg.seed;
  if (j.contains("calibrate"))
    cfg.calib = parse_calibrate(j["calibrate"], origin + ".calibrate");
  return cfg;
}

json material_to_json(const MaterialSet& m) {
  json j;
  j["youngs_modulus"] = m.elastic.youngs_e;
  j["poisson_ratio"] = m.elastic.poisson_nu;
  j["visco_mu"] = m.visco.lame_mu_n;
  j["visco_lambda"] = m.visco.lame_lambda_n;
  if (std::isfinite(m.visco.nu_d)) j["nu_d"] = m.visco.nu_d;
  if (std::isfinite(m.visco.nu_v)) j["nu_v"] = m.visco.nu_v;
  if (m.visco.direct_ab) {
    j["direct_ab"] = true;
    j["coeff_a"] = m.visco.coeff_a;
    j["coeff_b"] = m.visco.coeff_b;
  }
  return j;
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text,
                                const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: " + origin + ": " + e.what());
  }
  return parse_json(j, origin);
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config_text(ss.str(), path);
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  json& s = j["scene"];
  s["particle_source"] = cfg.scene.particle_source;
  s["density"] = cfg.scene.density_rho;
  s["initial_velocity"] = {cfg.scene.initial_velocity.x,
                           cfg.scene.initial_velocity.y,
                           cfg.scene.initial_velocity.z};
  if (cfg.scene.fill) {
    s["fill"]["voxel_resolution"] = cfg.scene.fill->voxel_resolution;
    s["fill"]["seed_per_voxel"] = cfg.scene.fill->seed_per_voxel;
  }
  for (const Aabb& a : cfg.scene.anchors)
    s["anchors"].push_back({{"lo", {a.lo.x, a.lo.y, a.lo.z}},
                            {"hi", {a.hi.x, a.hi.y, a.hi.z}}});
  for (const ImpulseSpec& imp : cfg.scene.impulses)
    s["impulses"].push_back(
        {{"lo", {imp.region.lo.x, imp.region.lo.y, imp.region.lo.z}},
         {"hi", {imp.region.hi.x, imp.region.hi.y, imp.region.hi.z}},
         {"acceleration",
          {imp.acceleration.x, imp.acceleration.y, imp.acceleration.z}},
         {"start_frame", imp.start_frame},
         {"end_frame", imp.end_frame}});
  s["material"] = material_to_json(cfg.scene.material);

  json& sim = j["sim"];
  sim["grid_dims"] = cfg.sim.grid_dims;
  sim["dx"] = cfg.sim.dx;
  sim["dt"] = cfg.sim.dt;
  sim["substeps_per_frame"] = cfg.sim.substeps_per_frame;
  sim["gravity"] = {cfg.sim.gravity.x, cfg.sim.gravity.y, cfg.sim.gravity.z};
  sim["boundary_margin"] = cfg.sim.boundary_margin;
  sim["boundary_policy"] =
      cfg.sim.boundary_policy == BoundaryPolicy::sticky ? "sticky" : "slip";
  sim["deterministic"] = cfg.sim.deterministic;

  j["frames"] = cfg.frames;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  if (!cfg.calib.params.entries.empty()) {
    json& c = j["calibrate"];
    c["budget"] = cfg.calib.budget;
    if (!cfg.calib.reference_dir.empty())
      c["reference_dir"] = cfg.calib.reference_dir;
    for (const auto& e : cfg.calib.params.entries)
      c["params"].push_back({{"name", e.name},
                             {"init", e.value},
                             {"lo", e.lo},
                             {"hi", e.hi},
                             {"log", e.log_scale}});
  }
  return j.dump(2);
}

void apply_params(MaterialSet& mat, const ParamVector& params) {
  for (const auto& e : params.entries) {
    if (e.name == "youngs_modulus")
      mat.elastic = ElasticParams::from_young_poisson(e.value,
                                                      mat.elastic.poisson_nu);
    else if (e.name == "poisson_ratio")
      mat.elastic =
          ElasticParams::from_young_poisson(mat.elastic.youngs_e, e.value);
    else if (e.name == "visco_mu")
      mat.visco.lame_mu_n = e.value;
    else if (e.name == "visco_lambda")
      mat.visco.lame_lambda_n = e.value;
    else if (e.name == "nu_d")
      mat.visco.nu_d = e.value;
    else if (e.name == "nu_v")
      mat.visco.nu_v = e.value;
    else if (e.name == "coeff_a") {
      mat.visco.coeff_a = e.value;
      mat.visco.direct_ab = true;
    } else if (e.name == "coeff_b") {
      mat.visco.coeff_b = e.value;
      mat.visco.direct_ab = true;
    } else {
      throw std::invalid_argument("apply_params: unknown parameter " + e.name);
    }
  }
}

}  // namespace vmpm
