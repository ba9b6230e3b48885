#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("VISCOMPM_CLI");
  REQUIRE_MESSAGE(p != nullptr, "VISCOMPM_CLI must point at the binary");
  return p;
}

fs::path work_dir() {
  fs::path p = fs::temp_directory_path() / "vmpm_cli";
  return p;
}

int run(const std::string& args, const fs::path& log) {
  std::string cmd = cli() + " " + args + " > " + log.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

// 3x3x3 cube of points centered in a 16^3, dx = 0.05 domain.
std::string cube_csv() {
  std::string csv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        csv += std::to_string(0.35 + 0.04 * i) + "," +
               std::to_string(0.35 + 0.04 * j) + "," +
               std::to_string(0.38 + 0.04 * k) + "\n";
  return csv;
}

std::string base_config(const fs::path& csv, const fs::path& out) {
  return R"({
  "scene": {
    "particle_source": ")" + csv.string() + R"(",
    "density": 1000,
    "material": {"youngs_modulus": 1e4, "poisson_ratio": 0.3, "nu_d": 50, "nu_v": 50}
  },
  "sim": {
    "grid_dims": [16, 16, 16],
    "dx": 0.05,
    "dt": 1e-3,
    "substeps_per_frame": 5,
    "gravity": [0, 0, -1.0]
  },
  "frames": 3,
  "output_dir": ")" + out.string() + R"("
})";
}

}  // namespace

TEST_CASE("cli requires a subcommand") {
  fs::path dir = work_dir();
  fs::create_directories(dir);
  CHECK(run("", dir / "noargs.log") != 0);
}

TEST_CASE("simulate writes frames, diagnostics, and a manifest") {
  fs::path dir = work_dir() / "sim";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "cube.csv", cube_csv());
  write_file(dir / "run.json", base_config(dir / "cube.csv", dir / "out"));

  REQUIRE(run("simulate --config " + (dir / "run.json").string(),
              dir / "sim.log") == 0);
  // frames + 1 snapshots, including the initial state.
  for (int f = 0; f <= 3; ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d.bin", f);
    CHECK(fs::exists(dir / "out" / name));
  }
  CHECK_FALSE(fs::exists(dir / "out" / "frame_0004.bin"));
  CHECK(fs::exists(dir / "out" / "diagnostics.csv"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(slurp(dir / "sim.log").find("wrote 4 frames") != std::string::npos);

  SUBCASE("reruns are byte-identical") {
    REQUIRE(run("simulate --config " + (dir / "run.json").string() + " --out " +
                    (dir / "out2").string(),
                dir / "sim2.log") == 0);
    for (int f = 0; f <= 3; ++f) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%04d.bin", f);
      CHECK(slurp(dir / "out" / name) == slurp(dir / "out2" / name));
    }
  }

  SUBCASE("the manifest reproduces the run") {
    REQUIRE(run("simulate --config " + (dir / "out" / "manifest.json").string() +
                    " --out " + (dir / "out3").string(),
                dir / "sim3.log") == 0);
    CHECK(slurp(dir / "out" / "frame_0003.bin") ==
          slurp(dir / "out3" / "frame_0003.bin"));
  }

  SUBCASE("inspect summarizes the run directory") {
    REQUIRE(run("inspect " + (dir / "out").string(), dir / "inspect.log") == 0);
    std::string log = slurp(dir / "inspect.log");
    CHECK(log.find("manifest:") != std::string::npos);
    CHECK(log.find("diagnostics: 4 frames") != std::string::npos);
  }

  SUBCASE("slice renders a space-time image") {
    REQUIRE(run("slice --frames-dir " + (dir / "out").string() + " --output " +
                    (dir / "slice.pgm").string() + " --row 128 --axis 1",
                dir / "slice.log") == 0);
    std::string pgm = slurp(dir / "slice.pgm");
    REQUIRE(pgm.size() > 2);
    CHECK(pgm.substr(0, 2) == "P5");
    // One image row per frame dump.
    CHECK(pgm.find("256 4") != std::string::npos);
  }
}

TEST_CASE("config errors are reported with their JSON path") {
  fs::path dir = work_dir() / "badcfg";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "cube.csv", cube_csv());

  std::string cfg = base_config(dir / "cube.csv", dir / "out");
  cfg.replace(cfg.find("\"dx\""), 4, "\"dxx\"");
  write_file(dir / "bad.json", cfg);

  CHECK(run("simulate --config " + (dir / "bad.json").string(),
            dir / "bad.log") != 0);
  std::string log = slurp(dir / "bad.log");
  CHECK(log.find("sim.dxx") != std::string::npos);
  CHECK(log.find("unknown key") != std::string::npos);

  CHECK(run("simulate --config " + (dir / "missing.json").string(),
            dir / "missing.log") != 0);
  CHECK(slurp(dir / "missing.log").find("cannot open") != std::string::npos);
}

TEST_CASE("fill seeds a hollow shell and is idempotent") {
  fs::path dir = work_dir() / "fill";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // Hollow box shell: all faces of a 16^3 lattice, sampled finer than the
  // fill voxels so the shell stays watertight.
  std::string csv;
  int shell_count = 0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int k = 0; k < 16; ++k) {
        if (i > 0 && i < 15 && j > 0 && j < 15 && k > 0 && k < 15) continue;
        csv += std::to_string(0.3 + 0.02 * i) + "," +
               std::to_string(0.3 + 0.02 * j) + "," +
               std::to_string(0.3 + 0.02 * k) + "\n";
        ++shell_count;
      }
  write_file(dir / "shell.csv", csv);

  REQUIRE(run("fill --input " + (dir / "shell.csv").string() + " --output " +
                  (dir / "filled.csv").string() + " --resolution 10 10 10",
              dir / "fill.log") == 0);
  std::string log = slurp(dir / "fill.log");
  CHECK(log.find("seeded") != std::string::npos);

  auto count_lines = [](const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    int n = 0;
    while (std::getline(in, line))
      if (!line.empty()) ++n;
    return n;
  };
  int filled = count_lines(dir / "filled.csv");
  CHECK(filled > shell_count);

  REQUIRE(run("fill --input " + (dir / "filled.csv").string() + " --output " +
                  (dir / "refilled.csv").string() + " --resolution 10 10 10",
              dir / "refill.log") == 0);
  CHECK(count_lines(dir / "refilled.csv") == filled);
}

TEST_CASE("calibrate writes theta_best and a loss history") {
  fs::path dir = work_dir() / "calib";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "cube.csv", cube_csv());
  write_file(dir / "ref.json", base_config(dir / "cube.csv", dir / "ref"));

  REQUIRE(run("simulate --config " + (dir / "ref.json").string(),
              dir / "ref.log") == 0);

  std::string cfg = base_config(dir / "cube.csv", dir / "fit");
  cfg.insert(cfg.rfind('}'), R"(,
  "calibrate": {
    "budget": 8,
    "params": [
      {"name": "youngs_modulus", "init": 3e4, "lo": 1e3, "hi": 1e6, "log": true}
    ]
  })");
  write_file(dir / "fit.json", cfg);

  REQUIRE(run("calibrate --config " + (dir / "fit.json").string() + " --ref " +
                  (dir / "ref").string(),
              dir / "fit.log") == 0);
  CHECK(fs::exists(dir / "fit" / "theta_best.json"));
  std::string hist = slurp(dir / "fit" / "loss_history.csv");
  CHECK(hist.rfind("evaluation,loss,best_so_far", 0) == 0);
  std::string theta = slurp(dir / "fit" / "theta_best.json");
  CHECK(theta.find("youngs_modulus") != std::string::npos);
  CHECK(slurp(dir / "fit.log").find("best loss") != std::string::npos);
}
