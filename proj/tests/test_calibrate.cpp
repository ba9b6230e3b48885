#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "vmpm/calibrate.hpp"

using namespace vmpm;

namespace {

Trajectory make_traj(int frames, int particles, const Vec3& offset = {}) {
  Trajectory t;
  t.frame_dt = 0.01;
  for (int f = 0; f < frames; ++f) {
    std::vector<Vec3> frame(particles);
    for (int i = 0; i < particles; ++i)
      frame[i] = Vec3{0.1 * i, 0.2 * f, 0.3} + offset;
    t.frames.push_back(frame);
  }
  return t;
}

}  // namespace

TEST_CASE("ParamVector scaling and validation") {
  ParamVector pv;
  pv.add("youngs_modulus", 1e5, 1e3, 1e7, true)
      .add("poisson_ratio", 0.3, 0.0, 0.45);

  SUBCASE("round trip through scaled space") {
    auto s = pv.to_scaled();
    CHECK(s[0] == doctest::Approx(5.0));
    CHECK(s[1] == doctest::Approx(0.3));
    pv.from_scaled(s);
    CHECK(pv.get("youngs_modulus") == doctest::Approx(1e5));
    CHECK(pv.get("poisson_ratio") == doctest::Approx(0.3));
  }

  SUBCASE("from_scaled clamps to bounds") {
    pv.from_scaled({9.0, -1.0});
    CHECK(pv.get("youngs_modulus") == doctest::Approx(1e7));
    CHECK(pv.get("poisson_ratio") == doctest::Approx(0.0));
  }

  SUBCASE("lookup by name") {
    CHECK(pv.at("poisson_ratio").log_scale == false);
    CHECK_THROWS_AS(pv.at("nope"), std::out_of_range);
  }

  SUBCASE("validate rejects out-of-bounds and bad log bounds") {
    CHECK_NOTHROW(pv.validate());
    ParamVector bad;
    bad.add("x", 2.0, 0.0, 1.0);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    ParamVector badlog;
    badlog.add("x", 0.5, 0.0, 1.0, true);
    CHECK_THROWS_AS(badlog.validate(), std::invalid_argument);
  }

  SUBCASE("size mismatch is rejected") {
    CHECK_THROWS_AS(pv.from_scaled({1.0}), std::invalid_argument);
  }
}

TEST_CASE("trajectory_loss basics") {
  Trajectory ref = make_traj(5, 10);

  SUBCASE("identical trajectories score zero") {
    CHECK(trajectory_loss(ref, ref) == 0.0);
  }

  SUBCASE("uniform offset scores its squared norm") {
    Trajectory off = make_traj(5, 10, {0.01, 0, 0});
    CHECK(trajectory_loss(off, ref) == doctest::Approx(1e-4));
    Trajectory off3 = make_traj(5, 10, {0.01, 0.01, 0.01});
    CHECK(trajectory_loss(off3, ref) == doctest::Approx(3e-4));
  }

  SUBCASE("shape mismatches throw") {
    Trajectory fewer = make_traj(4, 10);
    CHECK_THROWS_AS(trajectory_loss(fewer, ref), std::invalid_argument);
    Trajectory narrow = make_traj(5, 9);
    CHECK_THROWS_AS(trajectory_loss(narrow, ref), std::invalid_argument);
  }

  SUBCASE("empty trajectories score zero") {
    Trajectory a, b;
    CHECK(trajectory_loss(a, b) == 0.0);
  }
}

TEST_CASE("finite_diff_grad matches an analytic gradient") {
  // Loss quadratic in the scaled coordinates: (log10 E - 4)^2 + (nu - 0.2)^2.
  auto loss = [](const ParamVector& p) {
    real le = std::log10(p.get("youngs_modulus"));
    real nu = p.get("poisson_ratio");
    return (le - 4) * (le - 4) + (nu - 0.2) * (nu - 0.2);
  };
  ParamVector pv;
  pv.add("youngs_modulus", 1e5, 1e3, 1e7, true)
      .add("poisson_ratio", 0.3, 0.0, 0.45);

  auto g = finite_diff_grad(loss, pv, 1e-5);
  REQUIRE(g.size() == 2);
  CHECK(g[0] == doctest::Approx(2.0 * (5 - 4)).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(2.0 * (0.3 - 0.2)).epsilon(1e-6));

  CHECK_THROWS_AS(finite_diff_grad(loss, pv, 0.0), std::invalid_argument);

  auto bad = [](const ParamVector&) -> real {
    throw std::runtime_error("boom");
  };
  CHECK_THROWS_AS(finite_diff_grad(bad, pv, 1e-5), std::runtime_error);
}

TEST_CASE("calibrate minimizes a smooth bowl") {
  auto loss = [](const ParamVector& p) {
    real x = p.get("x"), y = p.get("y");
    return (x - 0.3) * (x - 0.3) + 2 * (y + 0.1) * (y + 0.1);
  };
  ParamVector theta0;
  theta0.add("x", 0.9, -1.0, 1.0).add("y", 0.8, -1.0, 1.0);

  CalibrationResult r = calibrate(loss, theta0, 200);
  CHECK(r.evaluations <= 200);
  CHECK(static_cast<int>(r.loss_history.size()) == r.evaluations);
  CHECK(std::abs(r.theta.get("x") - 0.3) < 1e-3);
  CHECK(std::abs(r.theta.get("y") + 0.1) < 1e-3);
  CHECK(r.loss < 1e-6);

  SUBCASE("reported loss is the running minimum of the history") {
    real best = std::numeric_limits<real>::infinity();
    for (real v : r.loss_history) best = std::min(best, v);
    CHECK(r.loss == best);
  }

  SUBCASE("deterministic rerun") {
    CalibrationResult r2 = calibrate(loss, theta0, 200);
    CHECK(r2.loss == r.loss);
    CHECK(r2.evaluations == r.evaluations);
    CHECK(r2.theta.get("x") == r.theta.get("x"));
  }
}

TEST_CASE("calibrate recovers a log-scaled modulus") {
  // Synthetic identification: loss is minimized at E = 1e4.
  auto loss = [](const ParamVector& p) {
    real le = std::log10(p.get("youngs_modulus"));
    return (le - 4.0) * (le - 4.0);
  };
  ParamVector theta0;
  theta0.add("youngs_modulus", 1e5, 1e2, 1e8, true);

  CalibrationResult r = calibrate(loss, theta0, 60);
  CHECK(std::abs(std::log10(r.theta.get("youngs_modulus")) - 4.0) < 0.01);
  CHECK(r.loss < 0.1 * loss(theta0));
}

TEST_CASE("calibrate edge behavior") {
  auto loss = [](const ParamVector& p) {
    real x = p.get("x");
    return x * x;
  };
  ParamVector theta0;
  theta0.add("x", 0.5, -1.0, 1.0);

  SUBCASE("budget zero returns the start point with its loss") {
    CalibrationResult r = calibrate(loss, theta0, 0);
    CHECK(r.evaluations == 0);
    CHECK(r.theta.get("x") == 0.5);
    CHECK(r.loss == doctest::Approx(0.25));
  }

  SUBCASE("negative budget is rejected") {
    CHECK_THROWS_AS(calibrate(loss, theta0, -1), std::invalid_argument);
  }

  SUBCASE("invalid start point is rejected") {
    ParamVector bad;
    bad.add("x", 5.0, -1.0, 1.0);
    CHECK_THROWS_AS(calibrate(loss, bad, 10), std::invalid_argument);
  }

  SUBCASE("throwing evaluations score infinity but search continues") {
    auto spiky = [](const ParamVector& p) -> real {
      real x = p.get("x");
      if (x > 0.4) throw std::runtime_error("unstable");
      return (x + 0.2) * (x + 0.2);
    };
    CalibrationResult r = calibrate(spiky, theta0, 100);
    CHECK(std::isinf(r.loss_history.front()));  // start point throws
    CHECK(std::isfinite(r.loss));
    CHECK(std::abs(r.theta.get("x") + 0.2) < 0.01);
  }

  SUBCASE("flat loss stays at a finite answer") {
    auto flat = [](const ParamVector&) -> real { return 1.0; };
    CalibrationResult r = calibrate(flat, theta0, 50);
    CHECK(r.loss == 1.0);
    // Restart-on-stagnation can stop before the budget is exhausted.
    CHECK(r.evaluations <= 50);
  }
}
