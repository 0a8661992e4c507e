#include <cmath>

#include "doctest.h"
#include "nozzle/convergence.hpp"
#include "nozzle/errors.hpp"

using namespace nozzle;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const LabError& e) {
    return e.kind();
  }
  return ErrorKind::Numerical;
}

StudyConfig small(StudyMode mode) {
  StudyConfig c;
  c.mode = mode;
  c.n_r = 8;
  c.n_z = 32;
  c.t_end = 0.04;
  c.snapshots = 11;
  c.epsilons = {0.2, 0.1};
  c.estimate_floor = false;
  return c;
}

}  // namespace

TEST_CASE("study configuration is validated") {
  auto c = small(StudyMode::Viscous);
  c.eta = 0.0;
  CHECK(kind_of([&] { validate_study(c); }) == ErrorKind::Configuration);
  CHECK(kind_of([&] { convergence_study(c); }) == ErrorKind::Configuration);

  c = small(StudyMode::Viscous);
  c.lambdas = {1.0, 0.5};
  CHECK(kind_of([&] { validate_study(c); }) == ErrorKind::Configuration);

  c = small(StudyMode::Inviscid);
  c.lambdas = {0.2};
  CHECK(kind_of([&] { validate_study(c); }) == ErrorKind::Configuration);

  c = small(StudyMode::Inviscid);
  c.epsilons = {0.2, -0.1};
  CHECK(kind_of([&] { validate_study(c); }) == ErrorKind::Configuration);

  c = small(StudyMode::Inviscid);
  c.jobs = 0;
  CHECK(kind_of([&] { validate_study(c); }) == ErrorKind::Configuration);

  c = small(StudyMode::Inviscid);
  c.epsilons.clear();
  CHECK(convergence_study(c).points.empty());
}

TEST_CASE("rest data stays at zero relative energy") {
  for (auto mode : {StudyMode::Inviscid, StudyMode::Viscous}) {
    auto c = small(mode);
    c.rho_amp = 0.0;
    c.u_amp = 0.0;
    const auto rep = convergence_study(c);
    REQUIRE(rep.points.size() == 2);
    for (const auto& p : rep.points) {
      CHECK(p.sup_normalized <= 1e-14);
      CHECK(p.mass_drift <= 1e-12 * p.n_steps);
    }
    CHECK_FALSE(rep.notes.empty());
  }
}

TEST_CASE("small inviscid study") {
  auto c = small(StudyMode::Inviscid);
  c.jobs = 2;
  const auto rep = convergence_study(c);
  REQUIRE(rep.points.size() == 2);
  CHECK(rep.horizon == doctest::Approx(0.04));
  const auto& a = rep.points[0];
  const auto& b = rep.points[1];
  CHECK(a.lambda == 0.2);
  CHECK(b.lambda == 0.1);
  CHECK(a.sup_normalized > b.sup_normalized);
  CHECK(rep.monotone);
  CHECK(rep.fit.q > 0.0);
  for (const auto& p : rep.points) {
    CHECK(p.energy_residual <= 1e-12);
    CHECK(p.mass_drift <= 1e-12 * p.n_steps);
    CHECK(p.times.size() == p.normalized.size());
    CHECK(p.normalized.front() <= 1e-15);
    CHECK(p.rei_max_residual <= 100.0 * p.rei_scale);
    CHECK(p.second_derivative_bounded);
  }
}

TEST_CASE("floor estimate adds a refined run") {
  auto c = small(StudyMode::Inviscid);
  c.epsilons = {0.2};
  c.estimate_floor = true;
  const auto rep = convergence_study(c);
  CHECK(rep.has_floor);
  CHECK(rep.floor_refined.n_r == 16);
  CHECK(rep.floor_refined.n_z == 64);
  CHECK(rep.floor >= 0.0);
  CHECK(rep.rei_constant >= 0.0);
}

TEST_CASE("reference breakdown shortens the horizon") {
  auto c = small(StudyMode::Inviscid);
  c.u_amp = 3.0;
  c.t_end = 2.0;
  c.epsilons = {0.2};
  StudyReference ref = [&] {
    try {
      return build_reference(c, 32);
    } catch (const LabError& e) {
      FAIL(e.what());
      throw;
    }
  }();
  CHECK(ref.horizon <= c.t_end);
}
