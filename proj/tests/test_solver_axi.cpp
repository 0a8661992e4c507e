#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nozzle/errors.hpp"
#include "nozzle/solver1d.hpp"
#include "nozzle/solver_axi.hpp"

using namespace nozzle;
using std::numbers::pi;

namespace {

const PressureLaw law = PressureLaw::power(2.0, 1.0);

ChannelGeometry channel(double eps, double slope) {
  return ChannelGeometry::circular({{1.0, slope}}, {}, {}, eps);
}

AxiState bump(const AxiGrid& g) {
  return sample_axi_state(
      g, [](double, double z) { return 1.0 + 0.2 * std::cos(pi * z); }, [](double, double) { return 0.0; },
      [](double, double z) { return 0.2 * std::sin(pi * z); });
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const LabError& e) {
    return e.kind();
  }
  return ErrorKind::Numerical;
}

}  // namespace

TEST_CASE("grid covers the channel volume") {
  const auto geom = channel(0.2, 0.5);
  const auto g = AxiGrid::build(geom, 8, 64);
  // pi eps^2 int (1 + z/2)^2 dz = pi eps^2 * 19/12
  CHECK(g.domain_volume() == doctest::Approx(pi * 0.04 * 19.0 / 12.0).epsilon(1e-3));
  CHECK(kind_of([&] { AxiGrid::build(geom, 4, 64); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { AxiGrid::build(ChannelGeometry::circular({{1.0}}, {{0.0, 0.1}}), 8, 64); }) ==
        ErrorKind::UnsupportedKind);
}

TEST_CASE("stress tensor closed forms") {
  const double mu = 1.3, eta = 0.7;
  AxiVelocityGradient zero;
  const auto s0 = stress_tensor(zero, mu, eta);
  CHECK(s0.rr == 0.0);
  CHECK(s0.zz == 0.0);
  CHECK(s0.tt == 0.0);
  CHECK(s0.rz == 0.0);

  AxiVelocityGradient axial;
  axial.dz_uz = 1.0;
  const auto s1 = stress_tensor(axial, mu, eta);
  CHECK(s1.zz == doctest::Approx(mu * (2.0 - 2.0 / 3.0) + eta));
  CHECK(s1.rr == doctest::Approx(-2.0 / 3.0 * mu + eta));
  CHECK(s1.tt == doctest::Approx(-2.0 / 3.0 * mu + eta));
  CHECK(s1.trace() == doctest::Approx(3.0 * eta * axial.divergence()));

  // u = -x/3 in 3D: every diagonal gradient entry is -1/3.
  AxiVelocityGradient compress;
  compress.dr_ur = compress.dz_uz = compress.hoop = -1.0 / 3.0;
  const auto s2 = stress_tensor(compress, mu, eta);
  for (double d : {s2.rr, s2.zz, s2.tt}) CHECK(d == doctest::Approx(-eta));
  CHECK(s2.rz == doctest::Approx(0.0));
}

TEST_CASE("stress contraction is non-negative") {
  std::uint64_t seed = 12345;
  auto next = [&] {
    seed = seed * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(seed >> 11) / 9007199254740992.0 * 2.0 - 1.0;
  };
  for (int i = 0; i < 2000; ++i) {
    AxiVelocityGradient g{next(), next(), next(), next(), next()};
    const double mu = 0.01 + std::abs(next()), eta = (i % 3 == 0) ? 0.0 : std::abs(next());
    CHECK(stress_contraction(stress_tensor(g, mu, eta), g) >= -1e-14);
  }
}

TEST_CASE("rest state is preserved on a flared channel") {
  const auto g = AxiGrid::build(channel(0.2, 0.5), 8, 32);
  const auto s0 = sample_axi_state(
      g, [](double, double) { return 1.0; }, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
  const ViscParams3D visc{1.0, 1.0, 1.0};
  for (auto bc : {CapCondition::SlipOnly, CapCondition::SlipPlusNoSlipCaps}) {
    const double dt = axi_stable_dt(s0, g, law, visc, 0.4);
    const auto s1 = axi_step(s0, g, law, visc, dt, bc);
    double worst = 0.0;
    for (int c = 0; c < g.cells(); ++c)
      worst = std::max({worst, std::abs(s1.rho[c] - 1.0), std::abs(s1.mr[c]), std::abs(s1.mz[c])});
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("step preconditions") {
  const auto g = AxiGrid::build(channel(0.2, 0.5), 8, 32);
  const auto s = bump(g);
  const ViscParams3D visc{1.0, 1.0, 1.0};
  const double dt = axi_stable_dt(s, g, law, visc, 0.4);
  CHECK(kind_of([&] { axi_step(s, g, law, visc, 10.0 * dt, CapCondition::SlipOnly); }) == ErrorKind::Timestep);
  CHECK(kind_of([&] { axi_step(s, g, law, {1.0, 0.0, 1.0}, dt, CapCondition::SlipPlusNoSlipCaps); }) ==
        ErrorKind::Configuration);
  CHECK(kind_of([&] { axi_step(s, g, law, {0.0, 1.0, 1.0}, dt, CapCondition::SlipOnly); }) ==
        ErrorKind::Configuration);
  auto bad = s;
  bad.rho[5] = -1.0;
  CHECK(kind_of([&] { axi_step(bad, g, law, visc, dt, CapCondition::SlipOnly); }) == ErrorKind::Positivity);
  // eta = 0 is admissible with slip caps.
  CHECK_NOTHROW(axi_step(s, g, law, {1.0, 0.0, 1.0}, 0.5 * dt, CapCondition::SlipOnly));
}

TEST_CASE("mass, wall flux and energy balance along a run") {
  const auto g = AxiGrid::build(channel(0.2, 0.5), 8, 64);
  const ViscParams3D visc{1.0, 1.0, 0.2};
  for (auto bc : {CapCondition::SlipOnly, CapCondition::SlipPlusNoSlipCaps}) {
    double worst_wall = 0.0;
    const auto res = run_axi(bump(g), g, law, visc, 0.1, bc, {},
                             [&](double, double, const AxiState& s) {
                               worst_wall = std::max(worst_wall, wall_mass_flux(s, g, law));
                             });
    CHECK(worst_wall == 0.0);
    const double m0 = res.mass.front();
    for (double m : res.mass) CHECK(std::abs(m - m0) <= 1e-12 * res.n_steps * m0);
    const auto& e = res.energy;
    REQUIRE(e.size() == static_cast<std::size_t>(res.n_steps) + 1);
    MESSAGE("steps " << res.n_steps << " residual " << e.back().residual << " dissipation " << e.back().dissipation);
    for (const auto& x : e) CHECK(x.residual <= 1e-10);
    CHECK(e.back().dissipation > 0.0);
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i].dissipation >= e[i - 1].dissipation);
  }
}

TEST_CASE("rest run keeps energy constant and zero dissipation") {
  const auto g = AxiGrid::build(channel(0.3, 0.5), 8, 32);
  const auto s0 = sample_axi_state(
      g, [](double, double) { return 1.3; }, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
  const auto res = run_axi(s0, g, law, {1.0, 1.0, 1.0}, 0.02, CapCondition::SlipOnly);
  for (const auto& x : res.energy) {
    CHECK(std::abs(x.residual) < 1e-12);
    CHECK(std::abs(x.dissipation) < 1e-20);
  }
}

TEST_CASE("anti-dissipative fault raises the energy") {
  const auto g = AxiGrid::build(channel(0.2, 0.5), 8, 64);
  AxiRunOptions opt;
  opt.scheme.dissipation_sign = -1.0;
  double worst = -1.0;
  try {
    const auto res = run_axi(bump(g), g, law, {1.0, 1.0, 0.01}, 0.1, CapCondition::SlipOnly, opt);
    for (const auto& e : res.energy) worst = std::max(worst, e.residual);
  } catch (const LabError&) {
    worst = 1.0;  // blow-up counts as a tripped guard
  }
  CHECK(worst > 1e-8);
}

TEST_CASE("straight channel reduces to the one-dimensional viscous solver") {
  const auto geom = channel(0.2, 0.0);
  const int n = 64;
  const auto g = AxiGrid::build(geom, 8, n);
  const ViscParams3D visc{1.0, 1.0, 1.0};
  const double t_end = 0.05;
  const auto axi = run_axi(bump(g), g, law, visc, t_end, CapCondition::SlipOnly).final_state;

  const auto g1 = NozzleGrid::build(geom, n);
  const auto s1 = sample_state(g1.grid, [](double z) { return 1.0 + 0.2 * std::cos(pi * z); },
                               [](double z) { return 0.2 * std::sin(pi * z); });
  const auto traj = run_1d(System1D::NSDrift, s1, g1, law, {1.0, 1.0}, t_end, {t_end});
  const auto& ref = traj.states.back();

  double spread = 0.0, diff = 0.0, radial = 0.0;
  for (int k = 0; k < n; ++k) {
    const double u0 = axi.mz[g.cell(0, k)] / axi.rho[g.cell(0, k)];
    for (int j = 0; j < g.n_r; ++j) {
      const int c = g.cell(j, k);
      spread = std::max(spread, std::abs(axi.mz[c] / axi.rho[c] - u0));
      radial = std::max(radial, std::abs(axi.mr[c]));
    }
    diff = std::max(diff, std::abs(u0 - ref.velocity(k)));
  }
  MESSAGE("spread " << spread << " radial " << radial << " diff " << diff);
  CHECK(spread < 1e-10);
  CHECK(radial < 1e-10);
  CHECK(diff < 5e-3);
}
