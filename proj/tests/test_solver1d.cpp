#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "nozzle/errors.hpp"
#include "nozzle/solver1d.hpp"
#include "oracles.hpp"

using namespace nozzle;
using std::numbers::pi;

namespace {

const PressureLaw law = PressureLaw::power(2.0, 1.0);

ChannelGeometry flared() { return ChannelGeometry::circular({{1.0, 0.5}}); }

State1D bump(const Grid1D& g) {
  return sample_state(g, [](double z) { return 1.0 + 0.2 * std::cos(pi * z); },
                      [](double z) { return 0.2 * std::sin(pi * z); });
}

double l1(const std::vector<double>& a, const std::vector<double>& b, double dz) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * dz;
}

// Average of a fine-grid field onto a grid coarser by `factor`.
std::vector<double> restrict_to(const std::vector<double>& f, int factor) {
  std::vector<double> c(f.size() / factor, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) c[i / factor] += f[i] / factor;
  return c;
}

}  // namespace

TEST_CASE("rest state is a fixed point of both steppers") {
  auto g = NozzleGrid::build(flared(), 64);
  State1D s{std::vector<double>(64, 1.3), std::vector<double>(64, 0.0)};
  const double dt = stable_dt(s, g.grid.dz, law, 0.4);
  auto e = euler_step(s, g, law, dt);
  auto v = ns_drift_step(s, g, law, {1.0, 0.5}, dt);
  for (int i = 0; i < 64; ++i) {
    CHECK(std::abs(e.rho[i] - 1.3) < 1e-14);
    CHECK(std::abs(e.mom[i]) < 1e-14);
    CHECK(std::abs(v.rho[i] - 1.3) < 1e-14);
    CHECK(std::abs(v.mom[i]) < 1e-14);
  }
  auto traj = run_1d(System1D::Euler, s, g, law, {}, 0.5, {0.0, 0.5});
  CHECK(traj.states.size() == 2);
  for (int i = 0; i < 64; ++i) CHECK(std::abs(traj.states[1].rho[i] - 1.3) < 1e-13);
}

TEST_CASE("constant area reduces bit-for-bit to the plain isentropic scheme") {
  auto g = NozzleGrid::build(ChannelGeometry::circular({{0.8}}), 100);
  State1D s = bump(g.grid);
  for (int k = 0; k < 20; ++k) {
    const double dt = stable_dt(s, g.grid.dz, law, 0.4);
    auto a = euler_step(s, g, law, dt);
    auto b = isentropic_step(s, g.grid, law, dt);
    CHECK(a.rho == b.rho);
    CHECK(a.mom == b.mom);
    s = a;
  }
}

TEST_CASE("Riemann problem against the exact isentropic solver") {
  oracle::IsentropicRiemann ex{2.0, 1.0, 1.0, 0.0, 0.5, 0.0};
  ex.solve();
  std::vector<double> errs;
  for (int n : {100, 200, 400, 800}) {
    Grid1D g(n);
    State1D s;
    for (int i = 0; i < n; ++i) {
      s.rho.push_back(g.center(i) < 0.5 ? 1.0 : 0.5);
      s.mom.push_back(0.0);
    }
    double t = 0, t_end = 0.1;
    while (t < t_end) {
      const double dt = std::min(stable_dt(s, g.dz, law, 0.4), t_end - t);
      s = isentropic_step(s, g, law, dt);
      t += dt;
    }
    double err = 0;
    for (int i = 0; i < n; ++i) err += std::abs(s.rho[i] - ex.sample((g.center(i) - 0.5) / t_end).first) * g.dz;
    errs.push_back(err);
  }
  for (std::size_t k = 1; k < errs.size(); ++k) CHECK(errs[k] < errs[k - 1]);
  CHECK(errs.back() < 2e-3);
}

TEST_CASE("mass conservation with walls and variable area") {
  auto g = NozzleGrid::build(flared(), 128);
  State1D s = bump(g.grid);
  const double m0 = total_mass(s, g);
  int steps = 0;
  for (; steps < 300; ++steps) {
    const double dt = stable_dt(s, g.grid.dz, law, 0.4);
    s = steps % 2 ? euler_step(s, g, law, dt) : ns_drift_step(s, g, law, {1.0, 1.0}, dt);
    CHECK(std::abs(total_mass(s, g) - m0) <= 1e-12 * (steps + 1));
  }
}

TEST_CASE("step errors") {
  auto g = NozzleGrid::build(flared(), 32);
  State1D s = bump(g.grid);
  CHECK_THROWS_AS(euler_step(s, g, law, 1.0), LabError);
  CHECK_THROWS_AS(ns_drift_step(s, g, law, {0.0, 1.0}, 1e-4), LabError);
  try {
    run_1d(System1D::Euler, s, g, law, {}, 1.0, {1.0}, {0.4, 0.1});
    CHECK(false);
  } catch (const BreakdownError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.kind() == ErrorKind::Breakdown);
  }
  State1D neg = s;
  neg.rho[3] = -1.0;
  CHECK_THROWS_AS(euler_step(neg, g, law, 1e-4), LabError);
}

TEST_CASE("linear heat-equation decay of the viscous operator") {
  auto g = NozzleGrid::build(ChannelGeometry::circular({{1.0}}), 200);
  const double u0 = 1e-4;
  Visc1DParams visc{6.0, 2.0};  // nu = 10
  State1D s = sample_state(g.grid, [](double) { return 1.0; }, [u0](double z) { return u0 * std::sin(pi * z); });
  const double t_end = 1.0 / (visc.nu() * pi * pi);
  auto traj = run_1d(System1D::NSDrift, s, g, law, visc, t_end, {t_end}, {0.05});
  // Amplitude by projection onto sin(pi z).
  double amp = 0;
  for (int i = 0; i < g.size(); ++i) amp += 2.0 * traj.states[0].velocity(i) * std::sin(pi * g.grid.center(i)) * g.grid.dz;
  const double expected = u0 * std::exp(-visc.nu() * pi * pi * t_end);
  CHECK(std::abs(amp / expected - 1.0) < 0.05);
}

TEST_CASE("large viscosity: discrete H1 seminorm decays monotonically") {
  auto g = NozzleGrid::build(flared(), 100);
  Visc1DParams visc{50.0, 10.0};
  State1D s = sample_state(g.grid, [](double) { return 1.0; },
                           [](double z) { return 0.05 * std::sin(pi * z) + 0.02 * std::sin(3 * pi * z); });
  auto h1 = [&](const State1D& st) {
    double sum = st.velocity(0) * st.velocity(0) * 2 / g.grid.dz;  // wall at distance dz/2
    for (int i = 0; i + 1 < g.size(); ++i) sum += std::pow(st.velocity(i + 1) - st.velocity(i), 2) / g.grid.dz;
    return sum;
  };
  double prev = h1(s);
  // Viscous decay dominates until the velocity is ~1e-3 of its initial size.
  for (int k = 0; k < 20; ++k) {
    s = ns_drift_step(s, g, law, visc, 2e-4);
    const double cur = h1(s);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("implicit viscous operator has eigenvalues with negative real part") {
  auto g = NozzleGrid::build(flared(), 64);
  const auto rows = viscous_operator(g, {3.0, 1.0});
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(64, 64);
  for (int i = 0; i < 64; ++i) {
    if (i > 0) m(i, i - 1) = rows[i][0];
    m(i, i) = rows[i][1];
    if (i + 1 < 64) m(i, i + 1) = rows[i][2];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
}

TEST_CASE("Euler self-convergence for smooth data") {
  std::vector<std::vector<double>> rho;
  const double t_end = 0.3;
  for (int n : {64, 128, 256, 512}) {
    auto g = NozzleGrid::build(flared(), n);
    auto traj = run_1d(System1D::Euler, bump(g.grid), g, law, {}, t_end, {t_end});
    rho.push_back(traj.states[0].rho);
  }
  std::vector<double> diff;
  for (int k = 0; k + 1 < 4; ++k) diff.push_back(l1(rho[k], restrict_to(rho[k + 1], 2), 1.0 / rho[k].size()));
  const double order = std::log2(diff[1] / diff[2]);
  MESSAGE("self-convergence differences " << diff[0] << " " << diff[1] << " " << diff[2]);
  CHECK(order >= 1.8);
}

TEST_CASE("NS-drift energy is non-increasing") {
  auto g = NozzleGrid::build(flared(), 128);
  std::vector<double> outs;
  for (int k = 0; k <= 50; ++k) outs.push_back(0.01 * k);
  auto traj = run_1d(System1D::NSDrift, bump(g.grid), g, law, {1.0, 1.0}, 0.5, outs);
  REQUIRE(traj.energy.size() == outs.size());
  for (std::size_t k = 1; k < outs.size(); ++k) CHECK(traj.energy[k] - traj.energy[k - 1] <= 1e-8 * 0.01);
  CHECK(std::abs(traj.mass.back() - traj.mass.front()) <= 1e-12 * traj.n_steps);
}
