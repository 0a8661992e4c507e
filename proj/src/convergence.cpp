#include "nozzle/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <mutex>
#include <optional>
#include <numbers>
#include <sstream>

#include "nozzle/errors.hpp"

namespace nozzle {

namespace {

std::vector<double> effective_lambdas(const StudyConfig& c) {
  if (!c.lambdas.empty()) return c.lambdas;
  if (c.mode == StudyMode::Viscous) return std::vector<double>(c.epsilons.size(), 1.0);
  return c.epsilons;
}

CapCondition caps_for(StudyMode mode) {
  return mode == StudyMode::Viscous ? CapCondition::SlipPlusNoSlipCaps : CapCondition::SlipOnly;
}

}  // namespace

void validate_study(const StudyConfig& c) {
  if (c.mode == StudyMode::Viscous && !(c.eta > 0.0))
    fail(ErrorKind::Configuration, "bulk-viscosity hypothesis violated: the viscous limit requires eta > 0");
  if (!(c.mu > 0.0)) fail(ErrorKind::Configuration, "shear viscosity mu must be positive");
  if (!(c.eta >= 0.0)) fail(ErrorKind::Configuration, "bulk viscosity eta must be non-negative");
  if (!(c.t_end > 0.0)) fail(ErrorKind::Configuration, "t_end must be positive");
  if (c.snapshots < 4) fail(ErrorKind::Configuration, "at least four reference snapshots are needed");
  if (!c.lambdas.empty() && c.lambdas.size() != c.epsilons.size())
    fail(ErrorKind::Configuration, "lambdas must match epsilons in length");
  for (double e : c.epsilons)
    if (!(e > 0.0)) fail(ErrorKind::Configuration, "epsilon values must be positive");
  for (double l : effective_lambdas(c))
    if (!(l > 0.0)) fail(ErrorKind::Configuration, "lambda values must be positive");
  if (c.mode == StudyMode::Viscous)
    for (double l : effective_lambdas(c))
      if (l != 1.0) fail(ErrorKind::Configuration, "the viscous study runs at lambda = 1");
  if (c.jobs < 1) fail(ErrorKind::Configuration, "jobs must be at least 1");
}

StudyReference build_reference(const StudyConfig& c, int n_z) {
  StudyReference out{ChannelGeometry::circular(c.radius), {}, {}, c.t_end, {}};
  out.grid = NozzleGrid::build(out.geom, n_z);
  const PressureLaw law = PressureLaw::power(c.gamma, c.kappa);
  const State1D s0 = sample_state(out.grid.grid, [&](double z) { return 1.0 + c.rho_amp * std::cos(std::numbers::pi * z); },
                                  [&](double z) { return c.u_amp * std::sin(std::numbers::pi * z); });
  const System1D system = c.mode == StudyMode::Viscous ? System1D::NSDrift : System1D::Euler;
  const Visc1DParams visc{c.mu, c.eta, c.wall_traction};
  double horizon = c.t_end;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<double> outputs;
    for (int i = 0; i < c.snapshots; ++i) outputs.push_back(horizon * i / (c.snapshots - 1));
    try {
      Run1DOptions opt;
      opt.cfl = c.reference_cfl;
      const auto traj = run_1d(system, s0, out.grid, law, visc, horizon, outputs, opt);
      out.pair = ReferencePair::from_trajectory(traj, out.grid);
      out.horizon = horizon;
      return out;
    } catch (const BreakdownError& e) {
      std::ostringstream os;
      os << "reference breakdown at t = " << e.time() << "; horizon shortened to " << 0.9 * e.time();
      out.notes.push_back(os.str());
      horizon = 0.9 * e.time();
    }
  }
  fail(ErrorKind::Breakdown, "reference keeps breaking down");
}

StudyPoint run_study_point(const StudyConfig& c, const StudyReference& ref, double epsilon, double lambda, int n_r,
                           int n_z) {
  const auto geom = ChannelGeometry::circular(c.radius, {}, {}, epsilon);
  const auto grid = AxiGrid::build(geom, n_r, n_z);
  const PressureLaw law = PressureLaw::power(c.gamma, c.kappa);
  const ViscParams3D visc{c.mu, c.eta, lambda};
  const CapCondition bc = caps_for(c.mode);

  StudyPoint p;
  p.epsilon = epsilon;
  p.lambda = lambda;
  p.n_r = n_r;
  p.n_z = n_z;
  p.volume = grid.domain_volume();
  p.h = grid.h_z;

  RelativeEnergyTracker tracker(grid, geom, ref.pair, law, visc, bc);
  double sup_wall = 0.0, sup_l1 = 0.0;
  AxiRunOptions opt;
  opt.cfl = c.cfl;
  opt.scheme = c.scheme;
  auto observe = [&](double t, double, const AxiState& s) {
    tracker.observe(t, s);
    const auto e = error_terms(s, grid, geom, ref.pair, t, visc);
    p.max_c1 = std::max(p.max_c1, e.c1);
    if (c.mode == StudyMode::Viscous) p.max_c2 = std::max(p.max_c2, e.c2);
    sup_wall = std::max(sup_wall, std::abs(e.lateral_traction));
    sup_l1 = std::max(sup_l1, epsilon * e.l1);
    p.second_derivative_bounded = p.second_derivative_bounded && e.second_derivative_bounded;
  };
  const auto res = run_axi(well_prepared_state(grid, geom, ref.pair), grid, law, visc, ref.horizon, bc, opt, observe);

  p.n_steps = res.n_steps;
  p.max_c_wall = sup_l1 > 0.0 ? sup_wall / sup_l1 : 0.0;
  p.max_dt = tracker.max_dt();
  p.rei_max_residual = tracker.max_residual();
  p.rei_scale = p.max_dt + p.h * p.h;
  p.sup_energy = tracker.sup_energy();
  p.sup_normalized = p.sup_energy / p.volume;
  for (const auto& s : tracker.samples()) {
    p.times.push_back(s.t);
    p.normalized.push_back(s.energy / p.volume);
  }
  p.energy_residual = -std::numeric_limits<double>::infinity();
  for (const auto& e : res.energy) p.energy_residual = std::max(p.energy_residual, e.residual);
  for (double m : res.mass) p.mass_drift = std::max(p.mass_drift, std::abs(m - res.mass.front()) / res.mass.front());
  return p;
}

RelativeEnergyReport convergence_study(const StudyConfig& c) {
  validate_study(c);
  RelativeEnergyReport rep;
  rep.mode = c.mode;
  if (c.epsilons.empty()) return rep;

  const auto lambdas = effective_lambdas(c);
  const StudyReference ref = build_reference(c, c.n_z);
  rep.horizon = ref.horizon;
  rep.notes = ref.notes;

  struct Job {
    double eps, lambda;
    int n_r, n_z;
    bool refined;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) jobs.push_back({c.epsilons[i], lambdas[i], c.n_r, c.n_z, false});
  std::size_t floor_src = 0;
  for (std::size_t i = 1; i < c.epsilons.size(); ++i)
    if (c.epsilons[i] + lambdas[i] > c.epsilons[floor_src] + lambdas[floor_src]) floor_src = i;
  std::optional<StudyReference> fine_ref;
  if (c.estimate_floor) {
    StudyConfig fc = c;
    fc.t_end = ref.horizon;
    fine_ref.emplace(build_reference(fc, 2 * c.n_z));
    jobs.push_back({c.epsilons[floor_src], lambdas[floor_src], 2 * c.n_r, 2 * c.n_z, true});
  }

  std::vector<StudyPoint> results(jobs.size());
  // Longest jobs first so a small pool stays busy.
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto cost = [&](const Job& j) { return static_cast<double>(j.n_r) * j.n_z / (j.eps * j.eps); };
    return cost(jobs[a]) > cost(jobs[b]);
  });
  auto run = [&](std::size_t i) {
    const auto& j = jobs[i];
    results[i] = run_study_point(c, j.refined ? *fine_ref : ref, j.eps, j.lambda, j.n_r, j.n_z);
  };
  if (c.jobs == 1) {
    for (std::size_t i : order) run(i);
  } else {
    std::size_t next = 0;
    std::mutex m;
    std::vector<std::future<void>> pool;
    for (int w = 0; w < c.jobs; ++w)
      pool.push_back(std::async(std::launch::async, [&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(m);
            if (next >= order.size()) return;
            i = order[next++];
          }
          run(i);
        }
      }));
    for (auto& f : pool) f.get();
  }

  for (std::size_t i = 0; i < c.epsilons.size(); ++i) rep.points.push_back(results[i]);
  if (c.estimate_floor) {
    rep.has_floor = true;
    rep.floor_refined = results.back();
    const auto& coarse = rep.points[floor_src];
    rep.floor = std::max(0.0, coarse.sup_normalized - rep.floor_refined.sup_normalized);
    rep.rei_constant = std::max({0.0, coarse.rei_max_residual / coarse.rei_scale,
                                 rep.floor_refined.rei_max_residual / rep.floor_refined.rei_scale});
  }

  std::vector<double> x, y, all_x, all_y;
  for (const auto& p : rep.points) {
    const double s = c.mode == StudyMode::Viscous ? p.epsilon : p.epsilon + p.lambda;
    all_x.push_back(s);
    all_y.push_back(p.sup_normalized);
    const double v = p.sup_normalized - rep.floor;
    // Values at round-off level carry no rate information.
    if (v > 1e-14) {
      x.push_back(s);
      y.push_back(v);
    } else {
      std::ostringstream os;
      os << "point at scale " << s << " lies below the floor and is left out of the fit";
      rep.notes.push_back(os.str());
    }
  }
  rep.monotone = monotone_in(all_x, all_y, rep.floor);
  if (x.size() >= 2) {
    rep.fit = fit_power_law(x, y);
  } else {
    rep.notes.push_back("fewer than two points above the floor; no rate fitted");
  }
  return rep;
}

}  // namespace nozzle
