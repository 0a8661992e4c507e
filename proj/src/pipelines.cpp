#include "nozzle/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "nozzle/rate_fit.hpp"

namespace nozzle {

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

std::string num(double x) { return format_number(x); }

Assertion check(std::string name, bool ok, std::string detail) { return {std::move(name), ok, std::move(detail)}; }

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t next = 0;
  std::mutex m;
  std::vector<std::future<void>> pool;
  for (int w = 0; w < std::min<int>(jobs, static_cast<int>(n)); ++w)
    pool.push_back(std::async(std::launch::async, [&] {
      while (true) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(m);
          if (next >= n) return;
          i = next++;
        }
        fn(i);
      }
    }));
  for (auto& f : pool) f.get();
}

double max_ratio(const std::vector<double>& v) {
  if (v.empty()) return 1.0;
  return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

// ---------------------------------------------------------------- geometry check

void geometry_check(const ExperimentConfig& cfg, ArtifactWriter& out, JobRecord& job) {
  const auto geom = make_geometry(cfg.geometry);
  const bool circular = geom.kind() == SectionKind::Circular;
  NeumannOptions nopt;
  nopt.n_rings = cfg.geometry.neumann_rings;
  const TiltField tilt = circular ? tilt_field_circular(geom) : tilt_field_neumann(geom, nopt);
  const auto rule = circular ? DerivativeRule::Analytic : DerivativeRule::SampleGrid;
  const double residual = check_divergence_identity(geom, tilt, rule);
  job.assertions.push_back(check("divergence identity", residual <= cfg.geometry.identity_tol,
                                 "max |A div V - dA/dz| = " + num(residual) + ", tol " + num(cfg.geometry.identity_tol)));
  json summary{{"kind", cfg.geometry.kind}, {"epsilon", geom.epsilon()}, {"identity_residual", residual}};
  try {
    summary["flow_reconstruction_error"] = flow_reconstruction_error(geom, tilt, 1.0);
  } catch (const LabError& e) {
    summary["flow_reconstruction_error"] = nullptr;
    summary["flow_note"] = e.what();
  }
  std::vector<std::vector<double>> rows;
  for (int k = 0; k <= geom.n_z_samples(); ++k) {
    const double z = geom.z_sample(k);
    rows.push_back({z, area(geom, z), area_slope(geom, z, rule), tilt.divergence(z)});
  }
  out.write("geometry_area.csv", csv_table({"z", "area", "area_slope", "div_V"}, rows));
  std::vector<Series> outlines;
  for (double z : {0.0, 0.5, 1.0}) {
    Series s{"z = " + num(z), {}, {}};
    auto poly = geom.section(z, 96);
    poly.push_back(poly.front());
    for (const auto& p : poly) {
      s.x.push_back(p.x());
      s.y.push_back(p.y());
    }
    outlines.push_back(std::move(s));
  }
  out.write("geometry_sections.svg", svg_plot({"cross sections (unscaled)", "x", "y"}, outlines));
  out.write_json("geometry.json", summary);
  job.summary = summary;
}

// ---------------------------------------------------------------- run-1d

void run_1d_job(const ExperimentConfig& cfg, ArtifactWriter& out, JobRecord& job) {
  const auto& o = cfg.solver1d;
  const auto geom = make_geometry(cfg.geometry);
  const auto grid = NozzleGrid::build(geom, o.n_cells);
  const PressureLaw law = PressureLaw::power(cfg.pressure.gamma, cfg.pressure.kappa);
  const State1D s0 = sample_state(grid.grid, [&](double z) { return 1.0 + o.rho_amp * std::cos(kPi * z); },
                                  [&](double z) { return o.u_amp * std::sin(kPi * z); });
  const System1D system = o.system == "ns-drift" ? System1D::NSDrift : System1D::Euler;
  std::vector<double> outputs;
  for (int i = 0; i < o.outputs; ++i) outputs.push_back(o.t_end * i / (o.outputs - 1));
  Run1DOptions ropt;
  ropt.cfl = o.cfl;
  const auto traj = run_1d(system, s0, grid, law, {o.mu, o.eta, o.wall_traction}, o.t_end, outputs, ropt);

  std::vector<std::vector<double>> prof, hist;
  double mass_drift = 0.0, energy_rise = -INFINITY;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto& s = traj.states[k];
    for (int i = 0; i < grid.size(); ++i) prof.push_back({traj.times[k], grid.grid.center(i), s.rho[i], s.velocity(i)});
    hist.push_back({traj.times[k], traj.mass[k], traj.energy[k]});
    mass_drift = std::max(mass_drift, std::abs(traj.mass[k] - traj.mass[0]) / traj.mass[0]);
    energy_rise = std::max(energy_rise, traj.energy[k] - traj.energy[0]);
  }
  out.write("run1d_profiles.csv", csv_table({"t", "z", "rho", "u"}, prof));
  out.write("run1d_history.csv", csv_table({"t", "mass", "energy"}, hist));
  std::vector<Series> series;
  for (std::size_t k : {std::size_t{0}, traj.times.size() - 1}) {
    Series s{"rho, t = " + num(traj.times[k]), {}, {}};
    for (int i = 0; i < grid.size(); ++i) {
      s.x.push_back(grid.grid.center(i));
      s.y.push_back(traj.states[k].rho[i]);
    }
    series.push_back(std::move(s));
  }
  out.write("run1d_density.svg", svg_plot({"1D density", "z", "rho"}, series));
  const double mass_tol = 1e-12 * std::max(1, traj.n_steps);
  job.assertions.push_back(check("mass conservation", mass_drift <= mass_tol,
                                 "max relative drift " + num(mass_drift) + ", tol " + num(mass_tol)));
  const double energy_tol = 1e-12 * std::max(1.0, std::abs(traj.energy[0]));
  job.assertions.push_back(check("energy non-increasing", energy_rise <= energy_tol,
                                 "max E(t) - E(0) = " + num(energy_rise) + ", tol " + num(energy_tol)));
  job.summary = {{"system", o.system},       {"n_cells", o.n_cells},       {"n_steps", traj.n_steps},
                 {"t_end", traj.times.back()}, {"mass_drift", mass_drift}, {"energy_change", energy_rise}};
  out.write_json("run1d.json", job.summary);
}

// ---------------------------------------------------------------- run-axi

void run_axi_job(const ExperimentConfig& cfg, ArtifactWriter& out, JobRecord& job) {
  const auto& a = cfg.axi;
  const bool noslip = a.caps == "no-slip";
  StudyConfig sc;
  sc.mode = noslip ? StudyMode::Viscous : StudyMode::Inviscid;
  sc.radius = cfg.geometry.radius;
  sc.gamma = cfg.pressure.gamma;
  sc.kappa = cfg.pressure.kappa;
  sc.rho_amp = a.rho_amp;
  sc.u_amp = a.u_amp;
  sc.t_end = a.t_end;
  sc.mu = a.mu;
  sc.eta = a.eta;
  sc.snapshots = 21;
  const auto ref = build_reference(sc, a.n_z);
  const auto geom = ChannelGeometry::circular(cfg.geometry.radius, {}, {}, a.epsilon);
  const auto grid = AxiGrid::build(geom, a.n_r, a.n_z);
  const PressureLaw law = PressureLaw::power(cfg.pressure.gamma, cfg.pressure.kappa);
  const ViscParams3D visc{a.mu, a.eta, a.lambda};
  const CapCondition bc = noslip ? CapCondition::SlipPlusNoSlipCaps : CapCondition::SlipOnly;

  AxiState s0 = well_prepared_state(grid, geom, ref.pair);
  if (a.perturbation > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int c = 0; c < grid.cells(); ++c) {
      const double f = 1.0 + a.perturbation * u(rng);
      s0.rho[c] *= f;
      s0.mr[c] *= f;
      s0.mz[c] *= f;
    }
  }
  RelativeEnergyTracker tracker(grid, geom, ref.pair, law, visc, bc);
  AxiRunOptions ropt;
  ropt.cfl = a.cfl;
  const auto res = run_axi(s0, grid, law, visc, ref.horizon, bc, ropt,
                           [&](double t, double, const AxiState& s) { tracker.observe(t, s); });

  std::vector<std::vector<double>> erows, frows;
  double worst = -INFINITY;
  const double e0 = res.energy.empty() ? 1.0 : res.energy.front().kinetic + res.energy.front().potential;
  for (const auto& e : res.energy) {
    erows.push_back({e.t, e.kinetic, e.potential, e.dissipation, e.residual});
    worst = std::max(worst, e.residual);
  }
  const auto& f = res.final_state;
  for (int c = 0; c < grid.cells(); ++c) frows.push_back({grid.rc[c], grid.zc[c], f.rho[c], f.mr[c] / f.rho[c], f.mz[c] / f.rho[c]});
  double mass_drift = 0.0;
  for (double m : res.mass) mass_drift = std::max(mass_drift, std::abs(m - res.mass.front()) / res.mass.front());
  out.write("axi_energy.csv", csv_table({"t", "kinetic", "potential", "dissipation", "residual"}, erows));
  out.write("axi_final.csv", csv_table({"r", "z", "rho", "u_r", "u_z"}, frows));
  Series rel{"relative energy / |Omega|", {}, {}};
  for (const auto& s : tracker.samples()) {
    rel.x.push_back(s.t);
    rel.y.push_back(s.energy / grid.domain_volume());
  }
  out.write("axi_relative_energy.svg", svg_plot({"relative energy", "t", "E / |Omega|"}, {rel}));
  const double etol = a.energy_tol * std::max(1.0, std::abs(e0));
  const double mtol = 1e-12 * std::max(1, res.n_steps);
  job.assertions.push_back(check("energy inequality", worst <= etol,
                                 "max E + D - E(0) = " + num(worst) + ", tol " + num(etol)));
  job.assertions.push_back(check("mass conservation", mass_drift <= mtol,
                                 "max relative drift " + num(mass_drift) + ", tol " + num(mtol)));
  job.summary = {{"epsilon", a.epsilon},
                 {"lambda", a.lambda},
                 {"caps", a.caps},
                 {"horizon", ref.horizon},
                 {"n_steps", res.n_steps},
                 {"energy_residual", worst},
                 {"mass_drift", mass_drift},
                 {"sup_relative_energy_normalized", tracker.sup_energy() / grid.domain_volume()},
                 {"rei_max_residual", tracker.max_residual()},
                 {"notes", ref.notes}};
  out.write_json("axi.json", job.summary);
}

// ---------------------------------------------------------------- converge

json point_json(const StudyPoint& p) {
  return {{"epsilon", p.epsilon},         {"lambda", p.lambda},
          {"n_r", p.n_r},                 {"n_z", p.n_z},
          {"volume", p.volume},           {"sup_energy", p.sup_energy},
          {"sup_normalized", p.sup_normalized}, {"n_steps", p.n_steps},
          {"max_dt", p.max_dt},           {"h", p.h},
          {"rei_max_residual", p.rei_max_residual}, {"rei_scale", p.rei_scale},
          {"max_c1", p.max_c1},           {"max_c2", p.max_c2},
          {"max_c_wall", p.max_c_wall},   {"second_derivative_bounded", p.second_derivative_bounded},
          {"energy_residual", p.energy_residual}, {"mass_drift", p.mass_drift}};
}

void converge_job(const ExperimentConfig& cfg, StudyMode mode, ArtifactWriter& out, JobRecord& job) {
  StudyConfig sc = cfg.study;
  sc.mode = mode;
  sc.radius = cfg.geometry.radius;
  sc.gamma = cfg.pressure.gamma;
  sc.kappa = cfg.pressure.kappa;
  sc.jobs = resolve_jobs(cfg.jobs, sc.epsilons.size() + (sc.estimate_floor ? 1 : 0));
  const std::string tag = mode == StudyMode::Viscous ? "viscous" : "inviscid";
  if (sc.epsilons.empty()) {
    job.message = "empty epsilon list: nothing to run";
    return;
  }
  const auto rep = convergence_study(sc);

  std::vector<double> x, y;
  json pts = json::array();
  std::vector<std::vector<double>> rows, hist;
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    const auto& p = rep.points[i];
    x.push_back(p.epsilon + p.lambda);
    y.push_back(p.sup_normalized);
    pts.push_back(point_json(p));
    rows.push_back({p.epsilon, p.lambda, p.sup_normalized, static_cast<double>(p.n_steps), p.max_dt, p.h,
                    p.rei_max_residual, p.energy_residual, p.mass_drift});
    for (std::size_t k = 0; k < p.times.size(); ++k) hist.push_back({static_cast<double>(i), p.times[k], p.normalized[k]});
  }
  json j{{"mode", tag},         {"horizon", rep.horizon},     {"points", pts},
         {"floor", rep.floor},  {"has_floor", rep.has_floor}, {"monotone", rep.monotone},
         {"q", rep.fit.q},      {"C", rep.fit.C},             {"r2", rep.fit.r2},
         {"rei_constant", rep.rei_constant}, {"notes", rep.notes}};
  if (rep.has_floor) j["floor_refined"] = point_json(rep.floor_refined);
  out.write_json("converge_" + tag + ".json", j);
  out.write("converge_" + tag + "_points.csv",
            csv_table({"epsilon", "lambda", "sup_normalized", "n_steps", "max_dt", "h", "rei_residual",
                       "energy_residual", "mass_drift"},
                      rows));
  out.write("converge_" + tag + "_history.csv", csv_table({"point", "t", "normalized"}, hist));
  out.write("converge_" + tag + ".svg",
            svg_plot({"relative energy vs eps + lambda", "eps + lambda", "sup E / |Omega|", true, true},
                     {{"sup E/|Omega|", x, y}}));

  job.assertions.push_back(check("monotone in eps + lambda", rep.monotone, "floor slack " + num(rep.floor)));
  if (rep.points.size() >= 2)
    job.assertions.push_back(check("rate q >= q_min", rep.fit.q >= cfg.q_min,
                                   "q = " + num(rep.fit.q) + ", q_min " + num(cfg.q_min)));
  auto all = rep.points;
  if (rep.has_floor) all.push_back(rep.floor_refined);
  double worst_rei = 0.0, worst_energy = -INFINITY, worst_mass = 0.0;
  bool rei_ok = true, mass_ok = true;
  for (const auto& p : all) {
    const double ratio = p.rei_scale > 0.0 ? p.rei_max_residual / p.rei_scale : 0.0;
    worst_rei = std::max(worst_rei, ratio);
    rei_ok = rei_ok && p.rei_max_residual <= rep.rei_constant * p.rei_scale * (1.0 + 1e-12);
    worst_energy = std::max(worst_energy, p.energy_residual);
    worst_mass = std::max(worst_mass, p.mass_drift / std::max(1, p.n_steps));
    mass_ok = mass_ok && p.mass_drift <= 1e-12 * std::max(1, p.n_steps);
  }
  job.assertions.push_back(check("relative energy inequality guard", rei_ok,
                                 "max residual/(dt+h^2) = " + num(worst_rei) + ", C = " + num(rep.rei_constant)));
  job.assertions.push_back(check("energy inequality", worst_energy <= cfg.energy_tol,
                                 "max E + D - E(0) = " + num(worst_energy) + ", tol " + num(cfg.energy_tol)));
  job.assertions.push_back(check("mass conservation", mass_ok, "max drift per step " + num(worst_mass)));
  job.summary = {{"q", rep.fit.q}, {"monotone", rep.monotone}, {"floor", rep.floor}, {"points", rep.points.size()}};
}

// ---------------------------------------------------------------- korn sweep

void korn_job(const ExperimentConfig& cfg, ArtifactWriter& out, JobRecord& job) {
  const auto& k = cfg.korn;
  if (k.epsilons.empty()) {
    job.message = "empty epsilon list: nothing to run";
    return;
  }
  struct Cell {
    double eps = 0, ko1 = 0, ko2 = 0, lower = 0, constrained = 0;
    int dofs = 0;
  };
  std::vector<Cell> cells(k.epsilons.size());
  EigenOptions eo;
  eo.seed = static_cast<unsigned>(cfg.seed);
  parallel_for(cells.size(), resolve_jobs(cfg.jobs, cells.size()), [&](std::size_t i) {
    const auto geom = ChannelGeometry::circular(k.radius, {}, {}, k.epsilons[i]);
    const auto pb = ChannelProblem::build(geom, k.resolution);
    const auto est = thin_korn_constants(pb, eo);
    Cell c;
    c.eps = k.epsilons[i];
    c.ko1 = est.ko1;
    c.ko2 = est.ko2;
    c.dofs = est.dofs;
    c.lower = example_blowup_field(KernelElement::sine(), geom).lower_bound();
    if (k.constrained) c.constrained = optimal_korn_constant(pb, hat_basis(k.resolution.n_z), eo).value;
    cells[i] = c;
  });
  std::vector<double> eps, ko1, ko2, lower, con;
  json arr = json::array();
  std::vector<std::vector<double>> rows;
  for (const auto& c : cells) {
    eps.push_back(c.eps);
    ko1.push_back(c.ko1);
    ko2.push_back(c.ko2);
    lower.push_back(c.lower);
    con.push_back(c.constrained);
    arr.push_back({{"epsilon", c.eps}, {"ko1", c.ko1}, {"ko2", c.ko2}, {"lower_bound", c.lower},
                   {"constrained", c.constrained}, {"dofs", c.dofs}});
    rows.push_back({c.eps, c.ko1, c.ko2, c.lower, c.constrained, static_cast<double>(c.dofs)});
  }
  json j{{"cells", arr},
         {"resolution", {{"n_theta", k.resolution.n_theta}, {"n_rings", k.resolution.n_rings}, {"n_z", k.resolution.n_z}}}};
  double margin = INFINITY;
  for (const auto& c : cells) margin = std::min(margin, c.ko1 / c.lower);
  job.assertions.push_back(check("ko1 meets the example lower bound", margin >= 1.0, "min ko1 / bound = " + num(margin)));
  if (cells.size() >= 2) {
    const auto fit = fit_power_law(eps, ko1);
    j["ko1_slope"] = fit.q;
    job.assertions.push_back(check("ko1 slope", std::abs(fit.q - k.slope_target) <= k.slope_tol,
                                   "slope " + num(fit.q) + ", target " + num(k.slope_target) + " +- " + num(k.slope_tol)));
  }
  j["ko2_ratio"] = max_ratio(ko2);
  job.assertions.push_back(check("ko2 uniform", max_ratio(ko2) <= k.max_ratio, "max/min = " + num(max_ratio(ko2))));
  std::vector<Series> series{{"ko1", eps, ko1}, {"example bound", eps, lower}, {"ko2", eps, ko2}};
  if (k.constrained) {
    j["constrained_ratio"] = max_ratio(con);
    job.assertions.push_back(
        check("constrained constant uniform", max_ratio(con) <= k.max_ratio, "max/min = " + num(max_ratio(con))));
    series.push_back({"kernel-orthogonal ko1", eps, con});
  }
  out.write_json("korn_sweep.json", j);
  out.write("korn_sweep.csv", csv_table({"epsilon", "ko1", "ko2", "lower_bound", "constrained", "dofs"}, rows));
  out.write("korn_sweep.svg", svg_plot({"Korn constants", "eps", "constant", true, true}, series));
  job.summary = j;
  job.summary.erase("cells");
}

// ---------------------------------------------------------------- poincare

void poincare_job(const ExperimentConfig& cfg, ArtifactWriter& out, JobRecord& job) {
  const auto& p = cfg.poincare;
  if (p.rings.empty()) {
    job.message = "empty ring list: nothing to run";
    return;
  }
  auto disk = [&](double radius, int rings) { return spider_mesh(circle_polygon(Vec2::Zero(), radius, 8 * rings), rings); };
  EigenOptions eo;
  eo.seed = static_cast<unsigned>(cfg.seed);
  std::vector<double> values(p.rings.size());
  parallel_for(values.size(), resolve_jobs(cfg.jobs, values.size()),
               [&](std::size_t i) { values[i] = tangent_poincare_constant(disk(p.radius, p.rings[i]), eo); });
  std::vector<std::vector<double>> rows;
  json j{{"radius", p.radius}};
  json mesh = json::array();
  double worst_change = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    mesh.push_back({{"rings", p.rings[i]}, {"constant", values[i]}});
    rows.push_back({static_cast<double>(p.rings[i]), p.radius, values[i]});
    if (i > 0) worst_change = std::max(worst_change, std::abs(values[i] - values[i - 1]) / values[i]);
  }
  j["mesh"] = mesh;
  if (values.size() >= 2)
    job.assertions.push_back(check("mesh stability", worst_change < p.stability_tol,
                                   "max relative change " + num(worst_change) + ", tol " + num(p.stability_tol)));
  json dil = json::array();
  double worst_dil = 0.0;
  for (double d : p.dilations) {
    const double c = tangent_poincare_constant(disk(d * p.radius, p.rings.front()), eo);
    const double rel = std::abs(c / (d * d * values.front()) - 1.0);
    worst_dil = std::max(worst_dil, rel);
    dil.push_back({{"factor", d}, {"constant", c}, {"relative_error", rel}});
    rows.push_back({static_cast<double>(p.rings.front()), d * p.radius, c});
  }
  j["dilation"] = dil;
  if (!p.dilations.empty())
    job.assertions.push_back(check("dilation law", worst_dil <= 1e-6, "max relative deviation " + num(worst_dil)));
  const double trace = normal_trace_bound(circle_polygon(Vec2::Zero(), p.radius, p.trace_vertices));
  const double trace_err = std::abs(trace - kPi * p.radius);
  j["normal_trace"] = trace;
  j["normal_trace_error"] = trace_err;
  job.assertions.push_back(check("normal trace bound", trace_err <= p.trace_tol,
                                 "|bound - pi R| = " + num(trace_err) + ", tol " + num(p.trace_tol)));
  out.write_json("poincare.json", j);
  out.write("poincare.csv", csv_table({"rings", "radius", "constant"}, rows));
  job.summary = j;
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::GeometryCheck: return "geometry check";
    case Command::Run1D: return "run-1d";
    case Command::RunAxi: return "run-axi";
    case Command::ConvergeInviscid: return "converge inviscid";
    case Command::ConvergeViscous: return "converge viscous";
    case Command::KornSweep: return "korn sweep";
    case Command::Poincare: return "poincare";
  }
  return "unknown";
}

int resolve_jobs(int requested, std::size_t cells) {
  if (requested > 0) return requested;
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  return std::max(1, std::min(hw, static_cast<int>(cells)));
}

RunManifest run_command(const ExperimentConfig& config, Command command, const std::filesystem::path& out_dir) {
  ExperimentConfig cfg = config;
  if (command == Command::ConvergeInviscid) cfg.study.mode = StudyMode::Inviscid;
  if (command == Command::ConvergeViscous) cfg.study.mode = StudyMode::Viscous;
  validate_config(cfg);

  RunManifest m;
  m.command = command_name(command);
  m.config_hash = config_hash(cfg);
  ArtifactWriter out(out_dir);
  JobRecord job;
  job.name = m.command;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (command) {
      case Command::GeometryCheck: geometry_check(cfg, out, job); break;
      case Command::Run1D: run_1d_job(cfg, out, job); break;
      case Command::RunAxi: run_axi_job(cfg, out, job); break;
      case Command::ConvergeInviscid: converge_job(cfg, StudyMode::Inviscid, out, job); break;
      case Command::ConvergeViscous: converge_job(cfg, StudyMode::Viscous, out, job); break;
      case Command::KornSweep: korn_job(cfg, out, job); break;
      case Command::Poincare: poincare_job(cfg, out, job); break;
    }
  } catch (const LabError& e) {
    job.status = "failed";
    job.message = std::string(to_string(e.kind())) + ": " + e.what();
  }
  job.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.jobs.push_back(job);
  write_manifest(m, out);
  m.artifacts = out.files();
  return m;
}

int exit_code(const RunManifest& m) { return m.passed() ? 0 : 1; }

}  // namespace nozzle
