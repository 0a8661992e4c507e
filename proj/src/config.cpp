#include "nozzle/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

namespace nozzle {

namespace {

using Errors = std::vector<std::string>;

std::string join(const Errors& e) {
  std::string s;
  for (const auto& m : e) s += (s.empty() ? "" : "\n") + m;
  return s;
}

// Typed reads from one TOML table; remembers the keys it consumed so the rest
// can be reported as unknown.
class Section {
 public:
  Section(const toml::table* t, std::string prefix, Errors& errors)
      : t_(t), prefix_(std::move(prefix)), errors_(errors) {}

  void number(const char* key, double& out) {
    if (auto n = get(key)) {
      if (auto v = n->value<double>(); v && (n->is_integer() || n->is_floating_point()))
        out = *v;
      else
        bad(key, "a number");
    }
  }
  template <class I>
  void integer(const char* key, I& out) {
    if (auto n = get(key)) {
      if (n->is_integer())
        out = static_cast<I>(*n->value<std::int64_t>());
      else
        bad(key, "an integer");
    }
  }
  void boolean(const char* key, bool& out) {
    if (auto n = get(key)) {
      if (n->is_boolean())
        out = *n->value<bool>();
      else
        bad(key, "true or false");
    }
  }
  void string(const char* key, std::string& out) {
    if (auto n = get(key)) {
      if (n->is_string())
        out = *n->value<std::string>();
      else
        bad(key, "a string");
    }
  }
  void numbers(const char* key, std::vector<double>& out) {
    if (auto n = get(key)) {
      const auto* arr = n->as_array();
      std::vector<double> v;
      bool ok = arr != nullptr;
      if (ok)
        for (const auto& e : *arr) {
          if (!(e.is_integer() || e.is_floating_point())) {
            ok = false;
            break;
          }
          v.push_back(*e.value<double>());
        }
      if (ok)
        out = v;
      else
        bad(key, "an array of numbers");
    }
  }
  void integers(const char* key, std::vector<int>& out) {
    if (auto n = get(key)) {
      const auto* arr = n->as_array();
      std::vector<int> v;
      bool ok = arr != nullptr;
      if (ok)
        for (const auto& e : *arr) {
          if (!e.is_integer()) {
            ok = false;
            break;
          }
          v.push_back(static_cast<int>(*e.value<std::int64_t>()));
        }
      if (ok)
        out = v;
      else
        bad(key, "an array of integers");
    }
  }
  void polynomial(const char* key, Polynomial& out) {
    std::vector<double> c = out.coeffs;
    numbers(key, c);
    out.coeffs = c;
  }
  void mark(const char* key) { used_.insert(key); }
  void finish() {
    if (!t_) return;
    for (const auto& [k, v] : *t_)
      if (!used_.count(std::string(k.str()))) {
        std::ostringstream os;
        os << path(std::string(k.str())) << ": unknown key (line " << v.source().begin.line << ")";
        errors_.push_back(os.str());
      }
  }

 private:
  const toml::node* get(const char* key) {
    used_.insert(key);
    return t_ ? t_->get(key) : nullptr;
  }
  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  void bad(const char* key, const char* what) {
    std::ostringstream os;
    os << path(key) << ": expected " << what << " (line " << t_->get(key)->source().begin.line << ")";
    errors_.push_back(os.str());
  }

  const toml::table* t_;
  std::string prefix_;
  Errors& errors_;
  std::set<std::string> used_;
};

const toml::table* subtable(const toml::table& root, const char* name, Errors& errors) {
  const auto* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) {
    errors.push_back(std::string(name) + ": expected a table");
    return nullptr;
  }
  return n->as_table();
}

nlohmann::json poly_json(const Polynomial& p) { return p.coeffs; }

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : LabError(ErrorKind::Configuration, join(errors)), errors_(std::move(errors)) {}

ExperimentConfig parse_config(std::string_view text, const std::string& source, const std::filesystem::path& base) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ConfigError({os.str()});
  }
  ExperimentConfig c;
  Errors errors;
  Section top(&root, "", errors);
  {
    std::int64_t seed = static_cast<std::int64_t>(c.seed);
    top.integer("seed", seed);
    if (seed < 0)
      errors.push_back("seed: must be non-negative");
    else
      c.seed = static_cast<std::uint64_t>(seed);
    top.integer("jobs", c.jobs);
  }
  if (const auto* t = subtable(root, "output", errors)) {
    Section s(t, "output", errors);
    s.string("dir", c.output_dir);
    s.finish();
  }
  if (const auto* t = subtable(root, "geometry", errors)) {
    auto& g = c.geometry;
    Section s(t, "geometry", errors);
    s.string("kind", g.kind);
    s.polynomial("radius", g.radius);
    s.polynomial("centerline_x", g.centerline_x);
    s.polynomial("centerline_y", g.centerline_y);
    s.polynomial("semi_a", g.semi_a);
    s.polynomial("semi_b", g.semi_b);
    s.integer("n_slices", g.n_slices);
    s.integer("n_vertices", g.n_vertices);
    s.string("sections_file", g.sections_file);
    s.number("epsilon", g.epsilon);
    s.integer("n_z_samples", g.n_z_samples);
    s.integer("neumann_rings", g.neumann_rings);
    s.number("identity_tol", g.identity_tol);
    s.finish();
    if (!g.sections_file.empty() && !base.empty() && std::filesystem::path(g.sections_file).is_relative())
      g.sections_file = (base / g.sections_file).string();
  }
  if (const auto* t = subtable(root, "pressure", errors)) {
    Section s(t, "pressure", errors);
    s.number("gamma", c.pressure.gamma);
    s.number("kappa", c.pressure.kappa);
    s.finish();
  }
  if (const auto* t = subtable(root, "solver1d", errors)) {
    auto& o = c.solver1d;
    Section s(t, "solver1d", errors);
    s.string("system", o.system);
    s.integer("n_cells", o.n_cells);
    s.number("cfl", o.cfl);
    s.number("t_end", o.t_end);
    s.integer("outputs", o.outputs);
    s.number("mu", o.mu);
    s.number("eta", o.eta);
    s.boolean("wall_traction", o.wall_traction);
    s.number("rho_amp", o.rho_amp);
    s.number("u_amp", o.u_amp);
    s.finish();
  }
  if (const auto* t = subtable(root, "axi", errors)) {
    auto& o = c.axi;
    Section s(t, "axi", errors);
    s.integer("n_r", o.n_r);
    s.integer("n_z", o.n_z);
    s.number("cfl", o.cfl);
    s.number("t_end", o.t_end);
    s.number("epsilon", o.epsilon);
    s.number("lambda", o.lambda);
    s.number("mu", o.mu);
    s.number("eta", o.eta);
    s.string("caps", o.caps);
    s.number("perturbation", o.perturbation);
    s.number("rho_amp", o.rho_amp);
    s.number("u_amp", o.u_amp);
    s.number("energy_tol", o.energy_tol);
    s.finish();
  }
  if (const auto* t = subtable(root, "study", errors)) {
    auto& o = c.study;
    Section s(t, "study", errors);
    std::string mode = o.mode == StudyMode::Viscous ? "viscous" : "inviscid";
    s.string("mode", mode);
    if (mode == "viscous")
      o.mode = StudyMode::Viscous;
    else if (mode == "inviscid")
      o.mode = StudyMode::Inviscid;
    else
      errors.push_back("study.mode: expected \"inviscid\" or \"viscous\", got \"" + mode + "\"");
    s.numbers("epsilons", o.epsilons);
    s.numbers("lambdas", o.lambdas);
    s.number("t_end", o.t_end);
    s.integer("snapshots", o.snapshots);
    s.integer("n_r", o.n_r);
    s.integer("n_z", o.n_z);
    s.number("cfl", o.cfl);
    s.number("reference_cfl", o.reference_cfl);
    s.number("mu", o.mu);
    s.number("eta", o.eta);
    s.number("rho_amp", o.rho_amp);
    s.number("u_amp", o.u_amp);
    s.boolean("wall_traction", o.wall_traction);
    s.boolean("estimate_floor", o.estimate_floor);
    s.number("q_min", c.q_min);
    s.number("energy_tol", c.energy_tol);
    s.finish();
  }
  if (const auto* t = subtable(root, "korn", errors)) {
    auto& o = c.korn;
    Section s(t, "korn", errors);
    s.numbers("epsilons", o.epsilons);
    s.polynomial("radius", o.radius);
    s.integer("n_theta", o.resolution.n_theta);
    s.integer("n_rings", o.resolution.n_rings);
    s.integer("n_z", o.resolution.n_z);
    s.number("slope_target", o.slope_target);
    s.number("slope_tol", o.slope_tol);
    s.number("max_ratio", o.max_ratio);
    s.boolean("constrained", o.constrained);
    s.finish();
  }
  if (const auto* t = subtable(root, "poincare", errors)) {
    auto& o = c.poincare;
    Section s(t, "poincare", errors);
    s.number("radius", o.radius);
    s.integers("rings", o.rings);
    s.numbers("dilations", o.dilations);
    s.number("stability_tol", o.stability_tol);
    s.integer("trace_vertices", o.trace_vertices);
    s.number("trace_tol", o.trace_tol);
    s.finish();
  }
  for (const char* t : {"geometry", "pressure", "solver1d", "axi", "study", "korn", "poincare", "output"}) top.mark(t);
  top.finish();
  try {
    validate_config(c);
  } catch (const ConfigError& v) {
    errors.insert(errors.end(), v.errors().begin(), v.errors().end());
  }
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot read configuration file"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

void validate_config(const ExperimentConfig& c) {
  Errors e;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) e.push_back(msg);
  };
  const auto& g = c.geometry;
  need(g.kind == "circular" || g.kind == "ellipse" || g.kind == "tabulated",
       "geometry.kind: expected circular, ellipse or tabulated");
  need(g.epsilon > 0.0, "geometry.epsilon: must be positive");
  need(g.n_z_samples >= 2, "geometry.n_z_samples: must be at least 2");
  need(!g.radius.coeffs.empty(), "geometry.radius: needs at least one coefficient");
  need(g.n_slices >= 3, "geometry.n_slices: must be at least 3");
  need(g.n_vertices >= 8, "geometry.n_vertices: must be at least 8");
  need(g.identity_tol > 0.0, "geometry.identity_tol: must be positive");
  need(g.neumann_rings >= 2, "geometry.neumann_rings: must be at least 2");
  if (g.kind == "tabulated") {
    need(!g.sections_file.empty(), "geometry.sections_file: required for tabulated geometry");
    need(g.sections_file.empty() || std::filesystem::exists(g.sections_file),
         "geometry.sections_file: file not found: " + g.sections_file);
  }

  need(c.pressure.gamma > 1.5, "pressure.gamma: growth hypothesis violated, the pressure law needs gamma > 3/2 (got " +
                                   std::to_string(c.pressure.gamma) + ")");
  need(c.pressure.kappa > 0.0, "pressure.kappa: must be positive");

  const auto& s1 = c.solver1d;
  need(s1.system == "euler" || s1.system == "ns-drift", "solver1d.system: expected euler or ns-drift");
  need(s1.n_cells >= 4, "solver1d.n_cells: must be at least 4");
  need(s1.cfl > 0.0 && s1.cfl <= 1.0, "solver1d.cfl: must lie in (0, 1]");
  need(s1.t_end > 0.0, "solver1d.t_end: must be positive");
  need(s1.outputs >= 2, "solver1d.outputs: must be at least 2");
  need(s1.mu > 0.0, "solver1d.mu: must be positive");
  need(s1.eta >= 0.0, "solver1d.eta: must be non-negative");
  need(s1.rho_amp >= 0.0 && s1.rho_amp < 1.0, "solver1d.rho_amp: must lie in [0, 1)");

  const auto& a = c.axi;
  need(a.n_r >= 8 && a.n_z >= 32, "axi: n_r >= 8 and n_z >= 32 required");
  need(a.cfl > 0.0 && a.cfl <= 1.0, "axi.cfl: must lie in (0, 1]");
  need(a.t_end > 0.0, "axi.t_end: must be positive");
  need(a.epsilon > 0.0, "axi.epsilon: must be positive");
  need(a.lambda > 0.0, "axi.lambda: must be positive");
  need(a.mu > 0.0, "axi.mu: must be positive");
  need(a.eta >= 0.0, "axi.eta: must be non-negative");
  need(a.caps == "slip" || a.caps == "no-slip", "axi.caps: expected slip or no-slip");
  need(a.caps != "no-slip" || a.eta > 0.0,
       "axi.eta: bulk-viscosity hypothesis violated, no-slip caps require eta > 0");
  need(a.perturbation >= 0.0 && a.perturbation < 0.5, "axi.perturbation: must lie in [0, 0.5)");
  need(a.rho_amp >= 0.0 && a.rho_amp < 1.0, "axi.rho_amp: must lie in [0, 1)");
  need(a.energy_tol > 0.0, "axi.energy_tol: must be positive");

  const auto& st = c.study;
  const bool viscous = st.mode == StudyMode::Viscous;
  need(!viscous || st.eta > 0.0,
       "study.eta: bulk-viscosity hypothesis violated, the viscous study requires eta > 0 (got " +
           std::to_string(st.eta) + ")");
  need(st.mu > 0.0, "study.mu: must be positive");
  need(st.eta >= 0.0, "study.eta: must be non-negative");
  need(st.t_end > 0.0, "study.t_end: must be positive");
  need(st.snapshots >= 4, "study.snapshots: must be at least 4");
  need(st.n_r >= 8 && st.n_z >= 32, "study: n_r >= 8 and n_z >= 32 required");
  need(st.cfl > 0.0 && st.cfl <= 1.0, "study.cfl: must lie in (0, 1]");
  need(st.reference_cfl > 0.0 && st.reference_cfl <= 1.0, "study.reference_cfl: must lie in (0, 1]");
  for (double x : st.epsilons) need(x > 0.0, "study.epsilons: values must be positive");
  for (double x : st.lambdas) need(x > 0.0, "study.lambdas: values must be positive");
  need(st.lambdas.empty() || st.lambdas.size() == st.epsilons.size(),
       "study.lambdas: must be empty or match study.epsilons in length");
  if (viscous)
    for (double x : st.lambdas) need(x == 1.0, "study.lambdas: the viscous study runs at lambda = 1");
  need(c.q_min > 0.0, "study.q_min: must be positive");
  need(c.energy_tol > 0.0, "study.energy_tol: must be positive");

  const auto& k = c.korn;
  for (double x : k.epsilons) need(x > 0.0, "korn.epsilons: values must be positive");
  need(k.resolution.n_theta >= 3 && k.resolution.n_rings >= 1 && k.resolution.n_z >= 2,
       "korn: n_theta >= 3, n_rings >= 1 and n_z >= 2 required");
  need(!k.radius.coeffs.empty(), "korn.radius: needs at least one coefficient");
  need(k.slope_tol > 0.0, "korn.slope_tol: must be positive");
  need(k.max_ratio >= 1.0, "korn.max_ratio: must be at least 1");

  const auto& p = c.poincare;
  need(p.radius > 0.0, "poincare.radius: must be positive");
  for (int r : p.rings) need(r >= 2, "poincare.rings: values must be at least 2");
  for (double d : p.dilations) need(d > 0.0, "poincare.dilations: values must be positive");
  need(p.stability_tol > 0.0, "poincare.stability_tol: must be positive");
  need(p.trace_vertices >= 3, "poincare.trace_vertices: must be at least 3");
  need(p.trace_tol > 0.0, "poincare.trace_tol: must be positive");

  need(c.jobs >= 0, "jobs: must be non-negative");
  need(!c.output_dir.empty(), "output.dir: must not be empty");
  if (!e.empty()) throw ConfigError(e);
}

std::string canonical_config(const ExperimentConfig& c) {
  using nlohmann::json;
  const auto& g = c.geometry;
  json j;
  j["geometry"] = {{"kind", g.kind},
                   {"radius", poly_json(g.radius)},
                   {"centerline_x", poly_json(g.centerline_x)},
                   {"centerline_y", poly_json(g.centerline_y)},
                   {"semi_a", poly_json(g.semi_a)},
                   {"semi_b", poly_json(g.semi_b)},
                   {"n_slices", g.n_slices},
                   {"n_vertices", g.n_vertices},
                   {"sections_file", g.sections_file},
                   {"epsilon", g.epsilon},
                   {"n_z_samples", g.n_z_samples},
                   {"neumann_rings", g.neumann_rings},
                   {"identity_tol", g.identity_tol}};
  j["pressure"] = {{"gamma", c.pressure.gamma}, {"kappa", c.pressure.kappa}};
  const auto& s1 = c.solver1d;
  j["solver1d"] = {{"system", s1.system}, {"n_cells", s1.n_cells}, {"cfl", s1.cfl},
                   {"t_end", s1.t_end},   {"outputs", s1.outputs}, {"mu", s1.mu},
                   {"eta", s1.eta},       {"wall_traction", s1.wall_traction},
                   {"rho_amp", s1.rho_amp}, {"u_amp", s1.u_amp}};
  const auto& a = c.axi;
  j["axi"] = {{"n_r", a.n_r},         {"n_z", a.n_z},       {"cfl", a.cfl},   {"t_end", a.t_end},
              {"epsilon", a.epsilon}, {"lambda", a.lambda}, {"mu", a.mu},     {"eta", a.eta},
              {"caps", a.caps},       {"perturbation", a.perturbation},       {"rho_amp", a.rho_amp},
              {"u_amp", a.u_amp},     {"energy_tol", a.energy_tol}};
  const auto& st = c.study;
  j["study"] = {{"mode", st.mode == StudyMode::Viscous ? "viscous" : "inviscid"},
                {"epsilons", st.epsilons},
                {"lambdas", st.lambdas},
                {"t_end", st.t_end},
                {"snapshots", st.snapshots},
                {"n_r", st.n_r},
                {"n_z", st.n_z},
                {"cfl", st.cfl},
                {"reference_cfl", st.reference_cfl},
                {"mu", st.mu},
                {"eta", st.eta},
                {"rho_amp", st.rho_amp},
                {"u_amp", st.u_amp},
                {"wall_traction", st.wall_traction},
                {"estimate_floor", st.estimate_floor},
                {"q_min", c.q_min},
                {"energy_tol", c.energy_tol}};
  const auto& k = c.korn;
  j["korn"] = {{"epsilons", k.epsilons},       {"radius", poly_json(k.radius)},       {"n_theta", k.resolution.n_theta}, {"n_rings", k.resolution.n_rings},
               {"n_z", k.resolution.n_z},      {"slope_target", k.slope_target}, {"slope_tol", k.slope_tol},
               {"max_ratio", k.max_ratio},     {"constrained", k.constrained}};
  const auto& p = c.poincare;
  j["poincare"] = {{"radius", p.radius},          {"rings", p.rings},
                   {"dilations", p.dilations},    {"stability_tol", p.stability_tol},
                   {"trace_vertices", p.trace_vertices}, {"trace_tol", p.trace_tol}};
  // Output location and job count leave the results unchanged and stay out of the hash.
  j["seed"] = c.seed;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

ChannelGeometry make_geometry(const GeometryConfig& g) {
  if (g.kind == "circular")
    return ChannelGeometry::circular(g.radius, g.centerline_x, g.centerline_y, g.epsilon, g.n_z_samples);
  std::vector<Polygon> sections;
  if (g.kind == "ellipse") {
    for (int k = 0; k < g.n_slices; ++k) {
      const double z = static_cast<double>(k) / (g.n_slices - 1);
      sections.push_back(ellipse_polygon(Vec2::Zero(), g.semi_a(z), g.semi_b(z), g.n_vertices));
    }
  } else if (g.kind == "tabulated") {
    std::ifstream in(g.sections_file);
    if (!in) fail(ErrorKind::Configuration, "cannot read sections file " + g.sections_file);
    std::map<int, Polygon> slices;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      for (char& ch : line)
        if (ch == ',') ch = ' ';
      std::istringstream ls(line);
      int k;
      double x, y;
      if (!(ls >> k >> x >> y)) {
        if (line_no == 1) continue;  // header
        fail(ErrorKind::Configuration, g.sections_file + ":" + std::to_string(line_no) + ": expected slice,x,y");
      }
      slices[k].emplace_back(x, y);
    }
    for (int k = 0; k < static_cast<int>(slices.size()); ++k) {
      if (!slices.count(k)) fail(ErrorKind::Configuration, "sections file skips slice " + std::to_string(k));
      sections.push_back(slices[k]);
    }
  } else {
    fail(ErrorKind::UnsupportedKind, "unknown geometry kind " + g.kind);
  }
  return ChannelGeometry::tabulated(std::move(sections), g.epsilon);
}

}  // namespace nozzle
