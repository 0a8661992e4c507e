#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <string>

#include <json.hpp>

#include "doctest.h"
#include "nozzle/pipelines.hpp"

using namespace nozzle;
namespace fs = std::filesystem;

namespace {

fs::path fresh(const std::string& name) {
  auto p = fs::temp_directory_path() / ("nozzle_pipe_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> files_under(const fs::path& root) {
  std::set<std::string> s;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) s.insert(fs::relative(e.path(), root).generic_string());
  return s;
}

// Every file on disk is listed in manifest.json and vice versa.
void check_manifest(const fs::path& root) {
  const auto j = nlohmann::json::parse(slurp(root / "manifest.json"));
  std::set<std::string> listed;
  for (const auto& a : j["artifacts"]) listed.insert(a.get<std::string>());
  CHECK(listed == files_under(root));
  CHECK(j["code_version"] == kCodeVersion);
  CHECK(j["config_hash"].get<std::string>().size() == 16);
}

// Byte-identical artifacts; the manifest differs only by wall-clock time.
void check_identical(const fs::path& a, const fs::path& b) {
  const auto fa = files_under(a);
  REQUIRE(fa == files_under(b));
  for (const auto& f : fa) {
    CAPTURE(f);
    if (f == "manifest.json") continue;
    CHECK(slurp(a / f) == slurp(b / f));
  }
  auto ja = nlohmann::json::parse(slurp(a / "manifest.json"));
  auto jb = nlohmann::json::parse(slurp(b / "manifest.json"));
  for (auto* j : {&ja, &jb})
    for (auto& job : (*j)["jobs"]) job.erase("wall_clock_s");
  CHECK(ja == jb);
}

ExperimentConfig quick() {
  ExperimentConfig c;
  c.solver1d.n_cells = 64;
  c.solver1d.t_end = 0.05;
  c.axi.n_r = 8;
  c.axi.n_z = 32;
  c.axi.t_end = 0.02;
  c.axi.perturbation = 0.01;
  c.poincare.rings = {4, 6};
  c.poincare.trace_vertices = 20000;
  c.poincare.trace_tol = 1e-7;
  c.korn.epsilons = {0.4, 0.2};
  c.korn.resolution = {8, 2, 10};
  return c;
}

}  // namespace

TEST_CASE("pipelines: job count rule") {
  CHECK(resolve_jobs(3, 10) == 3);
  CHECK(resolve_jobs(0, 1) == 1);
  CHECK(resolve_jobs(0, 0) == 1);
  CHECK(resolve_jobs(0, 1000) >= 1);
  CHECK(resolve_jobs(0, 1000) <= static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
}

TEST_CASE("pipelines: empty study lists give a passing no-op manifest") {
  ExperimentConfig c = quick();
  c.study.epsilons.clear();
  c.korn.epsilons.clear();
  c.poincare.rings.clear();
  for (Command cmd : {Command::ConvergeInviscid, Command::ConvergeViscous, Command::KornSweep, Command::Poincare}) {
    CAPTURE(command_name(cmd));
    const auto dir = fresh("noop");
    const auto m = run_command(c, cmd, dir);
    CHECK(exit_code(m) == 0);
    CHECK(files_under(dir) == std::set<std::string>{"manifest.json"});
  }
}

TEST_CASE("pipelines: geometry check writes listed artifacts and passes") {
  const auto dir = fresh("geom");
  const auto m = run_command(quick(), Command::GeometryCheck, dir);
  CHECK(exit_code(m) == 0);
  check_manifest(dir);
  CHECK(fs::exists(dir / "geometry_area.csv"));
  CHECK(slurp(dir / "geometry_sections.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("pipelines: determinism of the seeded runs") {
  for (Command cmd : {Command::Run1D, Command::RunAxi, Command::KornSweep}) {
    CAPTURE(command_name(cmd));
    ExperimentConfig c = quick();
    const auto a = fresh("det_a"), b = fresh("det_b");
    c.jobs = 1;
    const auto ma = run_command(c, cmd, a);
    c.jobs = 2;  // parallel sweep must not change the bytes
    const auto mb = run_command(c, cmd, b);
    CHECK(ma.jobs[0].status == "ok");
    check_manifest(a);
    check_identical(a, b);
  }
}

TEST_CASE("pipelines: the seed reaches the perturbed start") {
  ExperimentConfig c = quick();
  const auto a = fresh("seed_a"), b = fresh("seed_b");
  run_command(c, Command::RunAxi, a);
  c.seed += 1;
  run_command(c, Command::RunAxi, b);
  CHECK(slurp(a / "axi_final.csv") != slurp(b / "axi_final.csv"));
}

TEST_CASE("pipelines: config violations throw before any job runs") {
  ExperimentConfig c = quick();
  c.study.eta = 0.0;
  const auto dir = fresh("eta0");
  CHECK_THROWS_AS(run_command(c, Command::ConvergeViscous, dir), ConfigError);
  CHECK_FALSE(fs::exists(dir));
  // The same study is fine without viscosity requirements.
  c.study.epsilons.clear();
  CHECK(exit_code(run_command(c, Command::ConvergeInviscid, dir)) == 0);
}

TEST_CASE("pipelines: a failing job is recorded and gives exit code 1") {
  ExperimentConfig c = quick();
  c.solver1d.cfl = 1.0;
  c.solver1d.u_amp = 3.0;
  const auto dir = fresh("fail");
  const auto m = run_command(c, Command::Run1D, dir);
  CHECK(exit_code(m) == 1);
  REQUIRE(m.jobs.size() == 1);
  CHECK(m.jobs[0].status == "failed");
  CHECK_FALSE(m.jobs[0].message.empty());
  check_manifest(dir);
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(j["passed"] == false);
}

TEST_CASE("pipelines: poincare reports stability and the normal trace") {
  const auto dir = fresh("poin");
  const auto m = run_command(quick(), Command::Poincare, dir);
  CHECK(m.jobs[0].status == "ok");
  check_manifest(dir);
  const auto j = nlohmann::json::parse(slurp(dir / "poincare.json"));
  CHECK(j.contains("normal_trace"));
}
