#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "nozzle/pipelines.hpp"

using namespace nozzle;

int main(int argc, char** argv) {
  CLI::App app{"Thin-channel flow and Korn-constant experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int jobs = -1;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "TOML experiment configuration")->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (NOZZLE_LAB_OUT overrides)");
  auto* jobs_opt = app.add_option("--jobs", jobs, "parallel jobs, 0 = automatic")->check(CLI::NonNegativeNumber);
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.fallthrough();

  Command command = Command::GeometryCheck;
  auto* geometry = app.add_subcommand("geometry", "geometry diagnostics");
  geometry->require_subcommand(1);
  geometry->add_subcommand("check", "tilt-field divergence identity and flow map")->callback([&] {
    command = Command::GeometryCheck;
  });
  app.add_subcommand("run-1d", "quasi-1D nozzle run")->callback([&] { command = Command::Run1D; });
  app.add_subcommand("run-axi", "axisymmetric channel run")->callback([&] { command = Command::RunAxi; });
  auto* converge = app.add_subcommand("converge", "relative-energy convergence study");
  std::string mode;
  converge->add_option("mode", mode, "inviscid or viscous")->required()->check(CLI::IsMember({"inviscid", "viscous"}));
  converge->callback([&] { command = mode == "viscous" ? Command::ConvergeViscous : Command::ConvergeInviscid; });
  auto* korn = app.add_subcommand("korn", "Korn constants");
  korn->require_subcommand(1);
  korn->add_subcommand("sweep", "ko1 / ko2 sweep over epsilon")->callback([&] { command = Command::KornSweep; });
  app.add_subcommand("poincare", "tangent Poincare constant of the disk")->callback([&] { command = Command::Poincare; });

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (*out_opt) cfg.output_dir = out_dir;
    if (const char* env = std::getenv("NOZZLE_LAB_OUT"); env && *env) cfg.output_dir = env;
    if (*jobs_opt) cfg.jobs = jobs;
    if (*seed_opt) cfg.seed = seed;
    const RunManifest m = run_command(cfg, command, cfg.output_dir);
    for (const auto& job : m.jobs) {
      std::cout << job.name << ": " << job.status << " (" << job.wall_clock << " s)";
      if (!job.message.empty()) std::cout << " - " << job.message;
      std::cout << "\n";
      for (const auto& a : job.assertions)
        std::cout << "  [" << (a.passed ? "PASS" : "FAIL") << "] " << a.name << ": " << a.detail << "\n";
    }
    std::cout << "artifacts in " << cfg.output_dir << " (config " << m.config_hash << ")\n";
    return exit_code(m);
  } catch (const ConfigError& e) {
    std::cerr << "configuration errors:\n";
    for (const auto& msg : e.errors()) std::cerr << "  " << msg << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
