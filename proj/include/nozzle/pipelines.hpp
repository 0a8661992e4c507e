#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "nozzle/config.hpp"
#include "nozzle/report.hpp"

namespace nozzle {

enum class Command { GeometryCheck, Run1D, RunAxi, ConvergeInviscid, ConvergeViscous, KornSweep, Poincare };

std::string command_name(Command c);

// Explicit job count, or one per cell capped at the hardware concurrency.
int resolve_jobs(int requested, std::size_t cells);

// Runs one subcommand, writes its artifacts and manifest.json under out_dir.
// Config violations for the chosen command throw ConfigError before any work;
// failures inside a job are recorded in the manifest.
RunManifest run_command(const ExperimentConfig& config, Command command, const std::filesystem::path& out_dir);

// 0 when every job finished and every assertion passed, 1 otherwise.
int exit_code(const RunManifest& manifest);

}  // namespace nozzle
