#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace nozzle {

inline constexpr const char* kCodeVersion = "nozzle-lab 0.1.0";

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct JobRecord {
  std::string name;
  std::string status = "ok";  // ok | failed
  std::string message;
  double wall_clock = 0.0;  // seconds
  std::vector<Assertion> assertions;
  nlohmann::json summary = nlohmann::json::object();

  bool passed() const;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string code_version = kCodeVersion;
  std::vector<JobRecord> jobs;
  std::vector<std::string> artifacts;  // relative to the output directory, sorted

  bool passed() const;
  nlohmann::json to_json() const;
};

// Shortest round-trip text of a double; "nan"/"inf" for non-finite values.
std::string format_number(double x);

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

struct Series {
  std::string label;
  std::vector<double> x, y;
};
struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
};
// Self-contained SVG line plot; points with non-positive coordinates are dropped on log axes.
std::string svg_plot(const PlotSpec& spec, const std::vector<Series>& series);

// Writes artifacts under one directory and records their relative paths.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root);
  const std::filesystem::path& root() const { return root_; }
  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

// Writes manifest.json (listing itself) into the writer's directory.
void write_manifest(RunManifest manifest, ArtifactWriter& out);

}  // namespace nozzle
