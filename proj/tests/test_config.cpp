#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "nozzle/config.hpp"

using namespace nozzle;

namespace {

std::vector<std::string> errors_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("nozzle_cfg_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config: minimal file gets defaults") {
  const auto c = parse_config("[study]\nepsilons = [0.2, 0.1]\n");
  CHECK(c.study.mode == StudyMode::Inviscid);
  CHECK(c.study.epsilons.size() == 2);
  CHECK(c.pressure.gamma == 2.0);
  CHECK(c.pressure.kappa == 1.0);
  CHECK(c.q_min == 0.8);
  CHECK(c.seed == 12345);
  CHECK(c.jobs == 0);
  CHECK(c.korn.resolution.n_theta == 20);

  const auto empty = parse_config("");
  CHECK(empty.geometry.kind == "circular");
}

TEST_CASE("config: hypothesis violations are named") {
  auto e = errors_of("[study]\nmode = \"viscous\"\neta = 0.0\n");
  REQUIRE(e.size() == 1);
  CHECK(any_contains(e, "bulk-viscosity hypothesis"));

  e = errors_of("[pressure]\ngamma = 1.2\n");
  REQUIRE(e.size() == 1);
  CHECK(any_contains(e, "growth hypothesis"));

  e = errors_of("[axi]\ncaps = \"no-slip\"\neta = 0.0\n");
  CHECK(any_contains(e, "bulk-viscosity hypothesis"));

  // Inviscid studies do not need bulk viscosity.
  CHECK(errors_of("[study]\neta = 0.0\n").empty());
}

TEST_CASE("config: every error is reported, not just the first") {
  const auto e = errors_of(
      "jobs = -1\n"
      "[pressure]\ngamma = 1.2\n"
      "[study]\nmode = \"viscous\"\neta = 0.0\nn_r = 4\n"
      "[korn]\nmax_ratio = 0.5\nbogus = 1\n");
  CHECK(e.size() >= 5);
  CHECK(any_contains(e, "growth hypothesis"));
  CHECK(any_contains(e, "bulk-viscosity hypothesis"));
  CHECK(any_contains(e, "n_r >= 8"));
  CHECK(any_contains(e, "korn.max_ratio"));
  CHECK(any_contains(e, "bogus"));
  CHECK(any_contains(e, "jobs"));
}

TEST_CASE("config: parse errors carry line and column") {
  const auto e = errors_of("[study]\nt_end = 0.1\nepsilons = [0.1,\n");
  REQUIRE(e.size() == 1);
  CHECK(e[0].rfind("<string>:", 0) == 0);
  CHECK(e[0].find(":3:") != std::string::npos);

  try {
    parse_config("[pressure]\ngamma = = 2\n", "x.toml");
    FAIL("expected a parse error");
  } catch (const ConfigError& err) {
    CHECK(err.errors()[0].rfind("x.toml:2:", 0) == 0);
  }
}

TEST_CASE("config: type errors and unknown keys") {
  auto e = errors_of("[pressure]\ngamma = \"two\"\n");
  CHECK(any_contains(e, "pressure.gamma"));
  e = errors_of("[study]\nepsilons = [0.1, \"x\"]\n");
  CHECK(any_contains(e, "study.epsilons"));
  e = errors_of("[korn]\nn_theta = 2.5\n");
  CHECK(any_contains(e, "korn.n_theta"));
  e = errors_of("[geometry]\nradious = [1.0]\n");
  CHECK(any_contains(e, "radious"));
  e = errors_of("[unknown_section]\nx = 1\n");
  CHECK(any_contains(e, "unknown_section"));
  // Integers are accepted where reals are expected.
  CHECK(parse_config("[pressure]\ngamma = 2\n").pressure.gamma == 2.0);
}

TEST_CASE("config: hash is independent of key order and formatting") {
  const auto a = parse_config("[pressure]\ngamma = 2.0\nkappa = 1.0\n[korn]\nepsilons = [0.4, 0.2]\n");
  const auto b = parse_config("# comment\n[korn]\nepsilons = [ 0.4,0.2 ]\n\n[pressure]\nkappa = 1\ngamma = 2.0\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(canonical_config(a) == canonical_config(b));
  CHECK(config_hash(a).size() == 16);
  const auto c = parse_config("[pressure]\ngamma = 2.5\n[korn]\nepsilons = [0.4, 0.2]\n");
  CHECK(config_hash(a) != config_hash(c));
  // Output location and job count do not change the experiment.
  auto d = a;
  d.output_dir = "elsewhere";
  d.jobs = 3;
  CHECK(config_hash(a) == config_hash(d));
}

TEST_CASE("config: tabulated sections resolve relative to the file") {
  const auto dir = scratch_dir("tab");
  {
    std::ofstream f(dir / "run.toml");
    f << "[geometry]\nkind = \"tabulated\"\nsections_file = \"sections.csv\"\n";
  }
  try {
    load_config(dir / "run.toml");
    FAIL("missing sections file accepted");
  } catch (const ConfigError& e) {
    CHECK(any_contains(e.errors(), "file not found"));
  }
  {
    std::ofstream f(dir / "sections.csv");
    f << "slice,x,y\n";
    for (int s = 0; s < 5; ++s)
      for (int k = 0; k < 16; ++k) {
        const double t = 2 * 3.141592653589793 * k / 16, a = 1.0 + 0.1 * s;
        f << s << "," << a * std::cos(t) << "," << 0.5 * std::sin(t) << "\n";
      }
  }
  const auto c = load_config(dir / "run.toml");
  CHECK(std::filesystem::path(c.geometry.sections_file) == dir / "sections.csv");
  const auto geo = make_geometry(c.geometry);
  CHECK(area(geo, 0.0) > 0.0);
  CHECK(area(geo, 1.0) > area(geo, 0.0));

  try {
    load_config(dir / "absent.toml");
    FAIL("missing file accepted");
  } catch (const ConfigError& e) {
    CHECK(any_contains(e.errors(), "cannot read"));
  }
}

TEST_CASE("config: shipped example configs load") {
  const std::filesystem::path root = NOZZLE_SOURCE_DIR "/configs";
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.path().extension() != ".toml" || entry.path().stem().string().rfind("bad_", 0) == 0) continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
    ++n;
  }
  CHECK(n >= 6);
  CHECK_THROWS_AS(load_config(root / "bad_viscous_eta0.toml"), ConfigError);
}
