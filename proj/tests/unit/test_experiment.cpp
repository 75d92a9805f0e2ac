#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "leocov/errors.hpp"
#include "leocov/experiment.hpp"

using namespace leocov;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# small Monte Carlo run
[experiment]
id = small
description = tiny
grid = linspace(-5, 10, 4)
methods = monte_carlo, homogeneous_lb

[geometry]
altitude_km = 600

[channel]
los = exponential
beta = 0.2
alpha_los = 2
alpha_nlos = 3
nakagami_m = 2

[beam]
model = bessel
g_max_db = 20
theta_3db_deg = 8

[network]
mean_visible = 6

[simulation]
trials = 3000
seed = 17

[analysis]
alpha = 3
)";

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::path(LEOCOV_TEST_SCRATCH);
  fs::create_directories(dir);
  return dir / name;
}

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    validate_experiment(parse_experiment(text, "t.cfg"));
    FAIL() << "expected ConfigError containing '" << needle << "'";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(ConfigParse, ReadsSectionsAndGrids) {
  const auto c = parse_experiment(kSmall);
  EXPECT_EQ(c.id, "small");
  ASSERT_EQ(c.grid.size(), 4u);
  EXPECT_DOUBLE_EQ(c.grid[1], 0.0);
  EXPECT_EQ(c.methods.size(), 2u);
  EXPECT_EQ(c.altitude_km, 600.0);
  EXPECT_EQ(c.nakagami_m, 2);
  EXPECT_EQ(*c.mean_visible, 6.0);
  EXPECT_EQ(*c.hm_alpha, 3.0);
  EXPECT_EQ(c.key_lines.at("experiment.grid"), 5);
  EXPECT_NO_THROW(validate_experiment(c));
}

TEST(ConfigParse, GridForms) {
  auto grid = [](const std::string& g) {
    return parse_experiment("[experiment]\ngrid = " + g + "\n").grid;
  };
  EXPECT_EQ(grid("1, 2.5, 4"), (std::vector<double>{1.0, 2.5, 4.0}));
  const auto l = grid("logspace(-2, 1, 4)");
  ASSERT_EQ(l.size(), 4u);
  EXPECT_NEAR(l[0], 0.01, 1e-15);
  EXPECT_NEAR(l[3], 10.0, 1e-12);
  EXPECT_EQ(grid("linspace(3, 3, 1)"), std::vector<double>{3.0});
}

TEST(ConfigParse, UnknownKeyNamesKeyAndLine) {
  try {
    parse_experiment("[experiment]\nid = x\nfrobnicate = 3\n", "bad.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("frobnicate"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bad.cfg:3"), std::string::npos);
  }
}

TEST(ConfigParse, Rejections) {
  EXPECT_THROW(parse_experiment("[nonsense]\n"), ConfigError);
  EXPECT_THROW(parse_experiment("id = 3\n"), ConfigError);
  EXPECT_THROW(parse_experiment("[experiment]\nid = a\nid = b\n"), ConfigError);
  EXPECT_THROW(parse_experiment("[geometry]\naltitude_km = high\n"), ConfigError);
  EXPECT_THROW(parse_experiment("[channel]\nnakagami_m = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_experiment("[channel]\nlos = sometimes\n"), ConfigError);
  EXPECT_THROW(parse_experiment("[experiment]\ngrid = linspace(1, 2)\n"), ConfigError);
  EXPECT_THROW(parse_experiment("[experiment\n"), ConfigError);
  EXPECT_THROW(parse_experiment("[simulation]\ntrials =\n"), ConfigError);
}

TEST(ConfigValidate, MethodApplicability) {
  const std::string base = kSmall;
  expect_config_error(base + "\n[experiment]\nid = again\n", "duplicate");
  std::string closed = base;
  closed.replace(closed.find("monte_carlo, homogeneous_lb"), 27, "closed_form");
  expect_config_error(closed, "step");

  std::string elev = base;
  elev.replace(elev.find("monte_carlo, homogeneous_lb"), 27, "exact");
  elev.replace(elev.find("mean_visible = 6"), 16, "mean_visible = 6\nmin_elevation_deg = 10");
  expect_config_error(elev, "min_elevation");

  std::string unknown = base;
  unknown.replace(unknown.find("monte_carlo, homogeneous_lb"), 27, "magic");
  expect_config_error(unknown, "magic");

  std::string gain = base;
  gain.replace(gain.find("monte_carlo, homogeneous_lb"), 27, "beam_gain");
  expect_config_error(gain, "ground_km");

  std::string nodensity = base;
  nodensity.replace(nodensity.find("mean_visible = 6"), 16, "");
  expect_config_error(nodensity, "mean_visible");
}

TEST(ConfigValidate, PhysicalRangesPerSweepPoint) {
  std::string text = kSmall;
  text.replace(text.find("altitude_km = 600"), 17, "altitude_km = -5");
  expect_config_error(text, "");
}

TEST(Presets, AllValidate) {
  const auto presets = list_presets(LEOCOV_TEST_PRESETS);
  EXPECT_GE(presets.size(), 20u);
  bool has_altitude = false;
  for (const auto& p : presets) {
    SCOPED_TRACE(p.name);
    EXPECT_FALSE(p.description.empty());
    EXPECT_NO_THROW(validate_experiment(load_experiment(p.path)));
    has_altitude |= p.name == "fig9_altitude_sweep";
  }
  EXPECT_TRUE(has_altitude);
}

TEST(Presets, Fig3AndFig6Shapes) {
  const auto f3 = load_experiment(std::string(LEOCOV_TEST_PRESETS) + "/fig3_beta0.57.cfg");
  EXPECT_EQ(f3.methods, (std::vector<std::string>{"exact", "monte_carlo"}));
  EXPECT_EQ(f3.grid.front(), -10.0);
  EXPECT_EQ(f3.grid.back(), 20.0);
  EXPECT_EQ(f3.alpha_los, 2.0);
  EXPECT_EQ(f3.alpha_nlos, 3.0);
  EXPECT_EQ(f3.nakagami_m, 3);
  EXPECT_EQ(*f3.mean_visible, 10.0);

  const auto f6 = load_experiment(std::string(LEOCOV_TEST_PRESETS) + "/fig6_optimal_density.cfg");
  const auto table = run_experiment(f6, {});
  EXPECT_EQ(f6.series_values, (std::vector<double>{0.0, 3.0, 5.0}));
  std::size_t k_rows = 0;
  for (const auto& r : table.rows) k_rows += r.method.rfind("optimal_k@", 0) == 0;
  EXPECT_EQ(k_rows, 3 * f6.grid.size());
}

TEST(Presets, EmptyDirectoryIsAnError) {
  const fs::path dir = scratch("empty_presets");
  fs::create_directories(dir);
  for (const auto& e : fs::directory_iterator(dir)) fs::remove_all(e.path());
  EXPECT_THROW(list_presets(dir.string()), InputError);
  EXPECT_THROW(list_presets((dir / "missing").string()), InputError);
}

TEST(Run, CsvLayoutAndDeterminism) {
  const auto cfg = parse_experiment(kSmall, "small.cfg");
  const auto a = run_experiment(cfg, {});
  RunOverrides threads;
  threads.threads = 3;
  const auto b = run_experiment(cfg, threads);
  const std::string csv = format_csv(a);
  EXPECT_EQ(csv, format_csv(b));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sweep,method,value,ci,raw");
  EXPECT_EQ(a.rows.size(), 8u);
  for (const auto& r : a.rows) {
    EXPECT_GE(r.value, 0.0);
    EXPECT_LE(r.value, 1.0);
    EXPECT_EQ(r.ci.has_value(), r.method == "monte_carlo");
  }
  RunOverrides seed;
  seed.seed = 18;
  EXPECT_NE(csv, format_csv(run_experiment(cfg, seed)));

  const std::string meta = format_metadata(a, cfg);
  EXPECT_NE(meta.find("\"seed\": 17"), std::string::npos);
  EXPECT_NE(meta.find(std::string(library_version())), std::string::npos);
  EXPECT_NE(meta.find("mean_visible"), std::string::npos);
}

#ifdef LEOCOV_CLI_PATH
namespace {

struct Proc {
  int status;
  std::string output;
};

Proc run_cli(const std::string& args) {
  const std::string cmd = std::string(LEOCOV_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  Proc p{-1, {}};
  if (!pipe) return p;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) p.output += buf.data();
  const int raw = pclose(pipe);
  p.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return p;
}

}  // namespace

TEST(Cli, UnknownKeyExitsWithConfigError) {
  const fs::path cfg = scratch("unknown_key.cfg");
  std::ofstream(cfg) << "[experiment]\nid = x\nwibble = 1\n";
  const auto p = run_cli("run " + cfg.string());
  EXPECT_EQ(p.status, 2);
  EXPECT_NE(p.output.find("wibble"), std::string::npos) << p.output;
}

TEST(Cli, ListPresets) {
  const auto p = run_cli("list-presets");
  EXPECT_EQ(p.status, 0);
  EXPECT_NE(p.output.find("fig9_altitude_sweep"), std::string::npos);
  EXPECT_NE(p.output.find("fig7_caption"), std::string::npos);
}

TEST(Cli, RerunIsByteIdentical) {
  const fs::path a = scratch("rerun_a.csv");
  const fs::path b = scratch("rerun_b.csv");
  const std::string preset = std::string(LEOCOV_TEST_PRESETS) + "/fig10_walker.cfg";
  ASSERT_EQ(run_cli("run " + preset + " -q --trials 5000 --seed 4 --out " + a.string()).status, 0);
  ASSERT_EQ(run_cli("run " + preset + " -q --trials 5000 --seed 4 --threads 2 --out " + b.string()).status, 0);
  EXPECT_EQ(read(a), read(b));
  EXPECT_TRUE(fs::exists(a.string() + ".meta.json"));
  EXPECT_EQ(read(a).rfind("sweep,method,value,ci,raw\n", 0), 0u);
}

TEST(Cli, MissingConfigFails) {
  EXPECT_NE(run_cli("run /nonexistent/file.cfg").status, 0);
}
#endif
