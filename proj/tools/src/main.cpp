// leocov: runs declarative coverage experiments and lists shipped presets.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "leocov/errors.hpp"
#include "leocov/experiment.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// LEOCOV_PRESETS overrides; then share/ next to the binary; then the
// configured install tree; then the source tree.
std::string preset_dir() {
  if (const char* env = std::getenv("LEOCOV_PRESETS"); env && *env) return env;
  std::error_code ec;
  const fs::path self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const fs::path relocated = self.parent_path().parent_path() / "share" / "leocov" / "presets";
    if (fs::is_directory(relocated, ec)) return relocated.string();
  }
  if (fs::is_directory(LEOCOV_PRESET_DIR, ec)) return LEOCOV_PRESET_DIR;
  return LEOCOV_SOURCE_PRESET_DIR;
}

// A bare preset name resolves against the preset directory.
std::string resolve_config(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  for (const std::string& candidate : {preset_dir() + "/" + arg, preset_dir() + "/" + arg + ".cfg"}) {
    if (fs::exists(candidate)) return candidate;
  }
  return arg;
}

int run(const std::string& config, const leocov::RunOverrides& overrides, bool quiet) {
  const auto cfg = leocov::load_experiment(resolve_config(config));
  std::string out = overrides.output.value_or(cfg.output.empty() ? cfg.id + ".csv" : cfg.output);
  auto progress = [&](const std::string& msg) {
    if (!quiet) std::cerr << "[" << cfg.id << "] " << msg << "\n";
  };
  const auto table = leocov::run_experiment(cfg, overrides, progress);
  if (out == "-") {
    std::cout << leocov::format_csv(table);
    return kExitOk;
  }
  leocov::write_csv(table, out);
  leocov::write_metadata(table, cfg, out + ".meta.json");
  if (!quiet) {
    std::cerr << "[" << cfg.id << "] wrote " << out << " (" << table.rows.size() << " rows, "
              << table.wall_time_s << " s)\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LEO satellite downlink coverage: analytic evaluation and Monte Carlo"};
  app.set_version_flag("--version", std::string(leocov::library_version()));
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  unsigned threads = 0;
  std::string out;
  bool quiet = false;
  bool check_only = false;

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config (file path or preset name)");
  run_cmd->add_option("config", config, "Experiment config")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the Monte Carlo seed");
  auto* trials_opt = run_cmd->add_option("--trials", trials, "Override the Monte Carlo trial count")
                         ->check(CLI::PositiveNumber);
  auto* threads_opt = run_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  auto* out_opt = run_cmd->add_option("--out", out, "Output CSV path ('-' for stdout)");
  run_cmd->add_flag("--quiet,-q", quiet, "Suppress progress output");
  run_cmd->add_flag("--check", check_only, "Validate the config and exit");

  auto* list_cmd = app.add_subcommand("list-presets", "List shipped presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const auto& p : leocov::list_presets(preset_dir())) {
        std::cout << p.name << "\t" << p.description << "\n";
      }
      return kExitOk;
    }
    if (check_only) {
      leocov::validate_experiment(leocov::load_experiment(resolve_config(config)));
      std::cout << "ok\n";
      return kExitOk;
    }
    leocov::RunOverrides overrides;
    if (*seed_opt) overrides.seed = seed;
    if (*trials_opt) overrides.trials = trials;
    if (*threads_opt) overrides.threads = threads;
    if (*out_opt) overrides.output = out;
    return run(config, overrides, quiet);
  } catch (const leocov::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const leocov::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
