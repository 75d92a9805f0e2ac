#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "leocov/channel.hpp"
#include "leocov/geometry.hpp"
#include "leocov/montecarlo.hpp"

namespace leocov {

/// Invalid experiment configuration. `line` is 0 when the problem is not
/// tied to a single line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// A value read from the config together with where it came from.
struct ConfigValue {
  std::string text;
  int line = 0;
};

/// One experiment: physical parameters, sweep, methods and run settings.
/// Angles are in degrees and gains in dB here; conversion happens when the
/// experiment runs.
struct ExperimentConfig {
  std::string source = "<string>";
  std::string text;  // verbatim config, echoed into the metadata

  // [experiment]
  std::string id;
  std::string description;
  std::string sweep = "gamma";
  std::vector<double> grid;
  std::string series;
  std::vector<double> series_values;
  std::vector<std::string> methods;
  double gamma_db = 0.0;
  std::string output;

  // [geometry]
  double earth_radius_km = ShellGeometry::kEarthRadiusKm;
  double altitude_km = 700.0;

  // [channel]
  std::string los = "exponential";  // exponential | step | always
  double beta = 0.0;
  double r_los_km = 0.0;
  double alpha_los = 2.0;
  double alpha_nlos = 2.0;
  int nakagami_m = 1;

  // [beam]
  std::string beam = "constant";  // bessel | step | constant
  double g_max_db = 0.0;
  double theta_3db_deg = 10.0;
  double g_los_db = 0.0;
  double g_nlos_db = 0.0;
  double g_db = 0.0;

  // [network]
  std::string constellation = "ppp";
  std::optional<double> mean_visible;
  std::optional<double> density;
  double min_elevation_deg = 0.0;
  std::optional<double> user_latitude_deg;
  Association association = Association::strongest;
  double noise_power = 0.0;
  double walker_inclination_deg = 90.0;
  double snapshot_alt_min_km = 0.0;
  double snapshot_alt_max_km = 1e9;
  int snapshot_freq_groups = 1;

  // [simulation]
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  // [analysis]
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  std::string kappa = "upper";  // lower | upper | number
  double epsilon = 0.6;
  std::optional<double> hm_alpha;

  /// Where each key was set, for error messages ("section.key" -> line).
  std::map<std::string, int> key_lines;
};

/// Parses INI-style text. Unknown sections or keys, duplicates and
/// malformed values raise ConfigError naming the line and key.
ExperimentConfig parse_experiment(std::string_view text, std::string source = "<string>");
ExperimentConfig load_experiment(const std::string& path);

/// Checks that every method applies to the configuration, without running
/// anything. Throws ConfigError.
void validate_experiment(const ExperimentConfig& cfg);

/// Methods understood by the runner.
const std::vector<std::string>& known_methods();

struct ResultRow {
  double sweep = 0.0;
  std::string method;
  double value = 0.0;
  std::optional<double> ci;
  double raw = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::string id;
  std::string sweep;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  unsigned threads = 1;
  double wall_time_s = 0.0;
  /// Per-method notes (mean visible count, upper-bound-only thresholds, ...).
  std::map<std::string, std::string> notes;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
  std::optional<std::string> output;
};

using ProgressFn = std::function<void(const std::string&)>;

ResultTable run_experiment(const ExperimentConfig& cfg, const RunOverrides& overrides = {},
                           const ProgressFn& progress = {});

/// CSV with header sweep,method,value,ci,raw.
std::string format_csv(const ResultTable& table);
void write_csv(const ResultTable& table, const std::string& path);
/// JSON sidecar: config echo, seed, version, wall time, notes.
std::string format_metadata(const ResultTable& table, const ExperimentConfig& cfg);
void write_metadata(const ResultTable& table, const ExperimentConfig& cfg,
                    const std::string& path);

struct PresetInfo {
  std::string name;
  std::string path;
  std::string description;
};

/// Presets (*.cfg) in `dir`, sorted by name. Throws InputError when the
/// directory is missing or holds no preset.
std::vector<PresetInfo> list_presets(const std::string& dir);

std::string_view library_version();

}  // namespace leocov
