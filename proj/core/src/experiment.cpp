#include "leocov/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "leocov/analytic.hpp"
#include "leocov/bounds.hpp"
#include "leocov/errors.hpp"
#include "leocov/units.hpp"

#ifndef LEOCOV_VERSION
#define LEOCOV_VERSION "0.0.0"
#endif

namespace leocov {
namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

std::string fmt_num(double v) { return fmt::format("{:.12g}", v); }

// ---------------------------------------------------------------------------
// Parsing

struct Parser {
  ExperimentConfig& cfg;
  const std::string& source;
  int line = 0;
  std::string key;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source, line, "key '" + key + "': " + msg);
  }

  double number(const std::string& v) const {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (trim(v.substr(used)).empty() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    fail("expected a number, got '" + v + "'");
  }

  long long integer(const std::string& v) const {
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (trim(v.substr(used)).empty()) return x;
    } catch (const std::exception&) {
    }
    fail("expected an integer, got '" + v + "'");
  }

  std::vector<double> grid(const std::string& v) const {
    const std::string s = lower(trim(v));
    for (const char* fn : {"linspace", "logspace"}) {
      const std::string prefix = std::string(fn) + "(";
      if (s.rfind(prefix, 0) != 0) continue;
      if (s.back() != ')') fail("unterminated " + std::string(fn) + "(...)");
      const auto args = split_list(s.substr(prefix.size(), s.size() - prefix.size() - 1));
      if (args.size() != 3) fail(std::string(fn) + " takes (start, stop, count)");
      const double a = number(args[0]);
      const double b = number(args[1]);
      const long long n = integer(args[2]);
      if (n < 1 || n > 100000) fail("grid count must lie in [1, 100000]");
      std::vector<double> out;
      for (long long i = 0; i < n; ++i) {
        const double t = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back(std::string(fn) == "logspace" ? std::pow(10.0, t) : t);
      }
      return out;
    }
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(number(item));
    if (out.empty()) fail("empty list");
    return out;
  }
};

using Setter = std::function<void(Parser&, const std::string&)>;
using Schema = std::map<std::string, std::map<std::string, Setter>>;

const Schema& schema() {
  static const Schema s = [] {
    Schema m;
    auto& e = m["experiment"];
    e["id"] = [](Parser& p, const std::string& v) { p.cfg.id = v; };
    e["description"] = [](Parser& p, const std::string& v) { p.cfg.description = v; };
    e["sweep"] = [](Parser& p, const std::string& v) { p.cfg.sweep = lower(v); };
    e["grid"] = [](Parser& p, const std::string& v) { p.cfg.grid = p.grid(v); };
    e["series"] = [](Parser& p, const std::string& v) { p.cfg.series = lower(v); };
    e["series_values"] = [](Parser& p, const std::string& v) { p.cfg.series_values = p.grid(v); };
    e["methods"] = [](Parser& p, const std::string& v) {
      p.cfg.methods.clear();
      for (const auto& item : split_list(v)) p.cfg.methods.push_back(lower(item));
    };
    e["gamma_db"] = [](Parser& p, const std::string& v) { p.cfg.gamma_db = p.number(v); };
    e["output"] = [](Parser& p, const std::string& v) { p.cfg.output = v; };

    auto& g = m["geometry"];
    g["earth_radius_km"] = [](Parser& p, const std::string& v) { p.cfg.earth_radius_km = p.number(v); };
    g["altitude_km"] = [](Parser& p, const std::string& v) { p.cfg.altitude_km = p.number(v); };

    auto& c = m["channel"];
    c["los"] = [](Parser& p, const std::string& v) {
      const std::string s = lower(v);
      if (s != "exponential" && s != "step" && s != "always") {
        p.fail("expected exponential, step or always");
      }
      p.cfg.los = s;
    };
    c["beta"] = [](Parser& p, const std::string& v) { p.cfg.beta = p.number(v); };
    c["r_los_km"] = [](Parser& p, const std::string& v) { p.cfg.r_los_km = p.number(v); };
    c["alpha_los"] = [](Parser& p, const std::string& v) { p.cfg.alpha_los = p.number(v); };
    c["alpha_nlos"] = [](Parser& p, const std::string& v) { p.cfg.alpha_nlos = p.number(v); };
    c["nakagami_m"] = [](Parser& p, const std::string& v) {
      const long long x = p.integer(v);
      if (x < 1 || x > 64) p.fail("nakagami_m must be an integer in [1, 64]");
      p.cfg.nakagami_m = static_cast<int>(x);
    };

    auto& b = m["beam"];
    b["model"] = [](Parser& p, const std::string& v) {
      const std::string s = lower(v);
      if (s != "bessel" && s != "step" && s != "constant") {
        p.fail("expected bessel, step or constant");
      }
      p.cfg.beam = s;
    };
    b["g_max_db"] = [](Parser& p, const std::string& v) { p.cfg.g_max_db = p.number(v); };
    b["theta_3db_deg"] = [](Parser& p, const std::string& v) { p.cfg.theta_3db_deg = p.number(v); };
    b["g_los_db"] = [](Parser& p, const std::string& v) { p.cfg.g_los_db = p.number(v); };
    b["g_nlos_db"] = [](Parser& p, const std::string& v) { p.cfg.g_nlos_db = p.number(v); };
    b["g_db"] = [](Parser& p, const std::string& v) { p.cfg.g_db = p.number(v); };

    auto& n = m["network"];
    n["constellation"] = [](Parser& p, const std::string& v) { p.cfg.constellation = v; };
    n["mean_visible"] = [](Parser& p, const std::string& v) { p.cfg.mean_visible = p.number(v); };
    n["density_per_km2"] = [](Parser& p, const std::string& v) { p.cfg.density = p.number(v); };
    n["min_elevation_deg"] = [](Parser& p, const std::string& v) { p.cfg.min_elevation_deg = p.number(v); };
    n["user_latitude_deg"] = [](Parser& p, const std::string& v) { p.cfg.user_latitude_deg = p.number(v); };
    n["association"] = [](Parser& p, const std::string& v) {
      const std::string s = lower(v);
      if (s == "strongest") {
        p.cfg.association = Association::strongest;
      } else if (s == "nearest") {
        p.cfg.association = Association::nearest;
      } else {
        p.fail("expected strongest or nearest");
      }
    };
    n["noise_power"] = [](Parser& p, const std::string& v) { p.cfg.noise_power = p.number(v); };
    n["walker_inclination_deg"] = [](Parser& p, const std::string& v) { p.cfg.walker_inclination_deg = p.number(v); };
    n["snapshot_alt_min_km"] = [](Parser& p, const std::string& v) { p.cfg.snapshot_alt_min_km = p.number(v); };
    n["snapshot_alt_max_km"] = [](Parser& p, const std::string& v) { p.cfg.snapshot_alt_max_km = p.number(v); };
    n["snapshot_freq_groups"] = [](Parser& p, const std::string& v) {
      const long long x = p.integer(v);
      if (x < 1) p.fail("must be a positive integer");
      p.cfg.snapshot_freq_groups = static_cast<int>(x);
    };

    auto& sim = m["simulation"];
    sim["trials"] = [](Parser& p, const std::string& v) {
      const long long x = p.integer(v);
      if (x < 1) p.fail("must be a positive integer");
      p.cfg.trials = static_cast<std::size_t>(x);
    };
    sim["seed"] = [](Parser& p, const std::string& v) {
      const long long x = p.integer(v);
      if (x < 0) p.fail("must be non-negative");
      p.cfg.seed = static_cast<std::uint64_t>(x);
    };
    sim["threads"] = [](Parser& p, const std::string& v) {
      const long long x = p.integer(v);
      if (x < 0 || x > 4096) p.fail("must lie in [0, 4096]");
      p.cfg.threads = static_cast<unsigned>(x);
    };

    auto& a = m["analysis"];
    a["rel_tol"] = [](Parser& p, const std::string& v) { p.cfg.rel_tol = p.number(v); };
    a["abs_tol"] = [](Parser& p, const std::string& v) { p.cfg.abs_tol = p.number(v); };
    a["kappa"] = [](Parser& p, const std::string& v) {
      const std::string s = lower(v);
      if (s != "lower" && s != "upper") (void)p.number(s);
      p.cfg.kappa = s;
    };
    a["epsilon"] = [](Parser& p, const std::string& v) { p.cfg.epsilon = p.number(v); };
    a["alpha"] = [](Parser& p, const std::string& v) { p.cfg.hm_alpha = p.number(v); };
    return m;
  }();
  return s;
}

// ---------------------------------------------------------------------------
// Resolution of one parameter point into library models

const std::set<std::string> kSweeps{"gamma",  "density", "mean_visible", "altitude",
                                    "beta",   "r_los",   "ground_km"};
const std::set<std::string> kSeries{"gamma_db", "density", "mean_visible", "altitude",
                                    "beta",     "r_los",   "theta_3db"};

void apply(ExperimentConfig& c, const std::string& name, double v) {
  if (name == "gamma" || name == "gamma_db") {
    c.gamma_db = v;
  } else if (name == "density") {
    c.density = v;
    c.mean_visible.reset();
  } else if (name == "mean_visible") {
    c.mean_visible = v;
    c.density.reset();
  } else if (name == "altitude") {
    c.altitude_km = v;
  } else if (name == "beta") {
    c.beta = v;
  } else if (name == "r_los") {
    c.r_los_km = v;
  } else if (name == "theta_3db") {
    c.theta_3db_deg = v;
  }
}

ShellGeometry geometry_of(const ExperimentConfig& c) {
  return ShellGeometry(c.earth_radius_km, c.altitude_km);
}

ChannelModel channel_of(const ExperimentConfig& c) {
  ChannelModel ch;
  if (c.los == "exponential") {
    ch.los = ExponentialBlockage{c.beta};
  } else if (c.los == "step") {
    ch.los = StepLos{c.r_los_km};
  } else {
    ch.los = AlwaysLos{};
  }
  ch.alpha_los = c.alpha_los;
  ch.alpha_nlos = c.alpha_nlos;
  ch.nakagami_m = c.nakagami_m;
  return ch;
}

BeamGainModel beam_of(const ExperimentConfig& c) {
  if (c.beam == "bessel") return BesselBeam{db_to_linear(c.g_max_db), deg_to_rad(c.theta_3db_deg)};
  if (c.beam == "step") {
    return StepGain{db_to_linear(c.g_los_db), db_to_linear(c.g_nlos_db), c.r_los_km};
  }
  return ConstantGain{db_to_linear(c.g_db)};
}

double peak_gain(const ExperimentConfig& c) {
  if (c.beam == "bessel") return db_to_linear(c.g_max_db);
  if (c.beam == "step") return db_to_linear(std::max(c.g_los_db, c.g_nlos_db));
  return db_to_linear(c.g_db);
}

bool has_density(const ExperimentConfig& c) { return c.density || c.mean_visible; }

double density_of(const ExperimentConfig& c) {
  const ShellGeometry geom = geometry_of(c);
  if (c.density) return *c.density;
  if (c.mean_visible) {
    return density_for_visible_count(*c.mean_visible, geom, deg_to_rad(c.min_elevation_deg));
  }
  throw DomainError("neither network.mean_visible nor network.density_per_km2 is set");
}

AnalyticConfig analytic_of(const ExperimentConfig& c) {
  AnalyticConfig a;
  a.geom = geometry_of(c);
  a.channel = channel_of(c);
  a.beam = beam_of(c);
  a.density = density_of(c);
  a.quad.rel_tol = c.rel_tol;
  a.quad.abs_tol = c.abs_tol;
  a.validate();
  return a;
}

StepModelConfig step_of(const ExperimentConfig& c) {
  StepModelConfig s;
  s.geom = geometry_of(c);
  s.r_los = c.r_los_km;
  if (c.beam == "step") {
    s.g_los = db_to_linear(c.g_los_db);
    s.g_nlos = db_to_linear(c.g_nlos_db);
  } else {
    s.g_los = s.g_nlos = db_to_linear(c.g_db);
  }
  s.alpha_los = c.alpha_los;
  s.alpha_nlos = c.alpha_nlos;
  s.m = c.nakagami_m;
  s.density = density_of(c);
  s.validate();
  return s;
}

double kappa_of(const ExperimentConfig& c, const std::string& method) {
  if (method == "bound_lower") return 1.0;
  if (method == "bound_upper") return kappa_upper(c.nakagami_m);
  if (c.kappa == "lower") return 1.0;
  if (c.kappa == "upper") return kappa_upper(c.nakagami_m);
  return std::stod(c.kappa);
}

double hm_alpha_of(const ExperimentConfig& c) { return c.hm_alpha.value_or(c.alpha_los); }

ConstellationSpec constellation_of(const ExperimentConfig& c) {
  const std::string kind = lower(trim(c.constellation));
  ConstellationSpec spec;
  if (kind == "bpp") {
    if (!c.mean_visible) throw DomainError("plain 'bpp' needs network.mean_visible (or use bpp:N)");
    spec = Bpp{static_cast<int>(std::lround(*c.mean_visible))};
  } else if (kind == "ppp" || kind == "sppp") {
    spec = Sppp{density_of(c)};
  } else {
    spec = parse_constellation(c.constellation);
  }
  if (auto* w = std::get_if<WalkerStar>(&spec)) w->inclination_rad = deg_to_rad(c.walker_inclination_deg);
  if (auto* s = std::get_if<Snapshot>(&spec)) {
    fs::path p(s->path);
    if (p.is_relative()) p = fs::path(c.source).parent_path() / p;
    s->path = p.string();
    s->alt_min_km = c.snapshot_alt_min_km;
    s->alt_max_km = c.snapshot_alt_max_km;
    s->freq_groups = c.snapshot_freq_groups;
  }
  return spec;
}

MonteCarloConfig mc_of(const ExperimentConfig& c) {
  MonteCarloConfig m;
  m.geom = geometry_of(c);
  m.channel = channel_of(c);
  m.beam = beam_of(c);
  m.association = c.association;
  m.visibility.min_elevation_rad = deg_to_rad(c.min_elevation_deg);
  if (c.user_latitude_deg) m.visibility.user_latitude_rad = deg_to_rad(*c.user_latitude_deg);
  m.noise_power = c.noise_power;
  m.seed = c.seed;
  m.threads = c.threads;
  return m;
}

// Slant range for a point `ground` km (great circle) from the subsatellite
// point, or nothing when that point does not see the satellite.
std::optional<double> slant_of_ground(const ShellGeometry& g, double ground) {
  const double psi = ground / g.earth_radius();
  if (psi < 0.0 || psi > std::acos(g.earth_radius() / g.shell_radius())) return std::nullopt;
  const double re = g.earth_radius();
  const double rs = g.shell_radius();
  const double r = std::sqrt(std::max(0.0, re * re + rs * rs - 2.0 * re * rs * std::cos(psi)));
  return std::clamp(r, g.min_slant(), g.max_slant());
}

enum class MethodKind { analytic, bound, closed, homogeneous, optimal, monte_carlo, gain };

MethodKind kind_of(const std::string& m) {
  if (m == "exact") return MethodKind::analytic;
  if (m == "bound_lower" || m == "bound_upper" || m == "bound_approx") return MethodKind::bound;
  if (m == "closed_form" || m == "closed_form_erf" || m == "closed_form_lower") return MethodKind::closed;
  if (m == "homogeneous_lb") return MethodKind::homogeneous;
  if (m == "optimal_k" || m == "optimal_lambda") return MethodKind::optimal;
  if (m.rfind("monte_carlo", 0) == 0) return MethodKind::monte_carlo;
  return MethodKind::gain;
}

bool is_probability(const std::string& m) {
  const MethodKind k = kind_of(m);
  return k != MethodKind::optimal && k != MethodKind::gain;
}

}  // namespace

ConfigError::ConfigError(std::string source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         ": " + message),
      line_(line) {}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods{
      "exact",           "bound_lower",    "bound_upper",   "bound_approx",
      "closed_form",     "closed_form_erf", "closed_form_lower", "homogeneous_lb",
      "optimal_k",       "optimal_lambda", "monte_carlo",   "monte_carlo_strongest",
      "monte_carlo_nearest", "beam_gain"};
  return methods;
}

ExperimentConfig parse_experiment(std::string_view text, std::string source) {
  ExperimentConfig cfg;
  cfg.source = source;
  cfg.text = std::string(text);
  Parser p{cfg, cfg.source, 0, {}};
  std::string section;
  std::istringstream in(cfg.text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++p.line;
    p.key.clear();
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(cfg.source, p.line, "malformed section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (!schema().contains(section)) {
        throw ConfigError(cfg.source, p.line, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(cfg.source, p.line, "expected key = value");
    p.key = lower(trim(line.substr(0, eq)));
    std::string value = line.substr(eq + 1);
    if (const auto hash = value.find(" #"); hash != std::string::npos) value.resize(hash);
    value = trim(value);
    if (section.empty()) {
      throw ConfigError(cfg.source, p.line, "key '" + p.key + "' outside any section");
    }
    const auto& keys = schema().at(section);
    const auto it = keys.find(p.key);
    if (it == keys.end()) {
      throw ConfigError(cfg.source, p.line,
                        "unknown key '" + p.key + "' in section [" + section + "]");
    }
    const std::string full = section + "." + p.key;
    if (cfg.key_lines.contains(full)) {
      throw ConfigError(cfg.source, p.line,
                        "duplicate key '" + p.key + "' (first set on line " +
                            std::to_string(cfg.key_lines[full]) + ")");
    }
    if (value.empty()) p.fail("empty value");
    it->second(p, value);
    cfg.key_lines[full] = p.line;
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str(), path);
}

void validate_experiment(const ExperimentConfig& cfg) {
  auto line_of = [&](const std::string& key) {
    const auto it = cfg.key_lines.find(key);
    return it == cfg.key_lines.end() ? 0 : it->second;
  };
  auto fail = [&](const std::string& key, const std::string& msg) -> void {
    throw ConfigError(cfg.source, line_of(key), msg);
  };

  if (cfg.id.empty()) fail("experiment.id", "experiment.id is required");
  if (!kSweeps.contains(cfg.sweep)) {
    fail("experiment.sweep", "unknown sweep '" + cfg.sweep +
                                 "' (gamma, density, mean_visible, altitude, beta, r_los, ground_km)");
  }
  if (cfg.grid.empty()) fail("experiment.grid", "experiment.grid is required");
  for (std::size_t i = 1; i < cfg.grid.size(); ++i) {
    if (!(cfg.grid[i] > cfg.grid[i - 1])) fail("experiment.grid", "grid must be strictly increasing");
  }
  if (!cfg.series.empty()) {
    if (!kSeries.contains(cfg.series)) fail("experiment.series", "unknown series '" + cfg.series + "'");
    if (cfg.series_values.empty()) fail("experiment.series", "series needs series_values");
    if (cfg.series == cfg.sweep || (cfg.series == "gamma_db" && cfg.sweep == "gamma")) {
      fail("experiment.series", "series must differ from the sweep variable");
    }
  } else if (!cfg.series_values.empty()) {
    fail("experiment.series_values", "series_values given without series");
  }
  if (cfg.methods.empty()) fail("experiment.methods", "experiment.methods is required");
  const auto& known = known_methods();
  for (const auto& m : cfg.methods) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      fail("experiment.methods", "unknown method '" + m + "'");
    }
    if ((m == "beam_gain") != (cfg.sweep == "ground_km")) {
      fail("experiment.methods", "method beam_gain goes with sweep = ground_km and only with it");
    }
  }
  if (!(cfg.rel_tol > 0.0 && cfg.rel_tol <= 1e-3)) fail("analysis.rel_tol", "rel_tol must lie in (0, 1e-3]");
  if (!(cfg.abs_tol > 0.0 && cfg.abs_tol <= 1e-3)) fail("analysis.abs_tol", "abs_tol must lie in (0, 1e-3]");

  // Walk every (series, sweep) point and build the models each method needs.
  std::vector<double> series = cfg.series_values;
  if (series.empty()) series.push_back(0.0);
  for (double sv : series) {
    for (double gv : cfg.grid) {
      ExperimentConfig c = cfg;
      if (!cfg.series.empty()) apply(c, cfg.series, sv);
      apply(c, cfg.sweep, gv);
      std::string where = cfg.sweep + "=" + fmt_num(gv);
      if (!cfg.series.empty()) where += ", " + cfg.series + "=" + fmt_num(sv);
      try {
        const ShellGeometry geom = geometry_of(c);
        channel_of(c).validate(geom);
        validate_beam(beam_of(c), geom);
        for (const auto& m : cfg.methods) {
          switch (kind_of(m)) {
            case MethodKind::analytic:
            case MethodKind::bound: {
              if (c.min_elevation_deg != 0.0) {
                throw UnsupportedConfiguration(m + " integrates over the whole cap; min_elevation_deg must be 0");
              }
              if (!has_density(c)) throw DomainError(m + " needs mean_visible or density_per_km2");
              (void)analytic_of(c);
              if (kind_of(m) == MethodKind::bound) {
                const double k = kappa_of(c, m);
                const double ku = kappa_upper(c.nakagami_m);
                if (!(k >= ku * (1.0 - 1e-12) && k <= 1.0 + 1e-12)) {
                  throw DomainError("kappa must lie between (m!)^(-1/m) and 1");
                }
              }
              break;
            }
            case MethodKind::closed: {
              if (c.los != "step") throw UnsupportedConfiguration(m + " needs channel.los = step");
              if (c.beam != "step" && c.beam != "constant") {
                throw UnsupportedConfiguration(m + " needs a step or constant beam");
              }
              if (c.min_elevation_deg != 0.0) {
                throw UnsupportedConfiguration(m + " needs min_elevation_deg = 0");
              }
              if (std::abs(c.alpha_nlos - 2.0 * c.alpha_los) > 1e-12 * c.alpha_los) {
                throw UnsupportedConfiguration(m + " needs alpha_nlos = 2 alpha_los");
              }
              if (!has_density(c)) throw DomainError(m + " needs mean_visible or density_per_km2");
              const StepModelConfig s = step_of(c);
              if (m == "closed_form_lower") {
                (void)BoundParams::make(s, 1.0, 1.0);
              } else {
                (void)BoundParams::make(s, kappa_of(c, m), c.epsilon);
              }
              break;
            }
            case MethodKind::homogeneous:
              if (!has_density(c)) throw DomainError(m + " needs mean_visible or density_per_km2");
              if (!(hm_alpha_of(c) > 2.0)) throw DomainError(m + " needs alpha > 2");
              break;
            case MethodKind::optimal:
              if (!(hm_alpha_of(c) > 2.0)) throw DomainError(m + " needs alpha > 2");
              break;
            case MethodKind::monte_carlo: {
              const ConstellationSpec spec = constellation_of(c);
              (void)visible_slant_limit(geom, deg_to_rad(c.min_elevation_deg));
              if (const auto* s = std::get_if<Snapshot>(&spec)) {
                if (!fs::exists(s->path)) throw InputError("snapshot file '" + s->path + "' not found");
              }
              if (c.noise_power < 0.0) throw DomainError("noise_power must be non-negative");
              break;
            }
            case MethodKind::gain:
              break;
          }
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(cfg.source, 0, where + ": " + e.what());
      }
    }
  }
}

ResultTable run_experiment(const ExperimentConfig& base_in, const RunOverrides& overrides,
                           const ProgressFn& progress) {
  ExperimentConfig base = base_in;
  if (overrides.seed) base.seed = *overrides.seed;
  if (overrides.trials) base.trials = *overrides.trials;
  if (overrides.threads) base.threads = *overrides.threads;
  validate_experiment(base);

  const auto start = std::chrono::steady_clock::now();
  ResultTable table;
  table.id = base.id;
  table.sweep = base.sweep;
  table.seed = base.seed;
  table.trials = base.trials;
  table.threads = base.threads;

  if (has_density(base) && base.sweep != "ground_km") {
    try {
      const double lambda = density_of(base);
      const ShellGeometry geom = geometry_of(base);
      table.notes["resolved.density_per_km2"] = fmt_num(lambda);
      table.notes["resolved.mean_visible"] =
          fmt_num(lambda * visible_cap_area(geom, deg_to_rad(base.min_elevation_deg)));
    } catch (const std::exception&) {
    }
  }

  std::vector<double> series = base.series_values;
  const bool has_series = !base.series.empty();
  if (!has_series) series.push_back(0.0);

  for (const auto& method : base.methods) {
    for (double sv : series) {
      ExperimentConfig c = base;
      if (has_series) apply(c, base.series, sv);
      const std::string label =
          has_series ? method + "@" + base.series + "=" + fmt_num(sv) : method;

      // Evaluates the method at one parameter point for a set of thresholds.
      double sweep_value = 0.0;
      auto evaluate = [&](const ExperimentConfig& p, const std::vector<double>& gamma)
          -> std::pair<std::vector<double>, std::optional<std::vector<double>>> {
        switch (kind_of(method)) {
          case MethodKind::analytic: {
            auto curve = coverage_exact(gamma, analytic_of(p), p.threads);
            const auto n = std::count(curve.upper_bound_only.begin(), curve.upper_bound_only.end(), true);
            if (n > 0) table.notes[label + ".upper_bound_only_points"] = std::to_string(n);
            return {curve.values, std::nullopt};
          }
          case MethodKind::bound:
            return {coverage_bound(gamma, analytic_of(p), kappa_of(p, method), p.threads).values,
                    std::nullopt};
          case MethodKind::closed: {
            const StepModelConfig s = step_of(p);
            table.notes[label + ".epsilon_min"] = fmt_num(BoundParams::epsilon_min(s));
            if (method == "closed_form_lower") return {coverage_lower_closed(gamma, s).values, std::nullopt};
            const BoundParams bp = BoundParams::make(s, kappa_of(p, method), p.epsilon);
            if (method == "closed_form_erf") {
              return {coverage_closed_form_erf(gamma, s, bp).values, std::nullopt};
            }
            return {coverage_closed_form(gamma, s, bp).values, std::nullopt};
          }
          case MethodKind::homogeneous:
            return {coverage_lower_homogeneous(gamma, density_of(p), geometry_of(p), hm_alpha_of(p)).values,
                    std::nullopt};
          case MethodKind::optimal: {
            std::vector<double> out;
            for (double g : gamma) {
              const auto o = optimal_density(g, hm_alpha_of(p), geometry_of(p));
              out.push_back(method == "optimal_k" ? o.k_star : o.lambda_star);
            }
            return {out, std::nullopt};
          }
          case MethodKind::monte_carlo: {
            MonteCarloConfig mc = mc_of(p);
            if (method == "monte_carlo_strongest") mc.association = Association::strongest;
            if (method == "monte_carlo_nearest") mc.association = Association::nearest;
            const auto est = estimate_coverage(constellation_of(p), gamma, p.trials, mc);
            std::string key = label;
            if (base.sweep != "gamma") key += "@" + base.sweep + "=" + fmt_num(sweep_value);
            table.notes[key + ".mean_visible"] = fmt_num(est.mean_visible);
            table.notes[key + ".empty_fraction"] = fmt_num(est.empty_fraction);
            return {est.curve.values, est.curve.ci_halfwidth};
          }
          case MethodKind::gain:
            break;
        }
        return {};
      };

      if (method == "beam_gain") {
        const ShellGeometry geom = geometry_of(c);
        const BeamGainModel beam = beam_of(c);
        for (double d : base.grid) {
          const auto r = slant_of_ground(geom, d);
          const double g = r ? beam_gain(*r, beam, geom) / peak_gain(c) : 0.0;
          table.rows.push_back({d, label, g, std::nullopt, g});
        }
      } else if (base.sweep == "gamma") {
        const auto gamma = gamma_grid_from_db(base.grid);
        const auto [values, ci] = evaluate(c, gamma);
        for (std::size_t i = 0; i < gamma.size(); ++i) {
          const double raw = values[i];
          const double shown = is_probability(method) ? std::clamp(raw, 0.0, 1.0) : raw;
          table.rows.push_back({base.grid[i], label, shown,
                                ci ? std::optional<double>((*ci)[i]) : std::nullopt, raw});
        }
      } else {
        for (double v : base.grid) {
          ExperimentConfig p = c;
          apply(p, base.sweep, v);
          sweep_value = v;
          const std::vector<double> gamma{db_to_linear(p.gamma_db)};
          const auto [values, ci] = evaluate(p, gamma);
          const double raw = values[0];
          const double shown = is_probability(method) ? std::clamp(raw, 0.0, 1.0) : raw;
          table.rows.push_back({v, label, shown, ci ? std::optional<double>((*ci)[0]) : std::nullopt, raw});
        }
      }
      if (progress) progress("done " + label);
    }
  }
  table.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return table;
}

std::string format_csv(const ResultTable& table) {
  std::string out = "sweep,method,value,ci,raw\n";
  for (const auto& r : table.rows) {
    out += fmt_num(r.sweep) + "," + r.method + "," + fmt_num(r.value) + "," +
           (r.ci ? fmt_num(*r.ci) : std::string()) + "," + fmt_num(r.raw) + "\n";
  }
  return out;
}

void write_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << format_csv(table);
  if (!out) throw InputError("failed writing '" + path + "'");
}

std::string format_metadata(const ResultTable& table, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["id"] = table.id;
  j["description"] = cfg.description;
  j["version"] = std::string(library_version());
  j["config_path"] = cfg.source;
  j["seed"] = table.seed;
  j["trials"] = table.trials;
  j["threads"] = table.threads;
  j["sweep"] = table.sweep;
  j["wall_time_s"] = table.wall_time_s;
  j["columns"] = {"sweep", "method", "value", "ci", "raw"};
  j["notes"] = table.notes;
  j["config"] = cfg.text;
  return j.dump(2) + "\n";
}

void write_metadata(const ResultTable& table, const ExperimentConfig& cfg,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << format_metadata(table, cfg);
}

std::vector<PresetInfo> list_presets(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw InputError("preset directory '" + dir + "' does not exist");
  std::vector<PresetInfo> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".cfg") continue;
    PresetInfo info;
    info.name = entry.path().stem().string();
    info.path = entry.path().string();
    try {
      info.description = load_experiment(info.path).description;
    } catch (const std::exception& e) {
      info.description = std::string("(unreadable: ") + e.what() + ")";
    }
    out.push_back(std::move(info));
  }
  if (out.empty()) throw InputError("preset directory '" + dir + "' contains no .cfg presets");
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

std::string_view library_version() { return LEOCOV_VERSION; }

}  // namespace leocov
