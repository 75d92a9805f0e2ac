#include "leocov/montecarlo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "leocov/errors.hpp"
#include "parallel.hpp"

namespace leocov {
namespace {

std::string trim_lower(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto t = trim_lower(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw DomainError("invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (trim_lower(s.substr(used)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw InputError(where + ": not a number: '" + s + "'");
}

std::vector<Vec3> load_snapshot(const Snapshot& spec, double earth_radius) {
  std::ifstream in(spec.path);
  if (!in) throw InputError("cannot open snapshot file '" + spec.path + "'");
  std::string line;
  int line_no = 0;
  enum class Format { xyz, geodetic } format{};
  std::array<int, 3> column{-1, -1, -1};
  bool have_header = false;
  std::vector<Vec3> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_lower(line).empty() || trim_lower(line).front() == '#') continue;
    const auto cells = split(line, ',');
    const std::string where = spec.path + ":" + std::to_string(line_no);
    if (!have_header) {
      std::vector<std::string> names;
      for (const auto& c : cells) names.push_back(trim_lower(c));
      auto find = [&](std::string_view n) {
        const auto it = std::find(names.begin(), names.end(), n);
        return it == names.end() ? -1 : static_cast<int>(it - names.begin());
      };
      if (find("x_km") >= 0 && find("y_km") >= 0 && find("z_km") >= 0) {
        format = Format::xyz;
        column = {find("x_km"), find("y_km"), find("z_km")};
      } else if (find("lat_deg") >= 0 && find("lon_deg") >= 0 && find("alt_km") >= 0) {
        format = Format::geodetic;
        column = {find("lat_deg"), find("lon_deg"), find("alt_km")};
      } else {
        throw InputError(where +
                         ": header must contain x_km,y_km,z_km or lat_deg,lon_deg,alt_km");
      }
      have_header = true;
      continue;
    }
    const int needed = *std::max_element(column.begin(), column.end());
    if (static_cast<int>(cells.size()) <= needed) {
      throw InputError(where + ": expected at least " + std::to_string(needed + 1) + " columns");
    }
    const double a = parse_double(cells[column[0]], where);
    const double b = parse_double(cells[column[1]], where);
    const double c = parse_double(cells[column[2]], where);
    Vec3 p{};
    if (format == Format::xyz) {
      p = {a, b, c};
    } else {
      const double lat = a * std::numbers::pi / 180.0;
      const double lon = b * std::numbers::pi / 180.0;
      const double r = earth_radius + c;
      p = {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon),
           r * std::sin(lat)};
    }
    const double radius = p.norm();
    if (!(radius > 0.0)) throw InputError(where + ": satellite at the Earth centre");
    const double alt = radius - earth_radius;
    if (alt >= spec.alt_min_km && alt <= spec.alt_max_km) out.push_back(p * (1.0 / radius));
  }
  if (!have_header) throw InputError("snapshot file '" + spec.path + "' has no header");
  return out;
}

Vec3 draw_user(Philox4x32& rng, const VisibilityOptions& vis) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double phi = 2.0 * std::numbers::pi * unit(rng);
  if (vis.user_latitude_rad) {
    const double lat = *vis.user_latitude_rad;
    return {std::cos(lat) * std::cos(phi), std::cos(lat) * std::sin(phi), std::sin(lat)};
  }
  const double z = 2.0 * unit(rng) - 1.0;
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {rho * std::cos(phi), rho * std::sin(phi), z};
}

void validate_spec(const ConstellationSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sppp>) {
          if (!(s.density > 0.0) || !std::isfinite(s.density)) {
            throw DomainError("PPP density must be positive and finite");
          }
        } else if constexpr (std::is_same_v<T, Bpp>) {
          if (s.n_visible < 1) throw DomainError("BPP needs at least one satellite");
        } else if constexpr (std::is_same_v<T, WalkerStar>) {
          if (s.planes < 1 || s.sats_per_plane < 1) {
            throw DomainError("Walker constellation needs positive plane and satellite counts");
          }
          if (s.phasing < 0 || s.phasing >= s.planes) {
            throw DomainError("Walker phasing must lie in [0, planes)");
          }
          if (!(s.inclination_rad > 0.0 && s.inclination_rad <= std::numbers::pi)) {
            throw DomainError("Walker inclination must lie in (0, 180] degrees");
          }
        } else {
          if (s.freq_groups < 1) throw DomainError("freq_groups must be positive");
          if (!(s.alt_min_km <= s.alt_max_km)) throw DomainError("empty altitude band");
          if (!(s.min_elevation_rad >= 0.0 && s.min_elevation_rad < std::numbers::pi / 2)) {
            throw DomainError("snapshot min elevation must lie in [0, 90) degrees");
          }
        }
      },
      spec);
}

}  // namespace

ConstellationSpec parse_constellation(std::string_view text, double density) {
  const auto colon = text.find(':');
  const std::string kind = trim_lower(text.substr(0, colon));
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (kind == "ppp" || kind == "sppp") return Sppp{density};
  if (kind == "bpp") {
    if (arg.empty()) throw DomainError("bpp needs a count, e.g. bpp:4");
    const int n = parse_int(arg, "BPP count");
    if (n < 1) throw DomainError("BPP count must be positive");
    return Bpp{n};
  }
  if (kind == "walker-star" || kind == "walker") {
    const auto parts = split(arg, '/');
    if (parts.size() != 3) throw DomainError("expected walker-star:P/S/F, got '" + std::string(text) + "'");
    WalkerStar w;
    w.planes = parse_int(parts[0], "Walker plane count");
    w.sats_per_plane = parse_int(parts[1], "Walker satellites per plane");
    w.phasing = parse_int(parts[2], "Walker phasing");
    if (w.planes < 1 || w.sats_per_plane < 1) {
      throw DomainError("Walker plane and per-plane counts must be positive");
    }
    return w;
  }
  if (kind == "snapshot") {
    if (arg.empty()) throw DomainError("snapshot needs a file, e.g. snapshot:sats.csv");
    Snapshot s;
    s.path = std::string(arg);
    return s;
  }
  throw DomainError("unknown constellation model '" + std::string(text) + "'");
}

std::string describe(const ConstellationSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        std::ostringstream os;
        os.precision(17);
        if constexpr (std::is_same_v<T, Sppp>) {
          os << "ppp(density=" << s.density << ")";
        } else if constexpr (std::is_same_v<T, Bpp>) {
          os << "bpp:" << s.n_visible;
        } else if constexpr (std::is_same_v<T, WalkerStar>) {
          os << "walker-star:" << s.planes << "/" << s.sats_per_plane << "/" << s.phasing
             << " (inclination " << s.inclination_rad * 180.0 / std::numbers::pi << " deg)";
        } else {
          os << "snapshot:" << s.path << " (alt " << s.alt_min_km << "-" << s.alt_max_km
             << " km, " << s.freq_groups << " groups)";
        }
        return os.str();
      },
      spec);
}

double visible_slant_limit(const ShellGeometry& geom, double min_elevation_rad) {
  if (!(min_elevation_rad >= 0.0 && min_elevation_rad < std::numbers::pi / 2)) {
    throw DomainError("minimum elevation must lie in [0, 90) degrees");
  }
  if (min_elevation_rad == 0.0) return geom.max_slant();
  return geom.slant_at_elevation(min_elevation_rad);
}

double visible_cap_area(const ShellGeometry& geom, double min_elevation_rad) {
  return geom.cap_area_within(visible_slant_limit(geom, min_elevation_rad));
}

double density_for_visible_count(double k, const ShellGeometry& geom, double min_elevation_rad) {
  if (!(k > 0.0)) throw DomainError("mean visible count must be positive");
  return k / visible_cap_area(geom, min_elevation_rad);
}

double SatelliteLink::received_power() const { return gain * fading * std::pow(slant, -alpha); }

ConstellationSampler::ConstellationSampler(ConstellationSpec spec, const ShellGeometry& geom,
                                           VisibilityOptions visibility)
    : spec_(std::move(spec)), geom_(geom), vis_(visibility) {
  validate_spec(spec_);
  double min_el = vis_.min_elevation_rad;
  if (const auto* s = std::get_if<Snapshot>(&spec_)) min_el = std::max(min_el, s->min_elevation_rad);
  r_cut_ = visible_slant_limit(geom_, min_el);

  if (const auto* p = std::get_if<Sppp>(&spec_)) {
    expected_count_ = p->density * geom_.cap_area_within(r_cut_);
    if (!(expected_count_ > 0.0) || !std::isfinite(expected_count_)) {
      throw DomainError("PPP expected visible count must be positive and finite");
    }
  } else if (const auto* w = std::get_if<WalkerStar>(&spec_)) {
    const double P = w->planes;
    const double S = w->sats_per_plane;
    for (int p = 0; p < w->planes; ++p) {
      const double raan = std::numbers::pi * p / P;
      planes_.push_back({std::cos(raan), std::sin(raan)});
      for (int s = 0; s < w->sats_per_plane; ++s) {
        const double u = 2.0 * std::numbers::pi * (s / S + p * w->phasing / (P * S));
        phases_.push_back({std::cos(u), std::sin(u)});
      }
    }
  } else if (const auto* s = std::get_if<Snapshot>(&spec_)) {
    positions_ = load_snapshot(*s, geom_.earth_radius());
  }
}

bool ConstellationSampler::empty_source() const {
  return std::holds_alternative<Snapshot>(spec_) && positions_.empty();
}

void ConstellationSampler::sample_positions(Philox4x32& rng, std::vector<double>& out) const {
  const double rs = geom_.shell_radius();
  const double re = geom_.earth_radius();
  // pos . u >= c_cut  <=>  slant <= r_cut
  const double c_cut = (rs * rs + re * re - r_cut_ * r_cut_) / (2.0 * re * rs);
  auto slant_of = [&](double c) {
    const double r2 = rs * rs + re * re - 2.0 * re * rs * c;
    return std::clamp(std::sqrt(std::max(r2, 0.0)), geom_.min_slant(), r_cut_);
  };
  const Vec3 user = draw_user(rng, vis_);

  if (const auto* w = std::get_if<WalkerStar>(&spec_)) {
    double cd = 1.0;
    double sd = 0.0;
    if (vis_.user_latitude_rad) {
      // A fixed-latitude user needs the orbital phase randomised as well.
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double delta = 2.0 * std::numbers::pi * unit(rng) / w->sats_per_plane;
      cd = std::cos(delta);
      sd = std::sin(delta);
    }
    const double ci = std::cos(w->inclination_rad);
    const double si = std::sin(w->inclination_rad);
    std::size_t k = 0;
    for (const auto& [co, so] : planes_) {
      const double a = co * user.x + so * user.y;
      const double b = ci * (-so * user.x + co * user.y) + si * user.z;
      for (int s = 0; s < w->sats_per_plane; ++s, ++k) {
        const double cu = phases_[k][0] * cd - phases_[k][1] * sd;
        const double su = phases_[k][1] * cd + phases_[k][0] * sd;
        const double c = cu * a + su * b;
        if (c >= c_cut) out.push_back(slant_of(c));
      }
    }
    return;
  }

  const auto& snap = std::get<Snapshot>(spec_);
  std::bernoulli_distribution keep(1.0 / snap.freq_groups);
  for (const Vec3& p : positions_) {
    const double c = p.dot(user);
    if (c < c_cut) continue;
    if (snap.freq_groups > 1 && !keep(rng)) continue;
    out.push_back(slant_of(c));
  }
}

void ConstellationSampler::sample_slants(Philox4x32& rng, std::vector<double>& out) const {
  out.clear();
  const double h2 = geom_.min_slant() * geom_.min_slant();
  const double span = r_cut_ * r_cut_ - h2;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_slant = [&] { return std::sqrt(h2 + unit(rng) * span); };

  if (std::holds_alternative<Sppp>(spec_)) {
    const long n = std::poisson_distribution<long>(expected_count_)(rng);
    for (long i = 0; i < n; ++i) out.push_back(uniform_slant());
  } else if (const auto* b = std::get_if<Bpp>(&spec_)) {
    for (int i = 0; i < b->n_visible; ++i) out.push_back(uniform_slant());
  } else {
    sample_positions(rng, out);
  }
}

ConstellationRealization ConstellationSampler::realize(Philox4x32& rng,
                                                       const ChannelModel& channel,
                                                       const BeamGainModel& beam) const {
  ConstellationRealization real;
  real.stream = rng.stream();
  std::vector<double> slants;
  sample_slants(rng, slants);
  real.sats.reserve(slants.size());
  for (double r : slants) {
    const FadingDraw f = sample_fading(r, channel, geom_, rng);
    real.sats.push_back(SatelliteLink{r, f.los, f.power, beam_gain(r, beam, geom_),
                                      f.los ? channel.alpha_los : channel.alpha_nlos});
  }
  return real;
}

ConstellationRealization realize(const ConstellationSpec& spec, const ShellGeometry& geom,
                                 const ChannelModel& channel, const BeamGainModel& beam,
                                 Philox4x32& rng, const VisibilityOptions& visibility) {
  return ConstellationSampler(spec, geom, visibility).realize(rng, channel, beam);
}

std::string_view to_string(Association a) {
  return a == Association::strongest ? "strongest" : "nearest";
}

SirSample sir_sample(const ConstellationRealization& real, Association association,
                     double noise_power) {
  SirSample out;
  out.association = association;
  if (real.sats.empty()) return out;
  std::vector<double> power(real.sats.size());
  for (std::size_t i = 0; i < power.size(); ++i) power[i] = real.sats[i].received_power();

  std::size_t serving = 0;
  for (std::size_t i = 1; i < power.size(); ++i) {
    if (association == Association::strongest ? power[i] > power[serving]
                                              : real.sats[i].slant < real.sats[serving].slant) {
      serving = i;
    }
  }
  double interference = noise_power;
  for (std::size_t i = 0; i < power.size(); ++i) {
    if (i != serving) interference += power[i];
  }
  out.serving = static_cast<int>(serving);
  out.sir = interference > 0.0 ? power[serving] / interference
                               : std::numeric_limits<double>::infinity();
  return out;
}

MonteCarloEstimate estimate_coverage(const ConstellationSpec& spec,
                                     std::span<const double> gamma, std::size_t n_trials,
                                     const MonteCarloConfig& cfg) {
  validate_gamma_grid(gamma);
  if (n_trials < 1) throw DomainError("need at least one Monte Carlo trial");
  if (!(cfg.noise_power >= 0.0)) throw DomainError("noise power must be non-negative");
  cfg.channel.validate(cfg.geom);
  validate_beam(cfg.beam, cfg.geom);
  const ConstellationSampler sampler(spec, cfg.geom, cfg.visibility);

  const unsigned workers = detail::resolve_threads(cfg.threads, n_trials);
  struct Tally {
    std::vector<std::uint64_t> hist;  // hist[k]: trials whose SIR clears exactly k thresholds
    std::uint64_t visible = 0;
    std::uint64_t empty = 0;
  };
  std::vector<Tally> tallies(workers, Tally{std::vector<std::uint64_t>(gamma.size() + 1, 0)});

  detail::parallel_for(workers, workers, [&](unsigned, std::size_t w) {
    Tally& t = tallies[w];
    const std::size_t begin = n_trials * w / workers;
    const std::size_t end = n_trials * (w + 1) / workers;
    for (std::size_t trial = begin; trial < end; ++trial) {
      Philox4x32 rng(cfg.seed, trial);
      const auto real = sampler.realize(rng, cfg.channel, cfg.beam);
      t.visible += real.sats.size();
      const SirSample s = sir_sample(real, cfg.association, cfg.noise_power);
      if (s.empty()) {
        ++t.empty;
        ++t.hist[0];
        continue;
      }
      const auto k = std::upper_bound(gamma.begin(), gamma.end(), s.sir) - gamma.begin();
      ++t.hist[static_cast<std::size_t>(k)];
    }
  });

  std::vector<std::uint64_t> hist(gamma.size() + 1, 0);
  std::uint64_t visible = 0;
  std::uint64_t empty = 0;
  for (const auto& t : tallies) {
    for (std::size_t k = 0; k < hist.size(); ++k) hist[k] += t.hist[k];
    visible += t.visible;
    empty += t.empty;
  }

  MonteCarloEstimate out;
  out.trials = n_trials;
  out.mean_visible = static_cast<double>(visible) / static_cast<double>(n_trials);
  out.empty_fraction = static_cast<double>(empty) / static_cast<double>(n_trials);
  auto& curve = out.curve;
  curve.method = MethodTag::monte_carlo;
  curve.gamma.assign(gamma.begin(), gamma.end());
  curve.upper_bound_only.assign(gamma.size(), false);
  std::vector<double> ci(gamma.size());
  // Trials covering threshold i are those clearing more than i thresholds.
  std::uint64_t above = 0;
  curve.values.assign(gamma.size(), 0.0);
  for (std::size_t i = gamma.size(); i-- > 0;) {
    above += hist[i + 1];
    const double p = static_cast<double>(above) / static_cast<double>(n_trials);
    curve.values[i] = p;
    ci[i] = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n_trials));
  }
  curve.ci_halfwidth = std::move(ci);
  return out;
}

}  // namespace leocov
