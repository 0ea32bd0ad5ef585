#include "beamalloc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "beamalloc/error.hpp"
#include "beamalloc/rng.hpp"

namespace beamalloc {

namespace {

constexpr std::uint64_t kDropStream = 1;
constexpr std::uint64_t kPhaseStream = 2;
constexpr std::uint64_t kRainStream = 3;

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidConfig("system config: " + what);
}

}  // namespace

double parabolic_gain(double diameter_m, double freq_ghz, double efficiency) {
  const double lambda = kSpeedOfLight / (freq_ghz * 1e9);
  const double x = kPi * diameter_m / lambda;
  return efficiency * x * x;
}

void SystemConfig::validate() const {
  require(n_beams >= 1, "n_beams must be >= 1");
  require(n_users >= 1, "n_users must be >= 1");
  require(n_users <= n_beams, "n_users must not exceed n_beams");
  require(bandwidth_mhz > 0, "bandwidth_mhz must be positive");
  require(carrier_freq_ghz > 0, "carrier_freq_ghz must be positive");
  require(sat_height_km > 0, "sat_height_km must be positive");
  require(p_max_w > 0, "p_max must be positive");
  require(noise_power_w > 0, "noise_power must be positive");
  require(rx_gain > 0, "rx_gain must be positive");
  require(boltzmann > 0, "boltzmann must be positive");
  require(noise_temp_k > 0, "noise_temp_k must be positive");
  require(peak_beam_gain > 0, "peak_beam_gain must be positive");
  require(beam_radius_km > 0, "beam_radius_km must be positive");
  require(atmosphere.rain_var_db >= 0, "rain variance must be nonnegative");
  require(atmosphere.w_red >= 0, "w_red must be nonnegative");
  require(atmosphere.cloud_temp_k > 0, "cloud temperature must be positive");
}

double SystemConfig::normalized_noise() const {
  return noise_power_w / (boltzmann * noise_temp_k * bandwidth_mhz * 1e6);
}

double SystemConfig::theta_3db() const { return std::atan(beam_radius_km / sat_height_km); }

Matrix hex_beam_centers(int n_beams, double spacing_km) {
  // Axial hex directions; ring m starts at m * dir[4] and walks m steps per side.
  static constexpr int kDir[6][2] = {{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}};
  std::vector<std::pair<int, int>> cells{{0, 0}};
  for (int ring = 1; static_cast<int>(cells.size()) < n_beams; ++ring) {
    int q = kDir[4][0] * ring;
    int r = kDir[4][1] * ring;
    for (int side = 0; side < 6; ++side) {
      for (int step = 0; step < ring; ++step) {
        cells.emplace_back(q, r);
        q += kDir[side][0];
        r += kDir[side][1];
      }
    }
  }
  Matrix centers(n_beams, 2);
  for (int n = 0; n < n_beams; ++n) {
    const auto [q, r] = cells[static_cast<std::size_t>(n)];
    centers(n, 0) = spacing_km * (q + 0.5 * r);
    centers(n, 1) = spacing_km * (std::sqrt(3.0) / 2.0 * r);
  }
  return centers;
}

double slant_range_km(double offset_km, double sat_height_km) {
  return std::hypot(sat_height_km, offset_km);
}

double elevation_deg(double offset_km, double sat_height_km) {
  return std::atan2(sat_height_km, std::abs(offset_km)) * 180.0 / kPi;
}

UserDrop drop_users(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int n = cfg.n_beams;
  const int k = cfg.n_users;
  Rng rng(mix_seed(seed, kDropStream));

  UserDrop drop;
  drop.beam_centers_km = hex_beam_centers(n, cfg.beam_radius_km * std::sqrt(3.0));

  // Partial Fisher-Yates: the first K entries are K distinct beams.
  std::vector<int> beams(static_cast<std::size_t>(n));
  std::iota(beams.begin(), beams.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(beams[static_cast<std::size_t>(i)], beams[static_cast<std::size_t>(j)]);
  }
  drop.serving_beam.assign(beams.begin(), beams.begin() + k);

  drop.positions_km.resize(k, 2);
  drop.distances_km.resize(k);
  drop.elevations_deg.resize(k);
  for (int u = 0; u < k; ++u) {
    const int b = drop.serving_beam[static_cast<std::size_t>(u)];
    const double radius = cfg.beam_radius_km * std::sqrt(rng.uniform());
    const double angle = 2.0 * kPi * rng.uniform();
    drop.positions_km(u, 0) = drop.beam_centers_km(b, 0) + radius * std::cos(angle);
    drop.positions_km(u, 1) = drop.beam_centers_km(b, 1) + radius * std::sin(angle);
    const double offset = drop.positions_km.row(u).norm();
    drop.distances_km(u) = slant_range_km(offset, cfg.sat_height_km);
    drop.elevations_deg(u) = elevation_deg(offset, cfg.sat_height_km);
  }
  return drop;
}

double beam_gain(double offset_angle, const SystemConfig& cfg) {
  const double u = 2.07123 * std::sin(offset_angle) / std::sin(cfg.theta_3db());
  if (std::abs(u) < 1e-6) return cfg.peak_beam_gain;
  const double a = std::cyl_bessel_j(1.0, u) / (2.0 * u) +
                   36.0 * std::cyl_bessel_j(3.0, u) / (u * u * u);
  return cfg.peak_beam_gain * a * a;
}

double offset_angle(const Eigen::Vector2d& beam_km, const Eigen::Vector2d& user_km,
                    double sat_height_km) {
  const Eigen::Vector3d b(beam_km.x(), beam_km.y(), -sat_height_km);
  const Eigen::Vector3d v(user_km.x(), user_km.y(), -sat_height_km);
  return std::atan2(b.cross(v).norm(), b.dot(v));
}

double channel_entry(double gain_nk, double distance_km, const SystemConfig& cfg) {
  const double noise = std::sqrt(cfg.boltzmann * cfg.noise_temp_k * cfg.bandwidth_mhz * 1e6);
  return cfg.wavelength_m() * std::sqrt(cfg.rx_gain * gain_nk) /
         (4.0 * kPi * distance_km * 1e3 * noise);
}

ChannelMatrix build_channel(const UserDrop& drop, const SystemConfig& cfg, std::uint64_t seed) {
  const auto n = static_cast<int>(drop.beam_centers_km.rows());
  const auto k = static_cast<int>(drop.positions_km.rows());
  ChannelMatrix ch;
  ch.gain_part.resize(n, k);
  for (int u = 0; u < k; ++u) {
    const Eigen::Vector2d user = drop.positions_km.row(u).transpose();
    for (int b = 0; b < n; ++b) {
      const Eigen::Vector2d beam = drop.beam_centers_km.row(b).transpose();
      const double g = beam_gain(offset_angle(beam, user, cfg.sat_height_km), cfg);
      ch.gain_part(b, u) = channel_entry(g, drop.distances_km(u), cfg);
    }
  }
  Rng rng(mix_seed(seed, kPhaseStream));
  ch.phases.resize(k);
  for (int u = 0; u < k; ++u) ch.phases(u) = 2.0 * kPi * rng.uniform();
  ch.h.resize(n, k);
  for (int u = 0; u < k; ++u) {
    ch.h.col(u) = ch.gain_part.col(u).cast<Complex>() * std::polar(1.0, ch.phases(u));
  }
  return ch;
}

std::pair<double, double> water_permittivity(double freq_ghz, double temp_k) {
  const double theta = 300.0 / temp_k;
  const double eps0 = 77.66 + 103.3 * (theta - 1.0);
  const double eps1 = 5.48;
  const double eps2 = 3.51;
  const double fp = 20.09 - 142.0 * (theta - 1.0) + 294.0 * (theta - 1.0) * (theta - 1.0);
  const double fs = 590.0 - 1500.0 * (theta - 1.0);
  const double rp = freq_ghz / fp;
  const double rs = freq_ghz / fs;
  const double real = eps2 + (eps0 - eps1) / (1.0 + rp * rp) + (eps1 - eps2) / (1.0 + rs * rs);
  const double imag = freq_ghz * (eps0 - eps1) / (fp * (1.0 + rp * rp)) +
                      freq_ghz * (eps1 - eps2) / (fs * (1.0 + rs * rs));
  return {real, imag};
}

double cloud_attenuation_db(double freq_ghz, double w_red, double elevation_deg,
                            double temp_k) {
  const auto [re, im] = water_permittivity(freq_ghz, temp_k);
  const double zeta = (2.0 + re) / im;
  const double s = std::sin(elevation_deg * kPi / 180.0);
  if (!(s > 1e-9)) {
    throw AttenuationOverflow("cloud attenuation diverges at elevation " +
                              std::to_string(elevation_deg) + " deg");
  }
  const double att = 0.819 * freq_ghz * w_red / (im * (1.0 + zeta * zeta)) / s;
  if (!std::isfinite(att)) throw AttenuationOverflow("cloud attenuation is not finite");
  return att;
}

std::pair<ChannelMatrix, AtmosphereState> apply_atmosphere(const ChannelMatrix& ch,
                                                           const UserDrop& drop,
                                                           const SystemConfig& cfg,
                                                           std::uint64_t seed) {
  const int k = ch.n_users();
  const auto& atm = cfg.atmosphere;
  AtmosphereState state;
  state.rain_fades = Vector::Ones(k);
  state.cloud_attens_db = Vector::Zero(k);
  state.rain_mean_db = atm.rain_mean_db;
  state.rain_var_db = atm.rain_var_db;
  state.w_red = atm.w_red;
  if (!cfg.atmospherics_enabled) return {ch, state};

  if (drop.elevations_deg.size() != k) {
    throw InvalidInput("apply_atmosphere: drop and channel disagree on user count");
  }
  Rng rng(mix_seed(seed, kRainStream));
  ChannelMatrix out = ch;
  for (int u = 0; u < k; ++u) {
    const double rain_db = rng.normal(atm.rain_mean_db, std::sqrt(atm.rain_var_db));
    state.rain_fades(u) = db_to_linear(rain_db);
    state.cloud_attens_db(u) = cloud_attenuation_db(cfg.carrier_freq_ghz, atm.w_red,
                                                    drop.elevations_deg(u), atm.cloud_temp_k);
    const double cloud_lin = db_to_linear(state.cloud_attens_db(u));
    if (!std::isfinite(cloud_lin)) {
      throw AttenuationOverflow("cloud attenuation overflows for user " + std::to_string(u));
    }
    const double scale = std::sqrt(state.rain_fades(u)) / std::sqrt(cloud_lin);
    out.h.col(u) *= scale;
    out.gain_part.col(u) *= scale;
  }
  return {out, state};
}

}  // namespace beamalloc
