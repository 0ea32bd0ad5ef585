#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "beamalloc/types.hpp"

namespace beamalloc {

/// Gain of a parabolic dish, eta * (pi D / lambda)^2.
double parabolic_gain(double diameter_m, double freq_ghz, double efficiency);

/// Rain and cloud model constants.
struct AtmosphereParams {
  double rain_mean_db = -2.6;
  double rain_var_db = 1.63;
  double w_red = 0.6;          // kg/m^2, reduced liquid water content
  double cloud_temp_k = 273.15;
};

/// Physical parameters of the forward link. All quantities are linear unless
/// the field name says otherwise.
struct SystemConfig {
  int n_beams = 7;
  int n_users = 7;
  double bandwidth_mhz = 500.0;
  double carrier_freq_ghz = 20.0;
  double sat_height_km = 35786.0;
  double p_max_w = db_to_linear(23.37);
  double noise_power_w = db_to_linear(-118.3);
  double rx_gain = parabolic_gain(0.6, 20.0, 0.65);
  double boltzmann = kBoltzmann;
  // Chosen so that K_B * T * B equals the default noise power.
  double noise_temp_k = db_to_linear(-118.3) / (kBoltzmann * 500e6);
  double peak_beam_gain = db_to_linear(44.4);
  double beam_radius_km = 150.0;
  bool atmospherics_enabled = false;
  AtmosphereParams atmosphere{};

  /// Throws InvalidConfig on the first violated invariant.
  void validate() const;

  /// Noise power in the units of the noise-whitened channel.
  ///
  /// The channel entries already carry the 1/sqrt(K_B T B) factor, so the SINR
  /// denominator is sigma^2 / (K_B T B); with the defaults this is 1.
  double normalized_noise() const;

  double wavelength_m() const { return kSpeedOfLight / (carrier_freq_ghz * 1e9); }

  /// Half-power half-angle of each spot beam (radians).
  double theta_3db() const;
};

struct UserDrop {
  Matrix positions_km;         // K x 2, beam-plane coordinates
  Vector distances_km;         // K
  Vector elevations_deg;       // K
  Matrix beam_centers_km;      // N x 2
  std::vector<int> serving_beam;  // K, beam whose disc holds the user
};

struct ChannelMatrix {
  CMatrix h;          // N x K
  Matrix gain_part;   // N x K, nonnegative
  Vector phases;      // K, radians

  int n_beams() const { return static_cast<int>(h.rows()); }
  int n_users() const { return static_cast<int>(h.cols()); }
};

struct AtmosphereState {
  Vector rain_fades;      // linear power factors
  Vector cloud_attens_db;
  double rain_mean_db = 0.0;
  double rain_var_db = 0.0;
  double w_red = 0.0;
};

/// Beam centres of an N-beam hexagonal cluster (centre first, then rings).
Matrix hex_beam_centers(int n_beams, double spacing_km);

/// Slant range and elevation from flat-offset geometry.
double slant_range_km(double offset_km, double sat_height_km);
double elevation_deg(double offset_km, double sat_height_km);

UserDrop drop_users(const SystemConfig& cfg, std::uint64_t seed);

/// Tapered-aperture spot beam pattern, linear gain.
double beam_gain(double offset_angle, const SystemConfig& cfg);

/// Angle at the satellite between the boresight of a beam centred at `beam_km`
/// and the direction of a user at `user_km`.
double offset_angle(const Eigen::Vector2d& beam_km, const Eigen::Vector2d& user_km,
                    double sat_height_km);

/// [H]_nk = lambda sqrt(G_R G_nk) / (4 pi d_k sqrt(K_B T B)) e^{j phi_k}.
double channel_entry(double gain_nk, double distance_km, const SystemConfig& cfg);

ChannelMatrix build_channel(const UserDrop& drop, const SystemConfig& cfg, std::uint64_t seed);

/// Real and imaginary parts of the permittivity of water at f GHz.
std::pair<double, double> water_permittivity(double freq_ghz, double temp_k);

/// Cloud attenuation in dB on a slant path at the given elevation.
double cloud_attenuation_db(double freq_ghz, double w_red, double elevation_deg,
                            double temp_k);

/// Scales column k of H by sqrt(r_k / c_k) with lognormal rain r_k and cloud
/// loss c_k (converted from dB). Returns the input unchanged with unit factors
/// when cfg.atmospherics_enabled is false.
std::pair<ChannelMatrix, AtmosphereState> apply_atmosphere(const ChannelMatrix& ch,
                                                           const UserDrop& drop,
                                                           const SystemConfig& cfg,
                                                           std::uint64_t seed);

}  // namespace beamalloc
