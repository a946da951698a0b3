#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dfrc/types.hpp"

namespace dfrc {

/// Solver and extraction knobs shared by every design run.
struct SolverSettings {
  double sdp_tol = 1e-6;
  int sdp_max_iters = 20000;
  int random_draws = 200;
  int projection_passes = 20;
  double rank1_threshold = 0.99;
  /// Relative tightening of the PAPR caps inside the relaxation, so that
  /// extracted vectors stay feasible after exact power rescaling.
  double cap_margin = 1e-3;
  /// Largest lifted dimension (N_s*N_t*L + 1) accepted by the full-frame SDP.
  int full_sdp_cap = 256;
};

/// Scalar description of one DFRC MIMO-OFDM scenario.
///
/// Defaults follow the reference simulation table: 8 antennas, 16 subcarriers,
/// 4 channel taps with a 3-sample prefix, 2 users, 3 targets, frames of 128
/// symbols, 1 W budget, oversampling by 4.
struct SystemConfig {
  int n_tx = 8;
  int n_sub = 16;
  int n_cp = 3;
  int n_users = 2;
  int n_taps = 4;
  int frame_len = 128;
  double p_total = 1.0;
  /// Linear PAPR threshold; +inf disables the constraint.
  double papr_eps = db_to_linear(3.0);
  double rho = 0.5;
  int oversample = 4;
  double noise_var = 0.01;
  double radar_noise_var = 1.0;
  double snr_radar = db_to_linear(-4.0);
  double pfa = 1e-7;
  std::vector<double> target_angles{-kPi / 3.0, 0.0, kPi / 3.0};
  SolverSettings solver{};

  int n_total() const { return n_sub + n_cp; }
  int n_targets() const { return static_cast<int>(target_angles.size()); }
  double beta() const { return static_cast<double>(n_sub) / n_total(); }
  double p_sym() const { return beta() * p_total; }
  double p_cp() const { return p_total - p_sym(); }
  /// Per-sample peak power cap εP_t/(N N_t).
  double papr_rhs() const { return papr_eps * p_total / (n_total() * n_tx); }
  int block_dim() const { return n_sub * n_tx; }

  /// Every violated invariant, in a fixed order. Empty when valid.
  std::vector<std::string> violations() const;
  /// Throws ConfigError listing all violations.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses flat `key = value` text with `#` comments. Absent keys keep their
/// defaults; unknown or duplicate keys, malformed values and violated
/// invariants are all reported together in one ConfigError.
///
/// Units: angles in degrees (target_angles_deg, comma separated), PAPR and
/// SNRs in dB (papr_db accepts `inf`), powers in watts.
SystemConfig parse_config(const std::string& text);

/// Reads and parses a config file; an unreadable file is a ConfigError.
SystemConfig validate_config(const std::string& path);

/// Keys accepted by parse_config, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace dfrc
