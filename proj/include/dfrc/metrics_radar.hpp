#pragma once

#include <vector>

#include "dfrc/config.hpp"
#include "dfrc/ofdm.hpp"

namespace dfrc {

/// ULA steering vector centred on the array midpoint:
/// a_i(θ) = exp(j(2i − N_t + 1)·π/2·sinθ), i = 0..N_t−1.
template <typename Scalar = double>
CVector<Scalar> steering(int n_tx, Scalar theta) {
  CVector<Scalar> a(n_tx);
  const Scalar s = std::sin(theta);
  for (int i = 0; i < n_tx; ++i) {
    const Scalar k = static_cast<Scalar>(2 * i - n_tx + 1) / Scalar(2);
    a(i) = std::polar(Scalar(1), k * Scalar(kPi) * s);
  }
  return a;
}

struct RadarReport {
  std::vector<double> angles;
  RealVector beampattern;
  std::vector<ComplexMatrix> cov_per_sub;  ///< R_{G,n}, N_t × N_t
  ComplexMatrix cov_full;                  ///< (1/L)GG^H
  RealVector pd_per_target;
  double pd_avg = 0.0;
};

/// Uniform grid of `points` angles over [−π/2, π/2].
std::vector<double> angle_grid(int points = 721);

/// R_{G,n} = (1/L) G_n G_n^H for every subcarrier block n.
std::vector<ComplexMatrix> subcarrier_covariances(const Waveform& g, int n_tx);

/// B(θ) = (1/N_s) Σ_n a^H(θ) R_{G,n} a(θ).
RealVector beampattern(const SystemConfig& cfg, const Waveform& g, const std::vector<double>& grid);
RealVector beampattern(int n_tx, const Waveform& g, const std::vector<double>& grid);

/// Noncentrality μ = SNR_R·tr(Υ(θ) R_G Υ^H(θ)) with Υ(θ) = I ⊗ a(θ)a^T(θ).
double detection_noncentrality(int n_tx, double snr_radar, const Waveform& g, double theta);

/// P_D = 1 − F_{χ²₂(μ)}(ζ) = Q₁(√μ, √ζ), ζ = −2 ln P_f.
double detection_probability(const SystemConfig& cfg, const Waveform& g, double theta);
double detection_probability(double mu, double pfa);

RadarReport radar_report(const SystemConfig& cfg, const Waveform& g, const std::vector<double>& grid);

}  // namespace dfrc
