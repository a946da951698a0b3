#pragma once

#include <vector>

#include "dfrc/ofdm.hpp"

namespace dfrc {

enum class PaprMode { Nyquist, Oversampled };

struct PaprReport {
  double papr_linear = 1.0;
  double papr_db = 0.0;
  double peak_power = 0.0;
  double avg_power = 0.0;
  PaprMode mode = PaprMode::Nyquist;
  int oversample = 1;
};

/// Peak over every CP-inclusive sample of Ġ divided by ‖Ġ‖²/(N N_t L).
PaprReport papr_nyquist(const OfdmOperators& ops, const Waveform& xs);

/// Peak over the oversampled frame D_os·X_s against the Nyquist-rate average.
PaprReport papr_oversampled(const OfdmOperators& ops, const Waveform& xs);

/// Fraction of samples whose PAPR strictly exceeds each threshold (dB).
std::vector<double> papr_ccdf(const std::vector<PaprReport>& samples, const std::vector<double>& thresholds_db);
std::vector<double> papr_ccdf(const std::vector<double>& samples_db, const std::vector<double>& thresholds_db);

}  // namespace dfrc
