#pragma once

#include "dfrc/channel.hpp"

namespace dfrc {

struct CommReport {
  double mui = 0.0;
  RealMatrix sinr;             ///< K × N_s
  RealVector sum_rate_per_sub;  ///< N_s
  double avg_rate = 0.0;       ///< bits/s/Hz
  double ser = 0.0;
};

/// ‖H_s X_s − S‖_F².
double mui_energy(const ChannelRealization& ch, const Waveform& xs, const SymbolMatrix& s);

/// Per-user, per-subcarrier SINR with expectations replaced by means over the
/// frame, plus per-subcarrier sum rates and their average. `ser` is left at 0.
CommReport sinr_and_rate(const ChannelRealization& ch, const Waveform& xs, const SymbolMatrix& s, double noise_var);

/// Nearest-point QPSK detection of each noisy received entry against the
/// intended symbol, averaged over all entries and `trials` noise draws.
double ser_montecarlo(const ChannelRealization& ch, const Waveform& xs, const SymbolMatrix& s, double noise_var,
                      int trials, Rng& rng);

/// Index of the QPSK point nearest to y.
int qpsk_detect(cdouble y);

}  // namespace dfrc
