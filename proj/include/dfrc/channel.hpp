#pragma once

#include <array>
#include <vector>

#include "dfrc/config.hpp"
#include "dfrc/ofdm.hpp"
#include "dfrc/rng.hpp"

namespace dfrc {

/// Multi-tap downlink channel and its frequency-domain views.
struct ChannelRealization {
  std::vector<ComplexMatrix> taps;   ///< U matrices H̃_u, each K × N_t
  std::vector<ComplexMatrix> h_sub;  ///< N_s matrices H_n, each K × N_t
  ComplexMatrix h_s;                 ///< blockdiag(H_1..H_Ns), N_sK × N_sN_t
  ComplexMatrix h_d;                 ///< H_s·D^H

  int n_users() const { return static_cast<int>(taps.front().rows()); }
  int n_tx() const { return static_cast<int>(taps.front().cols()); }
  int n_taps() const { return static_cast<int>(taps.size()); }
  int n_sub() const { return static_cast<int>(h_sub.size()); }
};

/// Derives H_n = Σ_u H̃_u e^{-j2πun/N_s}, the block-diagonal H_s and H_D.
ChannelRealization channel_from_taps(std::vector<ComplexMatrix> taps, int n_sub);

/// I.i.d. Rayleigh taps with per-entry variance 1/U.
ChannelRealization sample_channel(const SystemConfig& cfg, Rng& rng);

enum class Constellation { Qpsk };

/// N_sK × L unit-power symbols; row (n·K + k) is user k on subcarrier n.
struct SymbolMatrix {
  ComplexMatrix data;
  Constellation constellation = Constellation::Qpsk;
};

SymbolMatrix sample_symbols(const SystemConfig& cfg, Rng& rng);
SymbolMatrix sample_symbols(int n_sub, int n_users, int frame_len, Rng& rng);

/// The four unit-power QPSK points (±1±j)/√2.
const std::array<cdouble, 4>& qpsk_points();

/// Y_s = H_s X_s + Z_s with Z_s ~ CN(0, σ²).
ComplexMatrix receive_freq(const ChannelRealization& ch, const Waveform& xs, double noise_var, Rng& rng);
/// Noiseless H_s X_s.
ComplexMatrix receive_freq(const ChannelRealization& ch, const Waveform& xs);

/// Block-circulant channel of one user, N_s × N_sN_t, obtained by linear
/// convolution of the prefixed time-domain block and prefix removal. It is
/// circulant only when the prefix covers the channel memory.
ComplexMatrix effective_time_channel(const ChannelRealization& ch, int user, int n_cp);

/// Time-domain route: IDFT, prefix insertion, tap convolution, prefix removal
/// and DFT, stacked in the same layout as receive_freq.
ComplexMatrix receive_time_oracle(const ChannelRealization& ch, const OfdmOperators& ops, const Waveform& xs);

}  // namespace dfrc
