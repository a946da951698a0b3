#pragma once

#include "dfrc/config.hpp"
#include "dfrc/types.hpp"

namespace dfrc {

/// Normalized n-point DFT matrix, F(n,m) = exp(-j2π nm/N)/√N.
template <typename Scalar = double>
CMatrix<Scalar> dft_matrix(int n) {
  CMatrix<Scalar> f(n, n);
  const Scalar norm = Scalar(1) / std::sqrt(static_cast<Scalar>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      // Reduce the exponent modulo n first so large products keep full precision.
      const auto k = static_cast<long long>(r) * c % n;
      const Scalar phase = -Scalar(2) * Scalar(kPi) * static_cast<Scalar>(k) / static_cast<Scalar>(n);
      f(r, c) = std::polar(norm, phase);
    }
  return f;
}

/// Interpolating DFT of size N_s × ΥN_s.
///
/// Row n maps subcarrier n onto oversampled frequency bin k_n: the lower half of
/// the band keeps k_n = n, the upper half is shifted to ΥN_s − N_s + n, which is
/// equivalent to zero-padding the middle of the spectrum. Entries have magnitude
/// 1/√N_s so that every Υ-th oversampled sample equals a Nyquist-rate sample.
template <typename Scalar = double>
CMatrix<Scalar> oversampling_dft_matrix(int n_sub, int oversample) {
  const int m_total = oversample * n_sub;
  CMatrix<Scalar> f(n_sub, m_total);
  const Scalar norm = Scalar(1) / std::sqrt(static_cast<Scalar>(n_sub));
  for (int n = 0; n < n_sub; ++n) {
    const long long bin = n < n_sub / 2 ? n : m_total - n_sub + n;
    for (int m = 0; m < m_total; ++m) {
      const auto k = bin * m % m_total;
      const Scalar phase =
          -Scalar(2) * Scalar(kPi) * static_cast<Scalar>(k) / static_cast<Scalar>(m_total);
      f(n, m) = std::polar(norm, phase);
    }
  }
  return f;
}

/// Deterministic operator matrices of one scenario. Immutable once built.
struct OfdmOperators {
  int n_tx = 0;
  int n_sub = 0;
  int n_cp = 0;
  int oversample = 1;

  ComplexMatrix f_s;         ///< N_s × N_s
  ComplexMatrix f_c;         ///< N_s × N_c, last N_c columns of f_s
  ComplexMatrix f_dot;       ///< N_s × N, [f_c, f_s]
  ComplexMatrix f_os_tilde;  ///< N_s × ΥN_s interpolating DFT
  ComplexMatrix d;           ///< F_s^H ⊗ I
  ComplexMatrix d_os;        ///< F̃_os^H ⊗ I, ΥN_sN_t × N_sN_t
  RealMatrix gamma_c;        ///< 0/1 diagonal selector of the prefix blocks
  ComplexMatrix theta;       ///< d_os · d^H

  int dim() const { return n_sub * n_tx; }
  int n_total() const { return n_sub + n_cp; }
  /// Flags of the rows of G that are copied into the cyclic prefix.
  Eigen::Array<bool, Eigen::Dynamic, 1> cp_mask() const;
};

OfdmOperators build_operators(const SystemConfig& cfg);
OfdmOperators build_operators(int n_tx, int n_sub, int n_cp, int oversample);

enum class WaveformView { PreIdft, PostIdft };

/// N_sN_t × L frame, either the precoded symbols X_s or the time-domain G.
struct Waveform {
  ComplexMatrix data;
  WaveformView view = WaveformView::PreIdft;

  static Waveform pre_idft(ComplexMatrix x) { return {std::move(x), WaveformView::PreIdft}; }
  static Waveform post_idft(ComplexMatrix g) { return {std::move(g), WaveformView::PostIdft}; }
  Eigen::Index frame_len() const { return data.cols(); }
};

/// G = D·X_s.
Waveform to_time_domain(const OfdmOperators& ops, const Waveform& xs);
/// X_s = D^H·G.
Waveform to_freq_domain(const OfdmOperators& ops, const Waveform& g);
/// Returns the view requested regardless of the input view.
Waveform as_pre_idft(const OfdmOperators& ops, const Waveform& w);
Waveform as_post_idft(const OfdmOperators& ops, const Waveform& w);

/// Prefix insertion: [last N_c blocks of G; G], NN_t × L.
ComplexMatrix add_cp(const OfdmOperators& ops, const Waveform& g);

/// D_os·X_s, the ΥN_sN_t × L oversampled time-domain frame.
ComplexMatrix oversample_time_domain(const OfdmOperators& ops, const Waveform& xs);

}  // namespace dfrc
