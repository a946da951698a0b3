#pragma once

#include "dfrc/channel.hpp"
#include "dfrc/metrics_radar.hpp"

namespace dfrc {

/// Single-carrier radar covariance template R_d.
struct CovarianceTemplate {
  ComplexMatrix r_d;
  double loading = 0.0;
};

/// R_d = c·(Σ_m a(θ_m)a^H(θ_m) + δI), δ = 0.01·N_t/M, scaled to tr(R_d) = P_t^s/N_s.
CovarianceTemplate build_rd(const SystemConfig& cfg);
CovarianceTemplate build_rd(int n_tx, const std::vector<double>& angles, double trace, double loading);

struct DirectionalResult {
  Waveform g0;                   ///< post-IDFT radar benchmark
  double covariance_error = 0.0;  ///< max |(1/L)G₀G₀^H − I⊗R_d|
  bool full_rank = true;          ///< L ≥ N_sN_t, covariance met exactly
};

/// Radar-only benchmark minimizing ‖H_D G − S‖ subject to (1/L)GG^H = I⊗R_d.
///
/// With Cholesky I⊗R_d = ΦΦ^H and the SVD Φ^H H_D^H S = UΣV^H the optimum is
/// G₀ = √L·Φ·U·I_{N_sN_t×L}·V^H. When L < N_sN_t the covariance constraint
/// cannot hold; the truncated product is returned, rescaled so that
/// ‖G₀‖² = tr(I⊗R_d)·L, and the residual is reported.
DirectionalResult directional_benchmark(const ChannelRealization& ch, const OfdmOperators& ops,
                                        const SymbolMatrix& s, const CovarianceTemplate& tmpl);
Waveform directional_waveform(const ChannelRealization& ch, const OfdmOperators& ops, const SymbolMatrix& s,
                              const CovarianceTemplate& tmpl);

struct ZfResult {
  Waveform xs;         ///< pre-IDFT, already scaled
  double scale = 1.0;  ///< H_s·xs = scale·S
};

/// Per-subcarrier zero forcing X_n = H_n^H(H_nH_n^H)^{-1}S_n with one global
/// scale so the prefixed frame uses exactly L·P_t.
ZfResult zf_waveform(const ChannelRealization& ch, const OfdmOperators& ops, const SymbolMatrix& s,
                     const SystemConfig& cfg);

class RankDeficientChannel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dfrc
