#include "dfrc/channel.hpp"

#include <array>

namespace dfrc {

ChannelRealization channel_from_taps(std::vector<ComplexMatrix> taps, int n_sub) {
  require_dims(!taps.empty(), "channel_from_taps: at least one tap required");
  const auto k_users = taps.front().rows();
  const auto n_tx = taps.front().cols();
  for (const auto& t : taps) require_dims(t.rows() == k_users && t.cols() == n_tx, "channel_from_taps: tap shape mismatch");

  ChannelRealization ch;
  ch.taps = std::move(taps);
  ch.h_sub.reserve(n_sub);
  ch.h_s = ComplexMatrix::Zero(n_sub * k_users, n_sub * n_tx);
  for (int n = 0; n < n_sub; ++n) {
    ComplexMatrix hn = ComplexMatrix::Zero(k_users, n_tx);
    for (int u = 0; u < static_cast<int>(ch.taps.size()); ++u) {
      const auto k = static_cast<long long>(u) * n % n_sub;
      hn += std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / n_sub) * ch.taps[u];
    }
    ch.h_s.block(n * k_users, n * n_tx, k_users, n_tx) = hn;
    ch.h_sub.push_back(std::move(hn));
  }
  const ComplexMatrix d = kron(dft_matrix(n_sub).adjoint(), ComplexMatrix::Identity(n_tx, n_tx));
  ch.h_d = ch.h_s * d.adjoint();
  return ch;
}

ChannelRealization sample_channel(const SystemConfig& cfg, Rng& rng) {
  if (cfg.n_taps < 1) throw std::invalid_argument("sample_channel: n_taps must be >= 1");
  const double var = 1.0 / cfg.n_taps;
  std::vector<ComplexMatrix> taps;
  taps.reserve(cfg.n_taps);
  for (int u = 0; u < cfg.n_taps; ++u) {
    ComplexMatrix t(cfg.n_users, cfg.n_tx);
    for (int k = 0; k < cfg.n_users; ++k)
      for (int a = 0; a < cfg.n_tx; ++a) t(k, a) = rng.complex_normal(var);
    taps.push_back(std::move(t));
  }
  return channel_from_taps(std::move(taps), cfg.n_sub);
}

const std::array<cdouble, 4>& qpsk_points() {
  static const double s = 1.0 / std::sqrt(2.0);
  static const std::array<cdouble, 4> pts{cdouble{s, s}, cdouble{-s, s}, cdouble{-s, -s}, cdouble{s, -s}};
  return pts;
}

SymbolMatrix sample_symbols(const SystemConfig& cfg, Rng& rng) {
  return sample_symbols(cfg.n_sub, cfg.n_users, cfg.frame_len, rng);
}

SymbolMatrix sample_symbols(int n_sub, int n_users, int frame_len, Rng& rng) {
  SymbolMatrix s;
  s.data.resize(n_sub * n_users, frame_len);
  const auto& pts = qpsk_points();
  for (Eigen::Index c = 0; c < s.data.cols(); ++c)
    for (Eigen::Index r = 0; r < s.data.rows(); ++r) s.data(r, c) = pts[rng.uniform_int(0, 3)];
  return s;
}

ComplexMatrix receive_freq(const ChannelRealization& ch, const Waveform& xs) {
  require_dims(xs.view == WaveformView::PreIdft, "receive_freq: expected a pre-IDFT waveform");
  require_dims(xs.data.rows() == ch.h_s.cols(), "receive_freq: waveform rows must equal N_s*N_t");
  return ch.h_s * xs.data;
}

ComplexMatrix receive_freq(const ChannelRealization& ch, const Waveform& xs, double noise_var, Rng& rng) {
  if (noise_var < 0.0) throw std::invalid_argument("receive_freq: negative noise variance");
  ComplexMatrix y = receive_freq(ch, xs);
  if (noise_var > 0.0)
    for (Eigen::Index c = 0; c < y.cols(); ++c)
      for (Eigen::Index r = 0; r < y.rows(); ++r) y(r, c) += rng.complex_normal(noise_var);
  return y;
}

ComplexMatrix effective_time_channel(const ChannelRealization& ch, int user, int n_cp) {
  const int n_sub = ch.n_sub();
  const int n_tx = ch.n_tx();
  const int n_total = n_sub + n_cp;

  // Linear convolution over the prefixed block: r(t) = Σ_u h_u ġ(t - u).
  ComplexMatrix conv = ComplexMatrix::Zero(n_sub, n_total * n_tx);
  for (int t = 0; t < n_sub; ++t) {
    const int t_rx = n_cp + t;  // prefix samples are discarded at the receiver
    for (int u = 0; u < ch.n_taps(); ++u) {
      const int src = t_rx - u;
      if (src < 0) continue;  // sample belongs to the previous (zero) block
      conv.block(t, src * n_tx, 1, n_tx) += ch.taps[u].row(user);
    }
  }
  // Prefix insertion as a selection matrix from N_sN_t to NN_t rows.
  RealMatrix insert = RealMatrix::Zero(n_total * n_tx, n_sub * n_tx);
  for (int i = 0; i < n_cp * n_tx; ++i) insert(i, (n_sub - n_cp) * n_tx + i) = 1.0;
  for (int i = 0; i < n_sub * n_tx; ++i) insert(n_cp * n_tx + i, i) = 1.0;
  return conv * insert.cast<cdouble>();
}

ComplexMatrix receive_time_oracle(const ChannelRealization& ch, const OfdmOperators& ops, const Waveform& xs) {
  require_dims(xs.view == WaveformView::PreIdft, "receive_time_oracle: expected a pre-IDFT waveform");
  require_dims(xs.data.rows() == ops.dim() && ch.n_tx() == ops.n_tx && ch.n_sub() == ops.n_sub,
               "receive_time_oracle: operator/channel dimension mismatch");
  const int k_users = ch.n_users();
  const ComplexMatrix g = ops.d * xs.data;
  ComplexMatrix y(ops.n_sub * k_users, xs.data.cols());
  for (int k = 0; k < k_users; ++k) {
    const ComplexMatrix yk = ops.f_s * (effective_time_channel(ch, k, ops.n_cp) * g);
    for (int n = 0; n < ops.n_sub; ++n) y.row(n * k_users + k) = yk.row(n);
  }
  return y;
}

}  // namespace dfrc
