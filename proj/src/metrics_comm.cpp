#include "dfrc/metrics_comm.hpp"

namespace dfrc {

namespace {

void check_shapes(const ChannelRealization& ch, const Waveform& xs, const SymbolMatrix& s) {
  require_dims(xs.view == WaveformView::PreIdft, "comm metrics: expected a pre-IDFT waveform");
  require_dims(xs.data.rows() == ch.h_s.cols(), "comm metrics: waveform rows must equal N_s*N_t");
  require_dims(s.data.rows() == ch.h_s.rows() && s.data.cols() == xs.data.cols(),
               "comm metrics: symbol matrix shape mismatch");
}

}  // namespace

double mui_energy(const ChannelRealization& ch, const Waveform& xs, const SymbolMatrix& s) {
  check_shapes(ch, xs, s);
  return (ch.h_s * xs.data - s.data).squaredNorm();
}

CommReport sinr_and_rate(const ChannelRealization& ch, const Waveform& xs, const SymbolMatrix& s, double noise_var) {
  check_shapes(ch, xs, s);
  if (!(noise_var > 0.0)) throw std::invalid_argument("sinr_and_rate: noise variance must be positive");
  const int k_users = ch.n_users();
  const int n_sub = ch.n_sub();
  const double frame = static_cast<double>(s.data.cols());

  const ComplexMatrix residual = ch.h_s * xs.data - s.data;
  CommReport rep;
  rep.mui = residual.squaredNorm();
  rep.sinr.resize(k_users, n_sub);
  rep.sum_rate_per_sub.resize(n_sub);
  for (int n = 0; n < n_sub; ++n) {
    double rate = 0.0;
    for (int k = 0; k < k_users; ++k) {
      const auto row = n * k_users + k;
      const double signal = s.data.row(row).squaredNorm() / frame;
      const double interference = residual.row(row).squaredNorm() / frame;
      const double sinr = signal / (interference + noise_var);
      rep.sinr(k, n) = sinr;
      rate += std::log2(1.0 + sinr);
    }
    rep.sum_rate_per_sub(n) = rate;
  }
  rep.avg_rate = rep.sum_rate_per_sub.mean();
  return rep;
}

int qpsk_detect(cdouble y) {
  // Quadrant decision is the nearest-point rule for the square QPSK alphabet.
  if (y.real() >= 0.0) return y.imag() >= 0.0 ? 0 : 3;
  return y.imag() >= 0.0 ? 1 : 2;
}

double ser_montecarlo(const ChannelRealization& ch, const Waveform& xs, const SymbolMatrix& s, double noise_var,
                      int trials, Rng& rng) {
  check_shapes(ch, xs, s);
  if (trials < 1) throw std::invalid_argument("ser_montecarlo: trials must be >= 1");
  if (noise_var < 0.0) throw std::invalid_argument("ser_montecarlo: negative noise variance");
  const ComplexMatrix clean = ch.h_s * xs.data;
  std::vector<int> intended(static_cast<std::size_t>(s.data.size()));
  for (Eigen::Index i = 0; i < s.data.size(); ++i) intended[i] = qpsk_detect(s.data(i));

  long long errors = 0;
  for (int t = 0; t < trials; ++t)
    for (Eigen::Index i = 0; i < clean.size(); ++i) {
      const cdouble y = clean(i) + (noise_var > 0.0 ? rng.complex_normal(noise_var) : cdouble{});
      errors += qpsk_detect(y) != intended[i];
    }
  return static_cast<double>(errors) / (static_cast<double>(trials) * static_cast<double>(clean.size()));
}

}  // namespace dfrc
