#include "dfrc/ofdm.hpp"

namespace dfrc {

OfdmOperators build_operators(const SystemConfig& cfg) {
  return build_operators(cfg.n_tx, cfg.n_sub, cfg.n_cp, cfg.oversample);
}

OfdmOperators build_operators(int n_tx, int n_sub, int n_cp, int oversample) {
  if (n_sub < 2 || n_sub % 2 != 0)
    throw std::invalid_argument("build_operators: n_sub must be even and >= 2");
  if (n_cp < 0 || 2 * n_cp > n_sub) throw std::invalid_argument("build_operators: n_cp exceeds n_sub/2");
  if (n_tx < 1 || oversample < 1) throw std::invalid_argument("build_operators: n_tx and oversample must be >= 1");

  OfdmOperators ops;
  ops.n_tx = n_tx;
  ops.n_sub = n_sub;
  ops.n_cp = n_cp;
  ops.oversample = oversample;

  ops.f_s = dft_matrix(n_sub);
  ops.f_c = ops.f_s.rightCols(n_cp);
  ops.f_dot.resize(n_sub, n_sub + n_cp);
  ops.f_dot << ops.f_c, ops.f_s;
  ops.f_os_tilde = oversampling_dft_matrix(n_sub, oversample);

  const ComplexMatrix eye = ComplexMatrix::Identity(n_tx, n_tx);
  ops.d = kron(ops.f_s.adjoint(), eye);
  ops.d_os = kron(ops.f_os_tilde.adjoint(), eye);

  const int dim = n_sub * n_tx;
  ops.gamma_c = RealMatrix::Zero(dim, dim);
  for (int i = (n_sub - n_cp) * n_tx; i < dim; ++i) ops.gamma_c(i, i) = 1.0;

  ops.theta = ops.d_os * ops.d.adjoint();
  return ops;
}

Eigen::Array<bool, Eigen::Dynamic, 1> OfdmOperators::cp_mask() const {
  Eigen::Array<bool, Eigen::Dynamic, 1> mask(dim());
  for (int i = 0; i < dim(); ++i) mask(i) = i >= (n_sub - n_cp) * n_tx;
  return mask;
}

Waveform to_time_domain(const OfdmOperators& ops, const Waveform& xs) {
  require_dims(xs.view == WaveformView::PreIdft, "to_time_domain: expected a pre-IDFT waveform");
  require_dims(xs.data.rows() == ops.dim(), "to_time_domain: row count must be N_s*N_t");
  return Waveform::post_idft(ops.d * xs.data);
}

Waveform to_freq_domain(const OfdmOperators& ops, const Waveform& g) {
  require_dims(g.view == WaveformView::PostIdft, "to_freq_domain: expected a post-IDFT waveform");
  require_dims(g.data.rows() == ops.dim(), "to_freq_domain: row count must be N_s*N_t");
  return Waveform::pre_idft(ops.d.adjoint() * g.data);
}

Waveform as_pre_idft(const OfdmOperators& ops, const Waveform& w) {
  return w.view == WaveformView::PreIdft ? w : to_freq_domain(ops, w);
}

Waveform as_post_idft(const OfdmOperators& ops, const Waveform& w) {
  return w.view == WaveformView::PostIdft ? w : to_time_domain(ops, w);
}

ComplexMatrix add_cp(const OfdmOperators& ops, const Waveform& g) {
  require_dims(g.view == WaveformView::PostIdft, "add_cp: expected a post-IDFT waveform");
  require_dims(g.data.rows() == ops.dim(), "add_cp: row count must be N_s*N_t");
  const Eigen::Index cp_rows = static_cast<Eigen::Index>(ops.n_cp) * ops.n_tx;
  ComplexMatrix out(cp_rows + g.data.rows(), g.data.cols());
  out << g.data.bottomRows(cp_rows), g.data;
  return out;
}

ComplexMatrix oversample_time_domain(const OfdmOperators& ops, const Waveform& xs) {
  require_dims(xs.view == WaveformView::PreIdft, "oversample_time_domain: expected a pre-IDFT waveform");
  require_dims(xs.data.rows() == ops.dim(), "oversample_time_domain: row count must be N_s*N_t");
  return ops.d_os * xs.data;
}

}  // namespace dfrc
