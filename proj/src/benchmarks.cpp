#include "dfrc/benchmarks.hpp"

namespace dfrc {

CovarianceTemplate build_rd(const SystemConfig& cfg) {
  const double loading = 0.01 * cfg.n_tx / std::max(1, cfg.n_targets());
  return build_rd(cfg.n_tx, cfg.target_angles, cfg.p_sym() / cfg.n_sub, loading);
}

CovarianceTemplate build_rd(int n_tx, const std::vector<double>& angles, double trace, double loading) {
  if (angles.empty()) throw std::invalid_argument("build_rd: at least one target angle required");
  ComplexMatrix r = loading * ComplexMatrix::Identity(n_tx, n_tx);
  for (double th : angles) {
    const ComplexVector a = steering(n_tx, th);
    r += a * a.adjoint();
  }
  r *= trace / r.trace().real();
  return {r, loading};
}

DirectionalResult directional_benchmark(const ChannelRealization& ch, const OfdmOperators& ops,
                                        const SymbolMatrix& s, const CovarianceTemplate& tmpl) {
  require_dims(tmpl.r_d.rows() == ops.n_tx && tmpl.r_d.cols() == ops.n_tx, "directional_waveform: template size");
  require_dims(s.data.rows() == ch.h_d.rows() && ch.h_d.cols() == ops.dim(), "directional_waveform: shape mismatch");
  Eigen::LLT<ComplexMatrix> llt(tmpl.r_d);
  if (llt.info() != Eigen::Success) throw std::runtime_error("directional_waveform: covariance template is not positive definite");
  const ComplexMatrix phi_block = llt.matrixL();
  const ComplexMatrix phi = kron(ComplexMatrix::Identity(ops.n_sub, ops.n_sub), phi_block);

  const auto frame = s.data.cols();
  const auto dim = static_cast<Eigen::Index>(ops.dim());
  const ComplexMatrix m = phi.adjoint() * ch.h_d.adjoint() * s.data;
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto r = std::min(dim, frame);
  ComplexMatrix g = std::sqrt(static_cast<double>(frame)) * phi * svd.matrixU().leftCols(r) *
                    svd.matrixV().leftCols(r).adjoint();

  DirectionalResult out;
  out.full_rank = frame >= dim;
  if (!out.full_rank) {
    const double target = static_cast<double>(frame) * ops.n_sub * tmpl.r_d.trace().real();
    g *= std::sqrt(target / g.squaredNorm());
  }
  const ComplexMatrix cov = g * g.adjoint() / static_cast<double>(frame);
  out.covariance_error = (cov - phi * phi.adjoint()).cwiseAbs().maxCoeff();
  out.g0 = Waveform::post_idft(std::move(g));
  return out;
}

Waveform directional_waveform(const ChannelRealization& ch, const OfdmOperators& ops, const SymbolMatrix& s,
                              const CovarianceTemplate& tmpl) {
  return directional_benchmark(ch, ops, s, tmpl).g0;
}

ZfResult zf_waveform(const ChannelRealization& ch, const OfdmOperators& ops, const SymbolMatrix& s,
                     const SystemConfig& cfg) {
  const int k_users = ch.n_users();
  const int n_tx = ch.n_tx();
  if (k_users > n_tx) throw RankDeficientChannel("zf_waveform: more users than transmit antennas");
  require_dims(s.data.rows() == ch.h_s.rows(), "zf_waveform: symbol rows must equal N_s*K");

  ComplexMatrix x(ops.dim(), s.data.cols());
  for (int n = 0; n < ch.n_sub(); ++n) {
    const ComplexMatrix& h = ch.h_sub[n];
    const ComplexMatrix gram = h * h.adjoint();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, lmax)))
      throw RankDeficientChannel("zf_waveform: subcarrier channel is rank deficient");
    x.middleRows(n * n_tx, n_tx) = h.adjoint() * gram.ldlt().solve(s.data.middleRows(n * k_users, k_users));
  }

  const ComplexMatrix g = ops.d * x;
  const double cp_power = (ops.gamma_c.cast<cdouble>() * g).squaredNorm();
  const double total = g.squaredNorm() + cp_power;
  const double scale = std::sqrt(static_cast<double>(s.data.cols()) * cfg.p_total / total);
  return {Waveform::pre_idft(scale * x), scale};
}

}  // namespace dfrc
