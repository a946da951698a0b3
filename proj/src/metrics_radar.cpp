#include "dfrc/metrics_radar.hpp"

#include "dfrc/special.hpp"

namespace dfrc {

std::vector<double> angle_grid(int points) {
  if (points < 2) throw std::invalid_argument("angle_grid: need at least two points");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = -kPi / 2.0 + kPi * i / (points - 1);
  return grid;
}

std::vector<ComplexMatrix> subcarrier_covariances(const Waveform& g, int n_tx) {
  require_dims(g.view == WaveformView::PostIdft, "subcarrier_covariances: expected a post-IDFT waveform");
  require_dims(n_tx > 0 && g.data.rows() % n_tx == 0, "subcarrier_covariances: rows must be a multiple of N_t");
  require_dims(g.data.cols() >= 1, "subcarrier_covariances: empty frame");
  const auto n_sub = g.data.rows() / n_tx;
  const double inv_l = 1.0 / static_cast<double>(g.data.cols());
  std::vector<ComplexMatrix> cov;
  cov.reserve(n_sub);
  for (Eigen::Index n = 0; n < n_sub; ++n) {
    const auto blk = g.data.middleRows(n * n_tx, n_tx);
    cov.emplace_back(inv_l * (blk * blk.adjoint()));
  }
  return cov;
}

RealVector beampattern(const SystemConfig& cfg, const Waveform& g, const std::vector<double>& grid) {
  return beampattern(cfg.n_tx, g, grid);
}

RealVector beampattern(int n_tx, const Waveform& g, const std::vector<double>& grid) {
  const auto cov = subcarrier_covariances(g, n_tx);
  ComplexMatrix mean_cov = ComplexMatrix::Zero(n_tx, n_tx);
  for (const auto& r : cov) mean_cov += r;
  mean_cov /= static_cast<double>(cov.size());
  RealVector out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ComplexVector a = steering(n_tx, grid[i]);
    out(static_cast<Eigen::Index>(i)) = std::max(0.0, (a.adjoint() * mean_cov * a)(0, 0).real());
  }
  return out;
}

double detection_noncentrality(int n_tx, double snr_radar, const Waveform& g, double theta) {
  const auto cov = subcarrier_covariances(g, n_tx);
  const ComplexVector a = steering(n_tx, theta);
  // tr(a a^T R a* a^H) = ‖a‖² · a^T R a*, summed over the block diagonal.
  double tr = 0.0;
  for (const auto& r : cov) tr += (a.transpose() * r * a.conjugate())(0, 0).real();
  tr *= a.squaredNorm();
  return snr_radar * std::max(0.0, tr);
}

double detection_probability(double mu, double pfa) {
  const double zeta = chi2_2dof_threshold(pfa);
  return marcum_q1(std::sqrt(std::max(0.0, mu)), std::sqrt(zeta));
}

double detection_probability(const SystemConfig& cfg, const Waveform& g, double theta) {
  if (!(cfg.pfa > 0.0 && cfg.pfa < 1.0)) throw std::invalid_argument("detection_probability: pfa must lie in (0, 1)");
  if (!(cfg.snr_radar > 0.0)) throw std::invalid_argument("detection_probability: snr_radar must be positive");
  return detection_probability(detection_noncentrality(cfg.n_tx, cfg.snr_radar, g, theta), cfg.pfa);
}

RadarReport radar_report(const SystemConfig& cfg, const Waveform& g, const std::vector<double>& grid) {
  RadarReport rep;
  rep.angles = grid;
  rep.beampattern = beampattern(cfg, g, grid);
  rep.cov_per_sub = subcarrier_covariances(g, cfg.n_tx);
  rep.cov_full = (g.data * g.data.adjoint()) / static_cast<double>(g.data.cols());
  rep.pd_per_target.resize(cfg.n_targets());
  for (int m = 0; m < cfg.n_targets(); ++m) rep.pd_per_target(m) = detection_probability(cfg, g, cfg.target_angles[m]);
  rep.pd_avg = rep.pd_per_target.size() ? rep.pd_per_target.mean() : 0.0;
  return rep;
}

}  // namespace dfrc
