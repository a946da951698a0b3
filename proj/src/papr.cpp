#include "dfrc/papr.hpp"

#include <algorithm>

namespace dfrc {

namespace {

double nyquist_average(const OfdmOperators& ops, const ComplexMatrix& g_cp) {
  const double denom = static_cast<double>(ops.n_total()) * ops.n_tx * g_cp.cols();
  const double avg = g_cp.squaredNorm() / denom;
  if (!(avg > 0.0)) throw std::domain_error("papr: zero waveform has undefined PAPR");
  return avg;
}

PaprReport make_report(double peak, double avg, PaprMode mode, int oversample) {
  PaprReport rep;
  rep.peak_power = peak;
  rep.avg_power = avg;
  rep.papr_linear = peak / avg;
  rep.papr_db = linear_to_db(rep.papr_linear);
  rep.mode = mode;
  rep.oversample = oversample;
  return rep;
}

}  // namespace

PaprReport papr_nyquist(const OfdmOperators& ops, const Waveform& xs) {
  const ComplexMatrix g_cp = add_cp(ops, as_post_idft(ops, xs));
  const double avg = nyquist_average(ops, g_cp);
  return make_report(g_cp.cwiseAbs2().maxCoeff(), avg, PaprMode::Nyquist, 1);
}

PaprReport papr_oversampled(const OfdmOperators& ops, const Waveform& xs) {
  const Waveform pre = as_pre_idft(ops, xs);
  const double avg = nyquist_average(ops, add_cp(ops, to_time_domain(ops, pre)));
  const double peak = oversample_time_domain(ops, pre).cwiseAbs2().maxCoeff();
  return make_report(peak, avg, PaprMode::Oversampled, ops.oversample);
}

std::vector<double> papr_ccdf(const std::vector<PaprReport>& samples, const std::vector<double>& thresholds_db) {
  std::vector<double> db;
  db.reserve(samples.size());
  for (const auto& s : samples) db.push_back(s.papr_db);
  return papr_ccdf(db, thresholds_db);
}

std::vector<double> papr_ccdf(const std::vector<double>& samples_db, const std::vector<double>& thresholds_db) {
  if (samples_db.empty()) throw std::invalid_argument("papr_ccdf: no samples");
  std::vector<double> sorted = samples_db;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(thresholds_db.size());
  for (double t : thresholds_db) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    out.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
  }
  return out;
}

}  // namespace dfrc
