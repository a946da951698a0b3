#include "dfrc/special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfrc {

namespace {

double log_poisson_pmf(long k, double mean) {
  if (mean == 0.0) return k == 0 ? 0.0 : -INFINITY;
  return static_cast<double>(k) * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0);
}

}  // namespace

double marcum_q1(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("marcum_q1: NaN argument");
  if (a < 0.0 || b < 0.0 || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("marcum_q1: arguments must be finite and non-negative");
  if (b == 0.0) return 1.0;

  const double lambda = 0.5 * a * a;
  const double x = 0.5 * b * b;
  const double spread = 12.0 * std::sqrt(lambda) + 20.0;
  const long k_lo = std::max(0L, static_cast<long>(std::floor(lambda - spread)));
  const long k_hi = static_cast<long>(std::ceil(lambda + spread));

  // Poisson(x) CDF up to k_lo, accumulated term by term.
  double cdf = 0.0;
  for (long i = 0; i <= k_lo; ++i) cdf += std::exp(log_poisson_pmf(i, x));

  double q = 0.0;
  for (long k = k_lo; k <= k_hi; ++k) {
    if (k > k_lo) cdf += std::exp(log_poisson_pmf(k, x));
    q += std::exp(log_poisson_pmf(k, lambda)) * std::min(cdf, 1.0);
  }
  return std::clamp(q, 0.0, 1.0);
}

double chi2_2dof_threshold(double pfa) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("chi2_2dof_threshold: pfa must lie in (0, 1)");
  return -2.0 * std::log(pfa);
}

double noncentral_chi2_2dof_cdf(double x, double mu) {
  if (x <= 0.0) return 0.0;
  return 1.0 - marcum_q1(std::sqrt(mu), std::sqrt(x));
}

}  // namespace dfrc
