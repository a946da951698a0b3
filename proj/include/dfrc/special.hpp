#pragma once

namespace dfrc {

/// Generalized Marcum Q-function of order one, Q₁(a, b).
///
/// Evaluated as the Poisson mixture Σ_k Pois(k; a²/2)·Q(k+1, b²/2), where
/// Q(k+1, x) is the regularized upper incomplete gamma function, i.e. the
/// Poisson(x) CDF at k. Only the Poisson(a²/2) bulk (±12σ) is summed, so the
/// absolute truncation error stays far below 1e-12. Throws on NaN or negative
/// arguments.
double marcum_q1(double a, double b);

/// Threshold ζ of a 2-DoF chi-squared test with false-alarm rate pfa: −2 ln(pfa).
double chi2_2dof_threshold(double pfa);

/// CDF of the 2-DoF noncentral chi-squared distribution with noncentrality μ.
double noncentral_chi2_2dof_cdf(double x, double mu);

}  // namespace dfrc
