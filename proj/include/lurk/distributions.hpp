#pragma once

#include <utility>

namespace lurk {

/// log Gamma(x) for x > 0, safe for concurrent use.
double log_gamma(double x);

/// Regularized incomplete beta I_x(a, b). Throws DomainError for x outside
/// [0, 1] or non-positive shape parameters; NoConvergence if the continued
/// fraction fails to settle within its iteration cap.
double reg_inc_beta(double a, double b, double x);

/// 1 - I_x(a, b) = I_{1-x}(b, a), without cancellation.
double reg_inc_beta_upper(double a, double b, double x);

/// Central F distribution with (d1, d2) degrees of freedom.
double f_cdf(int d1, int d2, double x);
/// Upper tail 1 - f_cdf, accurate for small tail probabilities.
double f_sf(int d1, int d2, double x);
/// Inverse of f_cdf on 0 < prob < 1.
double f_quantile(int d1, int d2, double prob);

/// Noncentral F CDF with noncentrality `delta` (Poisson mixture of central
/// beta terms with rate delta / 2). The discarded Poisson mass is < 1e-12.
double noncentral_f_cdf(int d1, int d2, double delta, double x);

double normal_cdf(double x);
/// Inverse standard normal CDF on 0 < p < 1.
double normal_quantile(double p);

/// Wilson score interval for a binomial proportion with `rejections` out of
/// `trials` at two-sided confidence `conf`.
std::pair<double, double> wilson_interval(long rejections, long trials, double conf = 0.95);

} // namespace lurk
