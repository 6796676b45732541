#include "lurk/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lurk/errors.hpp"

namespace lurk {

namespace {

constexpr double kCfTolerance = 1e-15;
constexpr int kCfMaxIterations = 500;
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kCfTolerance) return h;
  }
  throw NoConvergence("incomplete beta continued fraction did not converge (a=" +
                      std::to_string(a) + ", b=" + std::to_string(b) +
                      ", x=" + std::to_string(x) + ")");
}

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

void check_shape(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta shape parameters must be > 0");
}

// Returns {I_x(a,b), 1 - I_x(a,b)} given x and its complement y = 1 - x.
std::pair<double, double> inc_beta_pair(double a, double b, double x, double y) {
  if (x <= 0.0) return {0.0, 1.0};
  if (y <= 0.0) return {1.0, 0.0};
  const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = front * beta_continued_fraction(a, b, x) / a;
    return {lower, 1.0 - lower};
  }
  const double upper = front * beta_continued_fraction(b, a, y) / b;
  return {1.0 - upper, upper};
}

void check_dof(int d1, int d2) {
  if (d1 <= 0 || d2 <= 0) throw DomainError("F degrees of freedom must be positive");
}

// Beta argument of the F transform and its complement, each computed directly.
std::pair<double, double> f_to_beta(int d1, int d2, double x) {
  const double num = static_cast<double>(d1) * x;
  const double den = num + static_cast<double>(d2);
  return {num / den, static_cast<double>(d2) / den};
}

} // namespace

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double reg_inc_beta(double a, double b, double x) {
  check_shape(a, b);
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta argument outside [0, 1]");
  return inc_beta_pair(a, b, x, 1.0 - x).first;
}

double reg_inc_beta_upper(double a, double b, double x) {
  check_shape(a, b);
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta argument outside [0, 1]");
  return inc_beta_pair(a, b, x, 1.0 - x).second;
}

double f_cdf(int d1, int d2, double x) {
  check_dof(d1, d2);
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  const auto [y, cy] = f_to_beta(d1, d2, x);
  return inc_beta_pair(0.5 * d1, 0.5 * d2, y, cy).first;
}

double f_sf(int d1, int d2, double x) {
  check_dof(d1, d2);
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  const auto [y, cy] = f_to_beta(d1, d2, x);
  return inc_beta_pair(0.5 * d1, 0.5 * d2, y, cy).second;
}

double f_quantile(int d1, int d2, double prob) {
  check_dof(d1, d2);
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("F quantile probability outside (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  while (f_cdf(d1, d2, hi) < prob) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NoConvergence("F quantile bracket overflow");
  }
  for (int i = 0; i < 2000 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f_cdf(d1, d2, mid) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double noncentral_f_cdf(int d1, int d2, double delta, double x) {
  check_dof(d1, d2);
  if (!(delta >= 0.0) || std::isinf(delta)) throw DomainError("noncentrality must be finite and >= 0");
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (delta == 0.0) return f_cdf(d1, d2, x);

  constexpr double kTailBound = 1e-13;
  const auto [y, cy] = f_to_beta(d1, d2, x);
  const double a = 0.5 * d1;
  const double b = 0.5 * d2;
  const double lambda = 0.5 * delta;
  const double mode = std::floor(lambda);
  const double log_w_mode = -lambda + mode * std::log(lambda) - log_gamma(mode + 1.0);
  const double w_mode = std::exp(log_w_mode);

  double sum = w_mode * inc_beta_pair(a + mode, b, y, cy).first;

  // Downward from the mode; w(j-1) = w(j) * j / lambda.
  double w = w_mode;
  for (double j = mode; j >= 1.0; j -= 1.0) {
    w *= j / lambda;
    sum += w * inc_beta_pair(a + j - 1.0, b, y, cy).first;
    const double ratio = (j - 1.0) / lambda;
    if (ratio < 1.0 && w * ratio / (1.0 - ratio) < kTailBound) break;
  }

  // Upward; w(j+1) = w(j) * lambda / (j + 1).
  w = w_mode;
  for (double j = mode;; j += 1.0) {
    w *= lambda / (j + 1.0);
    sum += w * inc_beta_pair(a + j + 1.0, b, y, cy).first;
    const double ratio = lambda / (j + 2.0);
    if (ratio < 1.0 && w * ratio / (1.0 - ratio) < kTailBound) break;
    if (j > mode + 1e7) throw NoConvergence("noncentral F series did not terminate");
  }
  return std::clamp(sum, 0.0, 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile probability outside (0, 1)");
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

std::pair<double, double> wilson_interval(long rejections, long trials, double conf) {
  if (trials < 1 || rejections < 0 || rejections > trials) {
    throw DomainError("wilson interval needs 0 <= rejections <= trials, trials >= 1");
  }
  if (!(conf > 0.0 && conf < 1.0)) throw DomainError("confidence level outside (0, 1)");
  const double z = normal_quantile(0.5 + 0.5 * conf);
  const double z2 = z * z;
  const double nr = static_cast<double>(rejections);
  const double nf = static_cast<double>(trials - rejections);
  const double n = static_cast<double>(trials);
  const double center = nr + 0.5 * z2;
  const double half = z * std::sqrt(nr * nf / n + 0.25 * z2);
  const double scale = 1.0 / (n + z2);
  double lo = (center - half) * scale;
  double hi = (center + half) * scale;
  // Both bounds collapse algebraically at the extremes.
  if (rejections == 0) lo = 0.0;
  if (rejections == trials) hi = 1.0;
  return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

} // namespace lurk
