#include "lurk/detect.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "lurk/distributions.hpp"
#include "lurk/errors.hpp"
#include "lurk/hotelling.hpp"

namespace lurk {

namespace {

constexpr double kMaxK = 1.0 - 1e-12;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha outside (0, 1)");
}

} // namespace

DetectionConfig DetectionConfig::canonical(DimMatrix d_ex, const DimVector& dq,
                                           GaussianDesign design, double alpha,
                                           std::optional<DimMatrix> d_pin, double log_base) {
  DetectionConfig cfg;
  cfg.w_ex = nondim_vector(d_ex, dq);
  cfg.d_ex = std::move(d_ex);
  cfg.design = std::move(design);
  cfg.alpha = alpha;
  cfg.d_pin = std::move(d_pin);
  cfg.log_base = log_base;
  cfg.validate(dq);
  return cfg;
}

void DetectionConfig::validate(const DimVector& dq) const {
  if (w_ex.size() != d_ex.vars()) throw DimensionMismatch("w_ex length differs from exposed count");
  if (design.size() != d_ex.vars()) throw DimensionMismatch("design length differs from exposed count");
  if (d_ex.basis() != dq.basis) throw DimensionMismatch("qoi basis differs from exposed basis");
  const RationalVector residual = d_ex.exponents() * w_ex - dq.exponents;
  for (const auto& r : residual) {
    if (!r.is_zero()) throw NotHomogeneous("w_ex does not reproduce the qoi dimensions");
  }
  check_alpha(alpha);
  if (!(log_base > 0.0) || log_base == 1.0 || !std::isfinite(log_base)) {
    throw DomainError("log base must be positive, finite and not 1");
  }
  if (d_pin && d_pin->basis() != d_ex.basis()) throw DimensionMismatch("pinned basis differs");
}

double DetectionConfig::log_scale() const {
  return log_base == std::numbers::e ? 1.0 : std::log(log_base);
}

bool TestReport::consistent(double slack) const {
  const bool by_stat = t2 >= critical;
  const bool by_p = p_value <= alpha;
  if (by_stat == reject && by_p == reject) return true;
  // Ties at the threshold may disagree through rounding only.
  return std::abs(p_value - alpha) <= slack;
}

SteinScores stein_scores(const Eigen::Ref<const Eigen::MatrixXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& q_obs,
                         const DetectionConfig& cfg) {
  if (x.rows() != q_obs.size()) throw DimensionMismatch("input and response row counts differ");
  if (x.cols() != cfg.design.size()) throw DimensionMismatch("input columns differ from design");
  if (x.cols() != cfg.d_ex.vars()) throw DimensionMismatch("input columns differ from exposed count");

  const Eigen::VectorXd w = to_double(cfg.w_ex);
  const Eigen::VectorXd pi =
      q_obs.array() * (-cfg.log_scale() * (x * w).array()).exp();
  const Eigen::RowVectorXd precision = cfg.design.sigma.array().square().inverse().matrix().transpose();

  Eigen::MatrixXd weighted = (x.rowwise() - cfg.design.mu.transpose()).array().rowwise() *
                             precision.array();
  weighted.array().colwise() *= pi.array();
  return SteinScores{weighted * cfg.d_ex.to_double().transpose(), false};
}

TestReport run_test(const SteinScores& scores, double alpha) {
  check_alpha(alpha);
  const auto d = scores.g.cols();
  const auto n = scores.g.rows();
  const auto h = hotelling_t2(scores.g);

  TestReport report;
  report.t2 = h.t2;
  report.dof_num = static_cast<int>(d);
  report.dof_den = static_cast<int>(n - d);
  report.critical = t2_critical(d, n, alpha);
  report.p_value = t2_pvalue(h.t2, d, n);
  report.reject = report.t2 >= report.critical;
  report.alpha = alpha;
  report.nu_hat = h.stats.mean;
  report.n = n;
  report.pinned = scores.projected;
  const double norm = report.nu_hat.norm();
  if (norm > 0.0) report.nu_hat_unit = report.nu_hat / norm;
  return report;
}

TestReport run_pinned_test(const SteinScores& scores_raw, const Eigen::MatrixXd& w_pin, double alpha) {
  if (scores_raw.projected) throw DimensionMismatch("scores are already projected");
  if (w_pin.rows() != scores_raw.g.cols()) throw DimensionMismatch("W rows differ from score width");
  if (w_pin.cols() == w_pin.rows() && w_pin.isIdentity(0.0)) return run_test(scores_raw, alpha);

  const SteinScores projected{scores_raw.g * w_pin, true};
  TestReport report = run_test(projected, alpha);
  report.nu_hat = w_pin * report.nu_hat;
  const double norm = report.nu_hat.norm();
  report.nu_hat_unit.reset();
  if (norm > 0.0) report.nu_hat_unit = report.nu_hat / norm;
  return report;
}

TestReport detect(const Eigen::Ref<const Eigen::MatrixXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& q_obs, const DetectionConfig& cfg) {
  const auto scores = stein_scores(x, q_obs, cfg);
  if (cfg.d_pin && cfg.d_pin->vars() > 0) {
    return run_pinned_test(scores, pinned_complement(*cfg.d_pin), cfg.alpha);
  }
  return run_test(scores, cfg.alpha);
}

double noncentrality(double k, Eigen::Index n) {
  if (!(k >= 0.0 && k < 1.0)) throw DomainError("k must lie in [0, 1)");
  return static_cast<double>(n) * (k + k * k / (1.0 - k));
}

double predict_power(double k, Eigen::Index n, Eigen::Index d, double alpha) {
  check_alpha(alpha);
  const double delta = noncentrality(k, n);
  if (d < 1 || n <= d) throw TooFewSamples("power prediction needs n > d >= 1");
  const int d1 = static_cast<int>(d);
  const int d2 = static_cast<int>(n - d);
  const double critical = f_quantile(d1, d2, 1.0 - alpha);
  return 1.0 - noncentral_f_cdf(d1, d2, delta, critical);
}

double estimate_k(const SteinScores& scores) {
  const auto n = scores.g.rows();
  const auto d = scores.g.cols();
  if (n <= d) throw TooFewSamples("k estimate needs n > d");
  const Eigen::VectorXd mean = scores.g.colwise().mean().transpose();
  const Eigen::MatrixXd moment = (scores.g.transpose() * scores.g) / static_cast<double>(n);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(moment);
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  if (!(pivots.maxCoeff() > 0.0) || pivots.minCoeff() < 1e-12 * pivots.maxCoeff()) {
    throw SingularCovariance("second-moment matrix of the scores is singular");
  }
  const double k = mean.dot(ldlt.solve(mean));
  return std::clamp(k, 0.0, kMaxK);
}

double compare_direction(const Eigen::VectorXd& nu_hat, const DimMatrix& d_lu,
                         const std::optional<Eigen::MatrixXd>& w_pin) {
  if (d_lu.vars() != 1) throw DimensionMismatch("direction comparison needs exactly one lurking column");
  Eigen::VectorXd target = d_lu.to_double().col(0);
  if (w_pin) target = (*w_pin) * (w_pin->transpose() * target);
  if (target.size() != nu_hat.size()) throw DimensionMismatch("nu_hat length differs from base count");
  const double denom = nu_hat.norm() * target.norm();
  if (!(denom > 0.0)) throw DomainError("direction comparison with a zero-length vector");
  return nu_hat.dot(target) / denom;
}

} // namespace lurk
