#include "lurk/hotelling.hpp"

#include <string>

#include <Eigen/Cholesky>

#include "lurk/distributions.hpp"
#include "lurk/errors.hpp"

namespace lurk {

namespace {

constexpr double kPivotRatio = 1e-12;

void require_samples(Eigen::Index d, Eigen::Index n) {
  if (d < 1) throw DimensionMismatch("Hotelling test needs at least one dimension");
  if (n <= d) {
    throw TooFewSamples("Hotelling test needs n > d (n=" + std::to_string(n) +
                        ", d=" + std::to_string(d) + ")");
  }
}

} // namespace

SampleStats sample_stats(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  SampleStats s;
  s.n = rows.rows();
  if (s.n < 2) throw TooFewSamples("sample covariance needs at least two rows");
  s.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - s.mean.transpose();
  s.cov = (centered.transpose() * centered) / static_cast<double>(s.n - 1);
  s.cov = 0.5 * (s.cov + s.cov.transpose()).eval();
  return s;
}

HotellingT2 hotelling_t2(const Eigen::Ref<const Eigen::MatrixXd>& g) {
  require_samples(g.cols(), g.rows());
  HotellingT2 out;
  out.stats = sample_stats(g);
  if (g.isZero(0.0)) {
    out.t2 = 0.0;
    return out;
  }

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(out.stats.cov);
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  const double largest = pivots.maxCoeff();
  if (ldlt.info() != Eigen::Success || !(largest > 0.0) ||
      pivots.minCoeff() < kPivotRatio * largest) {
    throw SingularCovariance("sample covariance of the scores is singular");
  }
  const Eigen::VectorXd solved = ldlt.solve(out.stats.mean);
  out.t2 = static_cast<double>(out.stats.n) * out.stats.mean.dot(solved);
  return out;
}

double t2_pvalue(double t2, Eigen::Index d, Eigen::Index n) {
  require_samples(d, n);
  const double scaled = t2 * static_cast<double>(n - d) / (static_cast<double>(d) * static_cast<double>(n - 1));
  return f_sf(static_cast<int>(d), static_cast<int>(n - d), scaled);
}

double t2_critical(Eigen::Index d, Eigen::Index n, double alpha) {
  require_samples(d, n);
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha outside (0, 1)");
  const double scale = static_cast<double>(d) * static_cast<double>(n - 1) / static_cast<double>(n - d);
  return scale * f_quantile(static_cast<int>(d), static_cast<int>(n - d), 1.0 - alpha);
}

} // namespace lurk
