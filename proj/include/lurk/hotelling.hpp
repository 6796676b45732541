#pragma once

#include <Eigen/Core>

namespace lurk {

/// Sample mean and unbiased (divisor n - 1) covariance of the rows of a matrix.
struct SampleStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::Index n = 0;
};

SampleStats sample_stats(const Eigen::Ref<const Eigen::MatrixXd>& rows);

struct HotellingT2 {
  double t2 = 0.0;
  SampleStats stats;
};

/// One-sample Hotelling statistic n * gbar^T S^-1 gbar for a zero-mean null.
///
/// Throws TooFewSamples when n <= d and SingularCovariance when the LDL^T
/// pivots of S span more than 12 orders of magnitude. An all-zero score
/// matrix is the one singular case with a defined answer: t2 = 0.
HotellingT2 hotelling_t2(const Eigen::Ref<const Eigen::MatrixXd>& g);

/// p-value of t2 under the null T^2_{d, n-1} reference distribution.
double t2_pvalue(double t2, Eigen::Index d, Eigen::Index n);

/// Rejection threshold d(n-1)/(n-d) * F^{-1}_{d, n-d}(1 - alpha).
double t2_critical(Eigen::Index d, Eigen::Index n, double alpha);

} // namespace lurk
