#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "lurk/detect.hpp"
#include "lurk/distributions.hpp"
#include "lurk/errors.hpp"
#include "lurk/rng.hpp"

using namespace lurk;
using namespace lurk::testing;

namespace {

/// Exposed {rho_F, U_F, d_P, mu_F} against a pressure-gradient qoi.
DetectionConfig reynolds_config(double log_base = std::numbers::e) {
  const DimMatrix d_ex = pipe_matrix().select(std::vector<std::string>{"rho_F", "U_F", "d_P", "mu_F"});
  Eigen::VectorXd mu(4), sd(4);
  mu << 0.2, 1.0, -0.5, 0.3;
  sd << 0.3, 0.5, 0.2, 0.4;
  return DetectionConfig::canonical(d_ex, mlt_vec({1, -2, -2}), GaussianDesign(mu, sd), 0.05, std::nullopt, log_base);
}

} // namespace

TEST(DetectionConfig, CanonicalVectorAndValidation) {
  const auto cfg = reynolds_config();
  EXPECT_EQ(cfg.w_ex, rvec({Rational(1, 2), Rational(3, 2), Rational(-3, 2), Rational(1, 2)}));
  auto bad = cfg;
  bad.w_ex(0) = Rational(1);
  EXPECT_THROW(bad.validate(mlt_vec({1, -2, -2})), NotHomogeneous);
  bad = cfg;
  bad.alpha = 1.0;
  EXPECT_THROW(bad.validate(mlt_vec({1, -2, -2})), DomainError);
}

TEST(SteinScores, ZeroResponseGivesZeroScores) {
  const auto cfg = reynolds_config();
  RngStream r(1);
  const Eigen::MatrixXd x = sample_design(cfg.design, 50, r);
  EXPECT_TRUE(stein_scores(x, Eigen::VectorXd::Zero(50), cfg).g.isZero(0.0));
}

TEST(SteinScores, DesignMeanRowHasZeroScore) {
  const auto cfg = reynolds_config();
  const Eigen::MatrixXd x = cfg.design.mu.transpose();
  EXPECT_TRUE(stein_scores(x, Eigen::VectorXd::Constant(1, 123.0), cfg).g.isZero(0.0));
}

TEST(SteinScores, ShapeChecks) {
  const auto cfg = reynolds_config();
  EXPECT_THROW(stein_scores(Eigen::MatrixXd::Zero(5, 3), Eigen::VectorXd::Zero(5), cfg), DimensionMismatch);
  EXPECT_THROW(stein_scores(Eigen::MatrixXd::Zero(5, 4), Eigen::VectorXd::Zero(4), cfg), DimensionMismatch);
}

TEST(SteinScores, LinearResponseRecoversDimensionedGradient) {
  // Stein's lemma is exact for linear pi; mean score converges to D_ex a.
  const auto cfg = reynolds_config();
  Eigen::VectorXd a(4);
  a << 0.7, -1.2, 0.4, 2.0;
  const double b = 3.0;
  const Eigen::Index n = 100000;
  RngStream r(2718);
  const Eigen::MatrixXd x = sample_design(cfg.design, n, r);
  const Eigen::VectorXd w = to_double(cfg.w_ex);
  const Eigen::VectorXd pi = (x * a).array() + b;
  const Eigen::VectorXd q = pi.array() * (x * w).array().exp();
  const auto g = stein_scores(x, q, cfg).g;
  const Eigen::VectorXd mean = g.colwise().mean();
  const Eigen::VectorXd target = cfg.d_ex.to_double() * a;
  const Eigen::MatrixXd centered = g.rowwise() - mean.transpose();
  const Eigen::VectorXd se = (centered.array().square().colwise().sum() / (n - 1.0)).sqrt() / std::sqrt(n);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LT(std::abs(mean(i) - target(i)), 3.0 * se(i)) << i;
}

TEST(SteinScores, SignConventionMatchesLurkingGradient) {
  // pi = exp(s * v^T x) with v = (0,0,-1,0,1), the relative roughness; eps_P is lurking at x0.
  const DimMatrix d = pipe_matrix();
  const DimMatrix d_ex = d.select(std::vector<std::string>{"rho_F", "U_F", "d_P", "mu_F"});
  const DimMatrix d_lu = d.select(std::vector<std::string>{"eps_P"});
  Eigen::VectorXd mu(4), sd(4);
  mu << 0.0, 0.5, 0.0, 0.0;
  sd << 0.2, 0.2, 0.2, 0.2;
  const auto cfg = DetectionConfig::canonical(d_ex, mlt_vec({1, -2, -2}), GaussianDesign(mu, sd));
  const double s = 0.8;
  const double x0 = -0.3;
  const Eigen::Index n = 100000;
  RngStream r(77);
  const Eigen::MatrixXd x = sample_design(cfg.design, n, r);
  const Eigen::VectorXd w = to_double(cfg.w_ex);
  auto pi = [&](double x_d, double x_eps) { return std::exp(s * (-x_d + x_eps)); };
  Eigen::VectorXd q(n);
  double grad_lu = 0.0;
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < n; ++i) {
    q(i) = pi(x(i, 2), x0) * std::exp(x.row(i).dot(w));
    grad_lu += (pi(x(i, 2), x0 + h) - pi(x(i, 2), x0 - h)) / (2.0 * h);
  }
  grad_lu /= static_cast<double>(n);
  const auto g = stein_scores(x, q, cfg).g;
  const Eigen::VectorXd mean = g.colwise().mean();
  const Eigen::VectorXd expected = -d_lu.to_double().col(0) * grad_lu;
  const Eigen::MatrixXd centered = g.rowwise() - mean.transpose();
  const Eigen::VectorXd se = (centered.array().square().colwise().sum() / (n - 1.0)).sqrt() / std::sqrt(n);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LE(std::abs(mean(i) - expected(i)), 3.0 * se(i) + 1e-12) << i;
  EXPECT_GT(std::abs(mean(1)), 10.0 * se(1));
}

TEST(RunTest, ScaleInvarianceUnderChangeOfLogBase) {
  // x -> c x with base -> base^(1/c) keeps every physical value and pi, and scales g by 1/c.
  const auto cfg = reynolds_config();
  RngStream r(31);
  const Eigen::Index n = 300;
  const Eigen::MatrixXd x = sample_design(cfg.design, n, r);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = std::exp(0.6 * x(i, 0) - 0.2 * x(i, 2) + 0.1 * x(i, 1) * x(i, 3));
  const auto base = run_test(stein_scores(x, q, cfg), 0.05);
  for (double c : {0.5, std::log10(std::numbers::e), 3.0}) {
    DetectionConfig scaled = cfg;
    scaled.design = GaussianDesign(cfg.design.mu * c, cfg.design.sigma * c);
    scaled.log_base = std::exp(1.0 / c);
    const auto rep = run_test(stein_scores(x * c, q, scaled), 0.05);
    EXPECT_NEAR(rep.t2, base.t2, 1e-8 * std::max(1.0, base.t2)) << c;
    EXPECT_NEAR(rep.p_value, base.p_value, 1e-8) << c;
  }
}

TEST(RunTest, ZeroMeanScoresFailToReject) {
  Eigen::MatrixXd g(6, 2);
  g << 1, 2, -1, -2, 3, -1, -3, 1, 0.5, 0.25, -0.5, -0.25;
  const auto rep = run_test(SteinScores{g, false}, 0.05);
  EXPECT_NEAR(rep.t2, 0.0, 1e-14);
  EXPECT_NEAR(rep.p_value, 1.0, 1e-12);
  EXPECT_FALSE(rep.reject);
  EXPECT_TRUE(rep.consistent());
}

TEST(RunTest, ReportFieldsAreConsistent) {
  RngStream r(5);
  const GaussianDesign design(Eigen::VectorXd::Constant(3, 0.12), Eigen::VectorXd::Ones(3));
  int rejections = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::MatrixXd g = sample_design(design, 80, r);
    const auto report = run_test(SteinScores{g, false}, 0.05);
    EXPECT_EQ(report.reject, report.t2 >= report.critical);
    EXPECT_TRUE(report.consistent());
    EXPECT_EQ(report.dof_num, 3);
    EXPECT_EQ(report.dof_den, 77);
    ASSERT_TRUE(report.nu_hat_unit);
    EXPECT_NEAR(report.nu_hat_unit->norm(), 1.0, 1e-14);
    rejections += report.reject;
  }
  EXPECT_GT(rejections, 30);
}

TEST(RunPinnedTest, IdentityPinIsBitIdentical) {
  RngStream r(6);
  const GaussianDesign design(Eigen::VectorXd::Constant(3, 0.1), Eigen::VectorXd::Ones(3));
  const SteinScores scores{sample_design(design, 40, r), false};
  const auto plain = run_test(scores, 0.05);
  const auto pinned = run_pinned_test(scores, Eigen::MatrixXd::Identity(3, 3), 0.05);
  EXPECT_EQ(plain.t2, pinned.t2);
  EXPECT_EQ(plain.p_value, pinned.p_value);
  EXPECT_EQ(plain.nu_hat, pinned.nu_hat);
  EXPECT_FALSE(pinned.pinned);
}

TEST(RunPinnedTest, ProjectsAwayPinnedDimensions) {
  RngStream r(7);
  Eigen::VectorXd mu(3);
  mu << 0.3, 0.4, -0.2;
  const SteinScores scores{sample_design(GaussianDesign(mu, Eigen::VectorXd::Ones(3)), 200, r), false};
  const auto w = pinned_complement(mlt_matrix(rmat({{0}, {1}, {0}}), {"H"}));
  const auto report = run_pinned_test(scores, w, 0.05);
  EXPECT_TRUE(report.pinned);
  EXPECT_EQ(report.dof_num, 2);
  EXPECT_EQ(report.dof_den, 198);
  EXPECT_LT(std::abs(report.nu_hat(1)), 1e-14);
  EXPECT_NEAR(report.nu_hat(0), scores.g.col(0).mean(), 1e-12);
  EXPECT_NEAR(report.nu_hat(2), scores.g.col(2).mean(), 1e-12);
  EXPECT_NEAR(report.critical, 2.0 * 199.0 / 198.0 * f_quantile(2, 198, 0.95), 1e-10);
  EXPECT_THROW(run_pinned_test(SteinScores{scores.g, true}, w, 0.05), DimensionMismatch);
}

TEST(Detect, UsesPinnedTestWhenConfigured) {
  auto cfg = reynolds_config();
  cfg.d_pin = mlt_matrix(rmat({{0}, {1}, {0}}), {"H"});
  RngStream r(8);
  const Eigen::MatrixXd x = sample_design(cfg.design, 100, r);
  const Eigen::VectorXd q = (x.col(0).array() + 2.0 * x.col(1).array()).exp();
  const auto report = detect(x, q, cfg);
  EXPECT_TRUE(report.pinned);
  EXPECT_EQ(report.dof_num, 2);
}

TEST(Power, NullSignalGivesAlpha) {
  for (Eigen::Index n : {10, 100, 5000}) EXPECT_NEAR(predict_power(0.0, n, 3, 0.05), 0.05, 1e-10);
}

TEST(Power, MonotoneInSampleSize) {
  double prev = 0.0;
  for (Eigen::Index n = 10; n < 20000; n = n * 3 / 2) {
    const double p = predict_power(0.01, n, 3, 0.05);
    EXPECT_GE(p, prev - 1e-12);
    prev = p;
  }
}

TEST(Power, NoncentralFOracleAndPlanningScale) {
  EXPECT_NEAR(noncentrality(0.01, 1000), 1000 * (0.01 + 0.0001 / 0.99), 1e-12);
  EXPECT_NEAR(predict_power(0.01, 1000, 3, 0.05), 0.7638932262570313, 1e-9);
  EXPECT_NEAR(predict_power(0.02, 400, 3, 0.05), 0.6591560123468658, 1e-9);
  Eigen::Index crossing = 0;
  for (Eigen::Index n = 100; n < 100000; n += 10) {
    if (predict_power(0.01, n, 3, 0.05) >= 0.8) {
      crossing = n;
      break;
    }
  }
  EXPECT_EQ(crossing, 1090);
  EXPECT_THROW(predict_power(1.0, 100, 3, 0.05), DomainError);
  EXPECT_THROW(predict_power(0.1, 3, 3, 0.05), TooFewSamples);
}

TEST(EstimateK, ZeroMeanAndConstantRows) {
  Eigen::MatrixXd g(4, 2);
  g << 1, 2, -1, -2, 3, -1, -3, 1;
  EXPECT_NEAR(estimate_k(SteinScores{g, false}), 0.0, 1e-15);
  EXPECT_NEAR(estimate_k(SteinScores{Eigen::MatrixXd::Constant(10, 1, 2.5), false}), 1.0 - 1e-12, 1e-15);
  EXPECT_THROW(estimate_k(SteinScores{Eigen::MatrixXd::Constant(10, 2, 2.5), false}), SingularCovariance);
}

TEST(EstimateK, ShermanMorrisonLimit) {
  Eigen::VectorXd nu(3);
  nu << 0.3, -0.2, 0.1;
  const GaussianDesign design(nu, Eigen::VectorXd::Ones(3));
  RngStream r(12);
  const double k = estimate_k(SteinScores{sample_design(design, 400000, r), false});
  const double expected = nu.squaredNorm() / (1.0 + nu.squaredNorm());
  EXPECT_NEAR(k, expected, 0.01);
}

TEST(CompareDirection, ReferenceEstimateAndLimits) {
  Eigen::VectorXd nu(3);
  nu << 0.8165, -0.9752, -0.7370;
  const DimMatrix viscosity = mlt_matrix(rmat({{1}, {-1}, {-1}}), {"mu_o"});
  EXPECT_NEAR(compare_direction(nu, viscosity), 0.9931703344098015, 1e-12);
  EXPECT_NEAR(compare_direction(Eigen::Vector3d(2, -2, -2), viscosity), 1.0, 1e-15);
  EXPECT_NEAR(compare_direction(Eigen::Vector3d(1, 1, 0), viscosity), 0.0, 1e-15);
  EXPECT_THROW(compare_direction(Eigen::Vector3d::Zero(), viscosity), DomainError);

  const auto w = pinned_complement(mlt_matrix(rmat({{0}, {1}, {0}}), {"H"}));
  Eigen::VectorXd pinned_nu(3);
  pinned_nu << 0.6731, 0.0, -0.6064;
  EXPECT_NEAR(compare_direction(pinned_nu, viscosity, w), 0.998644008264104, 1e-12);
}
