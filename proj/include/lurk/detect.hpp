#pragma once

#include <numbers>
#include <optional>

#include <Eigen/Core>

#include "lurk/dimensions.hpp"
#include "lurk/rng.hpp"

namespace lurk {

/// Everything the experimental test needs to know a priori.
struct DetectionConfig {
  DimMatrix d_ex;
  /// Non-dimensionalizing exponents over the exposed variables; d_ex * w_ex = d(q).
  RationalVector w_ex;
  GaussianDesign design;
  double alpha = 0.05;
  std::optional<DimMatrix> d_pin;
  /// Base of the logarithm that maps physical values to design coordinates.
  double log_base = std::numbers::e;

  /// Builds a config with the canonical (nullspace-orthogonal) w_ex.
  static DetectionConfig canonical(DimMatrix d_ex, const DimVector& dq, GaussianDesign design,
                                   double alpha = 0.05, std::optional<DimMatrix> d_pin = {},
                                   double log_base = std::numbers::e);

  /// Validates every invariant; throws on violation. `dq` is used to check w_ex.
  void validate(const DimVector& dq) const;

  /// Multiplier turning design coordinates into natural logs.
  [[nodiscard]] double log_scale() const;
};

/// Rows are the per-sample scores g_i (or W^T g_i once projected).
struct SteinScores {
  Eigen::MatrixXd g;
  bool projected = false;
};

struct TestReport {
  double t2 = 0.0;
  int dof_num = 0;
  int dof_den = 0;
  double critical = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  /// Mean score. For the pinned test this is W gbar', i.e. in base-dimension
  /// coordinates with the pinned directions removed.
  Eigen::VectorXd nu_hat;
  /// nu_hat / |nu_hat|; absent when nu_hat is exactly zero.
  std::optional<Eigen::VectorXd> nu_hat_unit;
  Eigen::Index n = 0;
  bool pinned = false;

  /// reject, p_value <= alpha and t2 >= critical agree (up to `slack` in p).
  [[nodiscard]] bool consistent(double slack = 1e-9) const;
};

/// g_i = D_ex Sigma^-1 (x_i - mu) pi_i with pi_i = q_i * base^(-w_ex . x_i).
SteinScores stein_scores(const Eigen::Ref<const Eigen::MatrixXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& q_obs,
                         const DetectionConfig& cfg);

/// Hotelling test of E[g] = 0.
TestReport run_test(const SteinScores& scores, double alpha);

/// Projects each score row onto the pinned complement W and runs the test
/// with d replaced by d - rank(D_pin).
TestReport run_pinned_test(const SteinScores& scores_raw, const Eigen::MatrixXd& w_pin, double alpha);

/// Full experimental procedure on log-space inputs: scores, then the standard
/// or pinned test depending on cfg.d_pin.
TestReport detect(const Eigen::Ref<const Eigen::MatrixXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& q_obs, const DetectionConfig& cfg);

/// Noncentrality n (k + k^2 / (1 - k)).
double noncentrality(double k, Eigen::Index n);

/// Power of the level-alpha test for a given k = nu^T E[g g^T]^-1 nu.
double predict_power(double k, Eigen::Index n, Eigen::Index d, double alpha);

/// Plug-in k from observed scores, clamped to [0, 1 - 1e-12].
double estimate_k(const SteinScores& scores);

/// Cosine between nu_hat and the lurking dimension column, optionally
/// projected by W W^T first.
double compare_direction(const Eigen::VectorXd& nu_hat, const DimMatrix& d_lu,
                         const std::optional<Eigen::MatrixXd>& w_pin = std::nullopt);

} // namespace lurk
