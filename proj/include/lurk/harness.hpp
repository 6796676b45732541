#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lurk/detect.hpp"
#include "lurk/models.hpp"
#include "lurk/rng.hpp"

namespace lurk {

/// A model/setup pair with the a-priori analysis already done.
struct PreparedExperiment {
  const ModelSpec* model = nullptr;
  ExperimentSetup setup;
  DetectionConfig detection;
  std::optional<Eigen::MatrixXd> w_pin;

  /// Throws NotHomogeneous when the exposed set cannot non-dimensionalize the
  /// qoi and FullRankPinned when pinning leaves nothing to test.
  static PreparedExperiment prepare(const ModelSpec& model, const ExperimentSetup& setup,
                                    double alpha = 0.05);

  /// Score dimension after projection: d - rank(D_pin).
  [[nodiscard]] Eigen::Index effective_dims() const;
};

struct ReplicationResult {
  double p_value = 1.0;
  bool reject = false;
  Eigen::VectorXd nu_hat;
  /// The score covariance was singular; the replication carries no verdict.
  bool degenerate = false;
};

/// Draws n design points, evaluates the virtual experiment and tests.
ReplicationResult run_replication(const PreparedExperiment& experiment, Eigen::Index n, RngStream& rng);

/// The (x, q_obs) sample that run_replication would test, for export.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> simulate_sample(const PreparedExperiment& experiment,
                                                            Eigen::Index n, RngStream& rng);

/// Stream for replication `rep` of the (n, tau) cell. Keyed by cell values,
/// so adding or removing grid points leaves other cells untouched.
RngStream replication_stream(std::uint64_t seed, Eigen::Index n, double tau, std::uint64_t rep);

struct SweepConfig {
  std::string model;
  /// Used instead of the registered model when set, e.g. with other nominals.
  std::optional<ModelSpec> model_spec;
  ExperimentSetup setup;
  std::vector<Eigen::Index> n_grid;
  std::vector<double> tau_grid;
  long replications = 200;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int parallelism = 1;
  /// Label written to the `case` column; the setup label when empty.
  std::string case_name;
};

struct CellResult {
  std::string model;
  std::string case_name;
  Eigen::Index n = 0;
  double tau = 0.0;
  /// Non-degenerate replications: rejections + failures.
  long trials = 0;
  long rejections = 0;
  long failures = 0;
  long degenerate = 0;
  double rate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double pvalue_mean = 0.0;
  double pvalue_var = 0.0;
  Eigen::VectorXd mean_nu_hat;
  /// Per-replication p-values in replication order (not serialized).
  std::vector<double> p_values;
};

std::vector<CellResult> run_sweep(const SweepConfig& cfg);

/// Sorted (p, rank / N) pairs.
std::vector<std::pair<double, double>> pvalue_ecdf(std::vector<double> p_values);

/// Kolmogorov-Smirnov distance between the sample and U(0, 1).
double ks_uniform_distance(std::span<const double> p_values);

/// Asymptotic KS critical value c(alpha) / sqrt(N); c = 1.628 at the 1% level.
double ks_critical(std::size_t n, double level = 0.01);

/// Header for `nu_dims` dimension-vector columns.
std::string csv_header(Eigen::Index nu_dims);
std::string format_csv(const std::vector<CellResult>& results, Eigen::Index nu_dims);
std::vector<CellResult> parse_csv(const std::string& text);

void emit_csv(const std::vector<CellResult>& results, Eigen::Index nu_dims,
              const std::filesystem::path& path);
std::vector<CellResult> read_csv(const std::filesystem::path& path);
void emit_ecdf(const std::vector<std::pair<double, double>>& ecdf, const std::filesystem::path& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

} // namespace lurk
