#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lurk/detect.hpp"
#include "lurk/dimensions.hpp"
#include "lurk/harness.hpp"
#include "lurk/models.hpp"

namespace lurk {

/// Parsed and validated run configuration (JSON, `"schema": 1`).
///
/// Either names a registered `model`, in which case variables, qoi and
/// defaults come from the registry, or declares `base_dimensions`,
/// `variables` and `qoi` itself. Exponents are integers or "num/den" strings.
/// Design and nominal values are log-space and keyed by variable name.
struct RunConfig {
  std::optional<std::string> model;
  DimMatrix d;
  std::string qoi_name;
  DimVector dq;

  std::vector<std::string> exposed;
  std::vector<std::string> lurking;
  std::vector<std::string> pinned;

  /// Exposed-order design; absent when neither the config nor a model supplies one.
  std::optional<GaussianDesign> design;
  double log_base = 2.718281828459045;
  /// Full-variable-order nominal values overriding the model's.
  std::optional<Eigen::VectorXd> nominal_log;
  std::optional<RationalVector> w_ex;

  double alpha = 0.05;
  double tau = 0.0;
  Eigen::Index n = 100;
  std::vector<Eigen::Index> sweep_n;
  std::vector<double> sweep_tau;
  long replications = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string case_name;

  double power_k = 0.0;
  std::optional<Eigen::Index> power_d;
  std::vector<Eigen::Index> power_n;

  std::optional<std::filesystem::path> data_path;
  std::optional<std::filesystem::path> report_path;
  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> ecdf_path;

  /// Throws ConfigError on malformed documents, unknown or duplicate names,
  /// and partitions that do not cover every variable exactly once.
  static RunConfig parse(const std::string& json_text);
  static RunConfig load(const std::filesystem::path& path);

  [[nodiscard]] DimMatrix d_exposed() const { return d.select(exposed); }
  [[nodiscard]] DimMatrix d_lurking() const { return d.select(lurking); }
  [[nodiscard]] DimMatrix d_pinned() const { return d.select(pinned); }

  /// Registered model with any nominal/design overrides applied.
  [[nodiscard]] ModelSpec model_spec() const;
  [[nodiscard]] ExperimentSetup setup(const ModelSpec& spec) const;
  /// Throws ConfigError when no design is available.
  [[nodiscard]] DetectionConfig detection() const;
  [[nodiscard]] SweepConfig sweep() const;
};

/// Rectangular numeric table with a designated qoi column.
struct DataTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
  std::string qoi_column;

  [[nodiscard]] Eigen::Index column(std::string_view name) const;
  [[nodiscard]] Eigen::Index rows() const { return values.rows(); }

  /// Checks that the qoi and every name in `required` are present.
  void require(const std::vector<std::string>& required) const;

  [[nodiscard]] std::string to_csv() const;
  static DataTable parse_csv(const std::string& text, std::string qoi_column);
  void write(const std::filesystem::path& path) const;
  static DataTable read(const std::filesystem::path& path, std::string qoi_column);
};

/// Flat `key=value` report, one entry per line.
std::string format_report(const TestReport& report, std::uint64_t seed);

/// Inverse of format_report for the scalar keys; vectors are parsed too.
TestReport parse_report(const std::string& text, std::uint64_t* seed = nullptr);

} // namespace lurk
