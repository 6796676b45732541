#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lurk/dimensions.hpp"
#include "lurk/rng.hpp"

namespace lurk {

/// Evaluates the dimensional qoi from physical (not log) variable values,
/// given in the model's variable order.
using QoiFunction = std::function<double(std::span<const double>)>;

/// A named ground-truth physical model used as a virtual experiment.
struct ModelSpec {
  std::string name;
  std::string qoi_name;
  std::vector<std::string> variable_names;
  DimMatrix d;
  DimVector dq;
  /// Log-space values at which lurking and pinned variables are held.
  Eigen::VectorXd nominal_log;
  /// Sampling design over every variable (restricted to the exposed ones).
  GaussianDesign default_design;
  double log_base = 2.718281828459045;
  /// A noise level that visibly reduces power without swamping the signal.
  double moderate_tau = 0.0;
  QoiFunction qoi;

  [[nodiscard]] Eigen::Index index_of(std::string_view variable) const { return d.index_of(variable); }
  [[nodiscard]] std::size_t size() const { return variable_names.size(); }
};

/// Which variables are varied, lurking (fixed, unknown) or pinned (fixed, known).
struct ExperimentSetup {
  std::vector<Eigen::Index> exposed;
  std::vector<Eigen::Index> lurking;
  std::vector<Eigen::Index> pinned;
  /// Standard deviation of additive Gaussian noise on the dimensional qoi.
  double tau = 0.0;
  std::optional<GaussianDesign> design_override;

  /// Every variable not named as lurking or pinned is exposed.
  static ExperimentSetup from_names(const ModelSpec& model, const std::vector<std::string>& lurking,
                                    const std::vector<std::string>& pinned = {}, double tau = 0.0);

  /// Throws ConfigError unless exposed/lurking/pinned partition the variables.
  void validate(const ModelSpec& model) const;

  [[nodiscard]] GaussianDesign design(const ModelSpec& model) const;
  [[nodiscard]] DimMatrix d_exposed(const ModelSpec& model) const { return model.d.select(exposed); }
  [[nodiscard]] DimMatrix d_lurking(const ModelSpec& model) const { return model.d.select(lurking); }
  [[nodiscard]] DimMatrix d_pinned(const ModelSpec& model) const { return model.d.select(pinned); }
  /// Short identifier such as "lurk-eps_P" or "lurk-mu_o_pin-H"; "null" when nothing is withheld.
  [[nodiscard]] std::string label(const ModelSpec& model) const;
};

struct Observation {
  Eigen::VectorXd x_ex;
  double q_obs = 0.0;
};

/// Laminar friction factor, f = 32 / Re.
double poiseuille_f(double reynolds);

/// Turbulent friction factor from the Colebrook relation
/// 1/sqrt(f) = -2 log10(R / 3.7 + 2.51 / (Re sqrt(f))), by fixed-point
/// iteration on 1/sqrt(f). Throws NoConvergence after the iteration cap.
double colebrook_f(double reynolds, double relative_roughness);

/// Pressure gradient dP/L for rough pipe flow. Laminar below Re = 3000.
double pipe_qoi(double rho, double velocity, double diameter, double viscosity, double roughness);

/// Inner-fluid flow rate per unit depth for two-layer channel flow. The
/// densities are accepted for interface symmetry but do not enter the result.
double two_fluid_qoi(double grad_p, double h, double big_h, double mu_o, double mu_i,
                     double rho_o, double rho_i);

/// One noisy virtual measurement at log-space exposed inputs x_ex. Always
/// consumes exactly one normal draw from `rng`, even when tau is zero.
Observation evaluate(const ModelSpec& model, const ExperimentSetup& setup,
                     const Eigen::Ref<const Eigen::VectorXd>& x_ex, RngStream& rng);

/// Noise-free qoi at log-space exposed inputs.
double evaluate_exact(const ModelSpec& model, const ExperimentSetup& setup,
                      const Eigen::Ref<const Eigen::VectorXd>& x_ex);

const ModelSpec& pipe_model();
const ModelSpec& two_fluid_model();
/// Throws ConfigError for unknown names.
const ModelSpec& find_model(std::string_view name);
std::vector<std::string> model_names();

} // namespace lurk
