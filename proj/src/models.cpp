#include "lurk/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "lurk/errors.hpp"

namespace lurk {

namespace {

constexpr double kLaminarLimit = 3000.0;
constexpr int kColebrookMaxIterations = 200;

RationalMatrix integer_matrix(std::initializer_list<std::initializer_list<int>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  RationalMatrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (int v : row) m(i, j++) = Rational(v);
    ++i;
  }
  return m;
}

RationalVector integer_vector(std::initializer_list<int> values) {
  RationalVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (int x : values) v(i++) = Rational(x);
  return v;
}

double base_pow(double base, double x) {
  return base == std::numbers::e ? std::exp(x) : std::pow(base, x);
}

ModelSpec make_pipe() {
  ModelSpec m;
  m.name = "pipe";
  m.qoi_name = "dPdL";
  m.variable_names = {"rho_F", "U_F", "d_P", "mu_F", "eps_P"};
  m.d = DimMatrix(integer_matrix({{1, 0, 0, 1, 0}, {-3, 1, 1, -1, 1}, {0, -1, 0, -1, 0}}),
                  base_dimensions::mlt(), m.variable_names);
  m.dq = DimVector(integer_vector({1, -2, -2}), base_dimensions::mlt());
  Eigen::VectorXd mu(5), sd(5);
  mu << 0.1682, 5.7565, 0.3965, -11.3102, -2.0999;
  sd << 0.0561, 0.3838, 0.0448, 0.0676, 0.0676;
  m.default_design = GaussianDesign(mu, sd);
  m.nominal_log = mu;
  m.log_base = 10.0;
  m.moderate_tau = 3.0e8;
  m.qoi = [](std::span<const double> z) { return pipe_qoi(z[0], z[1], z[2], z[3], z[4]); };
  return m;
}

ModelSpec make_two_fluid() {
  ModelSpec m;
  m.name = "two_fluid";
  m.qoi_name = "Q_d";
  m.variable_names = {"dPdL", "h", "H", "mu_o", "mu_i", "rho_o", "rho_i"};
  m.d = DimMatrix(integer_matrix({{1, 0, 0, 1, 1, 1, 1},
                                  {-2, 1, 1, -1, -1, -3, -3},
                                  {-2, 0, 0, -1, -1, 0, 0}}),
                  base_dimensions::mlt(), m.variable_names);
  m.dq = DimVector(integer_vector({0, 2, -1}), base_dimensions::mlt());
  Eigen::VectorXd mu(7), sd(7);
  mu << 1.0397, -1.7533, 0.3466, 0.3466, 3.8005, 0.3466, 1.4979;
  sd << 0.3466, 0.1831, 0.1155, 0.1155, 0.0372, 0.1155, 0.0372;
  m.default_design = GaussianDesign(mu, sd);
  m.nominal_log = mu;
  m.log_base = std::numbers::e;
  m.moderate_tau = 0.5;
  m.qoi = [](std::span<const double> z) {
    return two_fluid_qoi(z[0], z[1], z[2], z[3], z[4], z[5], z[6]);
  };
  return m;
}

std::string join(const ModelSpec& model, const std::vector<Eigen::Index>& idx) {
  std::string out;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k > 0) out += '+';
    out += model.variable_names[static_cast<std::size_t>(idx[k])];
  }
  return out;
}

} // namespace

double poiseuille_f(double reynolds) {
  if (!(reynolds > 0.0)) throw DomainError("Reynolds number must be positive");
  return 32.0 / reynolds;
}

double colebrook_f(double reynolds, double relative_roughness) {
  if (!(reynolds > 0.0)) throw DomainError("Reynolds number must be positive");
  if (!(relative_roughness >= 0.0)) throw DomainError("relative roughness must be >= 0");
  // y = 1/sqrt(f); start from a typical turbulent value.
  double y = 8.0;
  for (int it = 0; it < kColebrookMaxIterations; ++it) {
    const double arg = relative_roughness / 3.7 + 2.51 * y / reynolds;
    if (!(arg > 0.0) || !std::isfinite(arg)) break;
    const double next = -2.0 * std::log10(arg);
    if (!(next > 0.0)) break;
    if (std::abs(next - y) <= 1e-15 * next) return 1.0 / (next * next);
    y = next;
  }
  throw NoConvergence("Colebrook iteration did not converge (Re=" + std::to_string(reynolds) +
                      ", R=" + std::to_string(relative_roughness) + ")");
}

double pipe_qoi(double rho, double velocity, double diameter, double viscosity, double roughness) {
  if (!(rho > 0.0 && velocity > 0.0 && diameter > 0.0 && viscosity > 0.0 && roughness > 0.0)) {
    throw DomainError("pipe inputs must be positive");
  }
  const double reynolds = rho * velocity * diameter / viscosity;
  const double f = reynolds < kLaminarLimit ? poiseuille_f(reynolds)
                                            : colebrook_f(reynolds, roughness / diameter);
  return f * (0.5 * rho * velocity * velocity) / diameter;
}

double two_fluid_qoi(double grad_p, double h, double big_h, double mu_o, double mu_i,
                     double /*rho_o*/, double /*rho_i*/) {
  if (!(h >= 0.0 && 2.0 * h < big_h)) throw DomainError("two-fluid geometry needs 0 <= h < H/2");
  if (!(mu_o > 0.0 && mu_i > 0.0)) throw DomainError("viscosities must be positive");
  const double inner = big_h - h;
  const double bracket = (inner * inner * inner - h * h * h) / 3.0 -
                         0.5 * big_h * (inner * inner - h * h) -
                         (mu_o - mu_i) / mu_o * (h * h - h * big_h) * (big_h - 2.0 * h);
  return -0.5 * grad_p / mu_i * bracket;
}

ExperimentSetup ExperimentSetup::from_names(const ModelSpec& model,
                                            const std::vector<std::string>& lurking,
                                            const std::vector<std::string>& pinned, double tau) {
  ExperimentSetup s;
  s.tau = tau;
  std::set<Eigen::Index> withheld;
  for (const auto& name : lurking) {
    s.lurking.push_back(model.index_of(name));
    withheld.insert(s.lurking.back());
  }
  for (const auto& name : pinned) {
    s.pinned.push_back(model.index_of(name));
    withheld.insert(s.pinned.back());
  }
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(model.size()); ++j) {
    if (!withheld.contains(j)) s.exposed.push_back(j);
  }
  s.validate(model);
  return s;
}

void ExperimentSetup::validate(const ModelSpec& model) const {
  const auto p = static_cast<Eigen::Index>(model.size());
  std::vector<int> seen(model.size(), 0);
  for (const auto* group : {&exposed, &lurking, &pinned}) {
    for (const auto j : *group) {
      if (j < 0 || j >= p) throw ConfigError("variable index out of range");
      ++seen[static_cast<std::size_t>(j)];
    }
  }
  for (std::size_t j = 0; j < seen.size(); ++j) {
    if (seen[j] != 1) {
      throw ConfigError("variable '" + model.variable_names[j] +
                        "' must be exactly one of exposed, lurking or pinned");
    }
  }
  if (exposed.empty()) throw ConfigError("at least one variable must be exposed");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be finite and >= 0");
  if (design_override && design_override->size() != static_cast<Eigen::Index>(exposed.size())) {
    throw ConfigError("design override length differs from exposed count");
  }
}

GaussianDesign ExperimentSetup::design(const ModelSpec& model) const {
  if (design_override) return *design_override;
  Eigen::VectorXd mu(static_cast<Eigen::Index>(exposed.size()));
  Eigen::VectorXd sd(mu.size());
  for (std::size_t k = 0; k < exposed.size(); ++k) {
    mu(static_cast<Eigen::Index>(k)) = model.default_design.mu(exposed[k]);
    sd(static_cast<Eigen::Index>(k)) = model.default_design.sigma(exposed[k]);
  }
  return GaussianDesign(mu, sd);
}

std::string ExperimentSetup::label(const ModelSpec& model) const {
  if (lurking.empty() && pinned.empty()) return "null";
  std::string out;
  if (!lurking.empty()) out = "lurk-" + join(model, lurking);
  if (!pinned.empty()) out += (out.empty() ? "" : "_") + std::string("pin-") + join(model, pinned);
  return out;
}

double evaluate_exact(const ModelSpec& model, const ExperimentSetup& setup,
                      const Eigen::Ref<const Eigen::VectorXd>& x_ex) {
  if (x_ex.size() != static_cast<Eigen::Index>(setup.exposed.size())) {
    throw DimensionMismatch("exposed input length differs from setup");
  }
  std::vector<double> z(model.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    z[j] = base_pow(model.log_base, model.nominal_log(static_cast<Eigen::Index>(j)));
  }
  for (std::size_t k = 0; k < setup.exposed.size(); ++k) {
    z[static_cast<std::size_t>(setup.exposed[k])] =
        base_pow(model.log_base, x_ex(static_cast<Eigen::Index>(k)));
  }
  return model.qoi(z);
}

Observation evaluate(const ModelSpec& model, const ExperimentSetup& setup,
                     const Eigen::Ref<const Eigen::VectorXd>& x_ex, RngStream& rng) {
  const double noise = setup.tau * rng.normal();
  const double q = evaluate_exact(model, setup, x_ex) + noise;
  if (!std::isfinite(q)) throw DomainError("model '" + model.name + "' produced a non-finite qoi");
  return Observation{x_ex, q};
}

const ModelSpec& pipe_model() {
  static const ModelSpec model = make_pipe();
  return model;
}

const ModelSpec& two_fluid_model() {
  static const ModelSpec model = make_two_fluid();
  return model;
}

const ModelSpec& find_model(std::string_view name) {
  if (name == "pipe") return pipe_model();
  if (name == "two_fluid") return two_fluid_model();
  throw ConfigError("unknown model '" + std::string(name) + "'");
}

std::vector<std::string> model_names() { return {"pipe", "two_fluid"}; }

} // namespace lurk
