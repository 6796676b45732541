#include "lurk/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "lurk/errors.hpp"
#include "lurk/harness.hpp"

namespace lurk {

namespace {

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
  return out;
}

/// "rho_F^1 U_F^2 d_P^-1", skipping zero exponents.
std::string power_product(const RationalVector& exps, const std::vector<std::string>& names) {
  std::string out;
  for (Eigen::Index i = 0; i < exps.size(); ++i) {
    if (exps(i).is_zero()) continue;
    if (!out.empty()) out += ' ';
    out += names[static_cast<std::size_t>(i)] + '^' + exps(i).str();
  }
  return out.empty() ? "1" : out;
}

std::string dims_text(const DimVector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v.exponents(i).is_zero()) continue;
    if (!out.empty()) out += ' ';
    out += v.basis[static_cast<std::size_t>(i)];
    if (v.exponents(i) != Rational(1)) out += '^' + v.exponents(i).str();
  }
  return "[" + (out.empty() ? std::string("1") : out) + "]";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string vector_text(const Eigen::VectorXd& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v(i));
  return out + ")";
}

void print_header(const RunConfig& cfg, std::ostream& out) {
  out << "model: " << cfg.model.value_or("(declared in config)") << '\n';
  out << "qoi: " << cfg.qoi_name << ' ' << dims_text(cfg.dq) << '\n';
  out << "exposed: " << join(cfg.exposed) << '\n';
  if (!cfg.lurking.empty()) out << "lurking (declared): " << join(cfg.lurking) << '\n';
  if (!cfg.pinned.empty()) out << "pinned: " << join(cfg.pinned) << '\n';
}

bool report_homogeneity(const RunConfig& cfg, std::ostream& out) {
  const auto verdict = check_homogeneity(cfg.d_exposed(), cfg.dq);
  if (verdict.homogeneous) return true;
  out << "LURKING VARIABLE DETECTED (analytic): missing dimensions [" << join(verdict.missing_dimensions)
      << "]\n";
  return false;
}

} // namespace

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  print_header(cfg, out);
  const DimMatrix d_ex = cfg.d_exposed();
  out << "rank(D_ex) = " << rank(d_ex) << " of " << d_ex.dims() << " base dimensions\n";
  if (!report_homogeneity(cfg, out)) return kDetection;
  out << "HOMOGENEOUS: the exposed variables can non-dimensionalize " << cfg.qoi_name << '\n';
  if (!cfg.pinned.empty()) {
    const auto r = rank(cfg.d_pinned());
    out << "rank(D_pin) = " << r << "; pinned test dimension " << d_ex.dims() - r << '\n';
    if (r == d_ex.dims()) out << "pinned variables span every base dimension; no test is possible\n";
  }
  return kNoDetection;
}

int cmd_nondim(const RunConfig& cfg, std::ostream& out) {
  print_header(cfg, out);
  if (!report_homogeneity(cfg, out)) return kDetection;
  const DimMatrix d_ex = cfg.d_exposed();
  const RationalVector w = cfg.w_ex ? *cfg.w_ex : nondim_vector(d_ex, cfg.dq);
  out << "w_ex:";
  for (Eigen::Index i = 0; i < w.size(); ++i) out << ' ' << w(i).str();
  out << '\n';
  out << "non-dimensionalizing factor: " << power_product(w, cfg.exposed) << '\n';
  const auto basis = nullspace_basis(d_ex);
  out << "pi groups: " << basis.size() << '\n';
  for (std::size_t k = 0; k < basis.size(); ++k) {
    out << "  pi_" << k + 1 << " = " << power_product(basis[k], cfg.exposed) << '\n';
  }
  return kNoDetection;
}

int cmd_detect(const RunConfig& cfg, const DataTable& data, std::ostream& out) {
  if (!report_homogeneity(cfg, out)) {
    out << "test skipped: the exposed set cannot non-dimensionalize " << cfg.qoi_name << '\n';
    return kDetection;
  }
  const DetectionConfig dcfg = cfg.detection();
  data.require(cfg.exposed);

  const Eigen::Index n = data.rows();
  const auto p = static_cast<Eigen::Index>(cfg.exposed.size());
  const double log_base = std::log(cfg.log_base);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::Index col = data.column(cfg.exposed[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = data.values(i, col);
      if (!(v > 0.0)) {
        throw DomainError("column '" + cfg.exposed[static_cast<std::size_t>(j)] +
                          "' has a non-positive value; inputs must be positive physical quantities");
      }
      x(i, j) = std::log(v) / log_base;
    }
  }
  const Eigen::VectorXd q = data.values.col(data.column(data.qoi_column));
  const TestReport report = detect(x, q, dcfg);

  out << "seed: " << cfg.seed << '\n';
  out << "n = " << report.n << ", test dimension " << report.dof_num << (report.pinned ? " (pinned)" : "")
      << '\n';
  out << "T^2 = " << format_double(report.t2) << ", critical = " << format_double(report.critical)
      << " at alpha = " << format_double(report.alpha) << '\n';
  out << "p-value = " << format_double(report.p_value) << '\n';
  out << "nu_hat = " << vector_text(report.nu_hat) << " over [" << join(cfg.d.basis()) << "]\n";
  out << (report.reject ? "LURKING VARIABLE DETECTED (statistical): reject H0"
                        : "no evidence of a lurking variable: fail to reject H0")
      << '\n';
  if (cfg.report_path) write_file(*cfg.report_path, format_report(report, cfg.seed));
  return report.reject ? kDetection : kNoDetection;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const ModelSpec spec = cfg.model_spec();
  PreparedExperiment experiment;
  experiment.model = &spec;
  experiment.setup = cfg.setup(spec);
  experiment.detection.design = experiment.setup.design(spec);

  auto rng = replication_stream(cfg.seed, cfg.n, cfg.tau, 0);
  const auto [x, q] = simulate_sample(experiment, cfg.n, rng);

  DataTable table;
  table.columns = cfg.exposed;
  table.columns.push_back(cfg.qoi_name);
  table.qoi_column = cfg.qoi_name;
  table.values.resize(cfg.n, static_cast<Eigen::Index>(table.columns.size()));
  table.values.leftCols(x.cols()) = (x.array() * std::log(spec.log_base)).exp();
  table.values.col(x.cols()) = q;

  if (cfg.data_path) {
    table.write(*cfg.data_path);
    out << "seed: " << cfg.seed << '\n';
    out << "wrote " << cfg.n << " rows to " << cfg.data_path->string() << '\n';
  } else {
    out << table.to_csv();
  }
  return kNoDetection;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const SweepConfig sweep = cfg.sweep();
  const auto results = run_sweep(sweep);
  const Eigen::Index nu_dims = cfg.d.dims();
  if (cfg.csv_path) {
    emit_csv(results, nu_dims, *cfg.csv_path);
    out << "seed: " << cfg.seed << '\n';
    out << "wrote " << results.size() << " cells to " << cfg.csv_path->string() << '\n';
    for (const auto& c : results) {
      out << "  n=" << c.n << " tau=" << format_double(c.tau) << " rate=" << format_double(c.rate) << " ["
          << format_double(c.wilson_lo) << ", " << format_double(c.wilson_hi) << "]"
          << (c.degenerate ? " degenerate=" + std::to_string(c.degenerate) : std::string()) << '\n';
    }
  } else {
    out << format_csv(results, nu_dims);
  }
  if (cfg.ecdf_path) {
    std::vector<double> pooled;
    for (const auto& c : results) {
      for (const double p : c.p_values) {
        if (!std::isnan(p)) pooled.push_back(p);
      }
    }
    if (!pooled.empty()) emit_ecdf(pvalue_ecdf(std::move(pooled)), *cfg.ecdf_path);
  }
  return kNoDetection;
}

int cmd_power(double k, const std::vector<Eigen::Index>& n_grid, Eigen::Index d, double alpha,
              std::ostream& out) {
  out << "# k=" << format_double(k) << " d=" << d << " alpha=" << format_double(alpha) << '\n';
  out << "n,noncentrality,power\n";
  for (const auto n : n_grid) {
    out << n << ',' << format_double(noncentrality(k, n)) << ',' << format_double(predict_power(k, n, d, alpha))
        << '\n';
  }
  return kNoDetection;
}

int cmd_models(std::ostream& out) {
  for (const auto& name : model_names()) {
    const ModelSpec& m = find_model(name);
    out << m.name << ": qoi " << m.qoi_name << ' ' << dims_text(m.dq) << ", log base "
        << (m.log_base == std::numbers::e ? std::string("e") : format_double(m.log_base)) << '\n';
    for (Eigen::Index j = 0; j < m.d.vars(); ++j) {
      out << "  " << std::left << std::setw(8) << m.variable_names[static_cast<std::size_t>(j)] << ' '
          << std::setw(14) << dims_text(m.d.column(j)) << " mu=" << format_double(m.default_design.mu(j))
          << " sigma=" << format_double(m.default_design.sigma(j)) << '\n';
    }
  }
  return kNoDetection;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lurking-variable detection through dimensional analysis", "lurk"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out_path, "Primary output file of the command");
  app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "A-priori homogeneity check (exit 2 = lurking)");
  auto* nondim = app.add_subcommand("nondim", "Print w_ex and a pi-group basis");
  auto* detect_cmd = app.add_subcommand("detect", "Hotelling test on measured data (exit 2 = lurking)");
  std::string data_path;
  detect_cmd->add_option("data", data_path, "CSV of physical-unit measurements");
  auto* simulate = app.add_subcommand("simulate", "Virtual experiment data from a built-in model");
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo rejection rates over (n, tau)");
  auto* power = app.add_subcommand("power", "Predicted power from the noncentral F");
  std::optional<double> k;
  std::optional<Eigen::Index> d;
  std::vector<Eigen::Index> n_grid;
  std::optional<double> alpha;
  power->add_option("--k", k, "Signal strength nu^T E[g g^T]^-1 nu");
  power->add_option("--d", d, "Test dimension");
  power->add_option("--n", n_grid, "Sample sizes");
  power->add_option("--alpha", alpha, "Significance level");
  auto* models = app.add_subcommand("models", "List built-in models");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kNoDetection;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }

  try {
    if (models->parsed()) return cmd_models(out);

    std::optional<RunConfig> cfg;
    if (!config_path.empty()) cfg = RunConfig::load(config_path);
    if (cfg) {
      if (seed) cfg->seed = *seed;
      if (threads) cfg->threads = *threads;
    }

    if (power->parsed()) {
      const double pk = k.value_or(cfg ? cfg->power_k : 0.0);
      const double palpha = alpha.value_or(cfg ? cfg->alpha : 0.05);
      std::vector<Eigen::Index> grid = !n_grid.empty() ? n_grid
                                       : (cfg && !cfg->power_n.empty()) ? cfg->power_n
                                                                        : std::vector<Eigen::Index>{100, 400, 1600, 6400};
      Eigen::Index pd = 0;
      if (d) {
        pd = *d;
      } else if (cfg && cfg->power_d) {
        pd = *cfg->power_d;
      } else if (cfg) {
        pd = cfg->d.dims() - (cfg->pinned.empty() ? 0 : rank(cfg->d_pinned()));
      } else {
        throw ConfigError("power needs --d or a config");
      }
      if (!out_path.empty()) {
        std::ostringstream text;
        const int code = cmd_power(pk, grid, pd, palpha, text);
        write_file(out_path, text.str());
        return code;
      }
      return cmd_power(pk, grid, pd, palpha, out);
    }

    if (!cfg) throw ConfigError("this command needs --config");

    auto text_command = [&](auto&& fn) {
      if (out_path.empty()) return fn(out);
      std::ostringstream text;
      const int code = fn(text);
      write_file(out_path, text.str());
      return code;
    };
    if (analyze->parsed()) return text_command([&](std::ostream& o) { return cmd_analyze(*cfg, o); });
    if (nondim->parsed()) return text_command([&](std::ostream& o) { return cmd_nondim(*cfg, o); });
    if (detect_cmd->parsed()) {
      if (!out_path.empty()) cfg->report_path = out_path;
      if (!data_path.empty()) cfg->data_path = data_path;
      if (!cfg->data_path) throw ConfigError("detect needs a data file (argument or config 'data')");
      const auto table = DataTable::read(*cfg->data_path, cfg->qoi_name);
      return cmd_detect(*cfg, table, out);
    }
    if (simulate->parsed()) {
      if (!out_path.empty()) cfg->data_path = out_path;
      return cmd_simulate(*cfg, out);
    }
    if (sweep->parsed()) {
      if (!out_path.empty()) cfg->csv_path = out_path;
      return cmd_sweep(*cfg, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

} // namespace lurk
