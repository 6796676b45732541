#include "lurk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "lurk/distributions.hpp"
#include "lurk/errors.hpp"

namespace lurk {

PreparedExperiment PreparedExperiment::prepare(const ModelSpec& model, const ExperimentSetup& setup,
                                               double alpha) {
  setup.validate(model);
  PreparedExperiment out;
  out.model = &model;
  out.setup = setup;
  std::optional<DimMatrix> d_pin;
  if (!setup.pinned.empty()) {
    d_pin = setup.d_pinned(model);
    out.w_pin = pinned_complement(*d_pin);
  }
  out.detection = DetectionConfig::canonical(setup.d_exposed(model), model.dq, setup.design(model),
                                             alpha, d_pin, model.log_base);
  return out;
}

Eigen::Index PreparedExperiment::effective_dims() const {
  return w_pin ? w_pin->cols() : detection.d_ex.dims();
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> simulate_sample(const PreparedExperiment& experiment,
                                                            Eigen::Index n, RngStream& rng) {
  Eigen::MatrixXd x = sample_design(experiment.detection.design, n, rng);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q(i) = evaluate(*experiment.model, experiment.setup, x.row(i).transpose(), rng).q_obs;
  }
  return {std::move(x), std::move(q)};
}

ReplicationResult run_replication(const PreparedExperiment& experiment, Eigen::Index n, RngStream& rng) {
  const auto [x, q] = simulate_sample(experiment, n, rng);
  const auto scores = stein_scores(x, q, experiment.detection);
  ReplicationResult out;
  try {
    const TestReport report = experiment.w_pin
                                  ? run_pinned_test(scores, *experiment.w_pin, experiment.detection.alpha)
                                  : run_test(scores, experiment.detection.alpha);
    out.p_value = report.p_value;
    out.reject = report.reject;
    out.nu_hat = report.nu_hat;
  } catch (const SingularCovariance&) {
    out.degenerate = true;
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    out.nu_hat = Eigen::VectorXd::Constant(experiment.detection.d_ex.dims(),
                                           std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

RngStream replication_stream(std::uint64_t seed, Eigen::Index n, double tau, std::uint64_t rep) {
  return RngStream::derive(seed, {static_cast<std::uint64_t>(n), std::bit_cast<std::uint64_t>(tau), rep});
}

namespace {

CellResult summarize(const std::string& model, const std::string& case_name, Eigen::Index n, double tau,
                     const std::vector<ReplicationResult>& reps, Eigen::Index nu_dims) {
  CellResult cell;
  cell.model = model;
  cell.case_name = case_name;
  cell.n = n;
  cell.tau = tau;
  cell.mean_nu_hat = Eigen::VectorXd::Zero(nu_dims);
  double sum = 0.0;
  for (const auto& r : reps) {
    cell.p_values.push_back(r.p_value);
    if (r.degenerate) {
      ++cell.degenerate;
      continue;
    }
    ++cell.trials;
    if (r.reject) ++cell.rejections;
    sum += r.p_value;
    cell.mean_nu_hat += r.nu_hat;
  }
  cell.failures = cell.trials - cell.rejections;
  if (cell.trials == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    cell.rate = cell.wilson_lo = cell.wilson_hi = cell.pvalue_mean = cell.pvalue_var = nan;
    cell.mean_nu_hat.setConstant(nan);
    return cell;
  }
  const double trials = static_cast<double>(cell.trials);
  cell.rate = static_cast<double>(cell.rejections) / trials;
  std::tie(cell.wilson_lo, cell.wilson_hi) = wilson_interval(cell.rejections, cell.trials, 0.95);
  cell.pvalue_mean = sum / trials;
  double ss = 0.0;
  for (const auto& r : reps) {
    if (!r.degenerate) ss += (r.p_value - cell.pvalue_mean) * (r.p_value - cell.pvalue_mean);
  }
  cell.pvalue_var = cell.trials > 1 ? ss / (trials - 1.0) : 0.0;
  cell.mean_nu_hat /= trials;
  return cell;
}

} // namespace

std::vector<CellResult> run_sweep(const SweepConfig& cfg) {
  const ModelSpec& model = cfg.model_spec ? *cfg.model_spec : find_model(cfg.model);
  const auto experiment = PreparedExperiment::prepare(model, cfg.setup, cfg.alpha);
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  if (cfg.n_grid.empty() || cfg.tau_grid.empty()) throw ConfigError("sweep grids must be nonempty");
  for (const auto n : cfg.n_grid) {
    if (n <= experiment.effective_dims()) {
      throw ConfigError("every n must exceed the test dimension " +
                        std::to_string(experiment.effective_dims()));
    }
  }
  for (const auto tau : cfg.tau_grid) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("tau values must be finite and >= 0");
  }

  struct Cell {
    Eigen::Index n;
    double tau;
    PreparedExperiment experiment;
  };
  std::vector<Cell> cells;
  for (const auto n : cfg.n_grid) {
    for (const auto tau : cfg.tau_grid) {
      PreparedExperiment e = experiment;
      e.setup.tau = tau;
      cells.push_back({n, tau, std::move(e)});
    }
  }

  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<std::vector<ReplicationResult>> results(cells.size(), std::vector<ReplicationResult>(reps));
  const std::size_t total = cells.size() * reps;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t c = job / reps;
      const std::size_t r = job % reps;
      try {
        auto rng = replication_stream(cfg.seed, cells[c].n, cells[c].tau, r);
        results[c][r] = run_replication(cells[c].experiment, cells[c].n, rng);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };
  const int threads = std::max(1, cfg.parallelism);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  const std::string case_name = cfg.case_name.empty() ? cfg.setup.label(model) : cfg.case_name;
  std::vector<CellResult> out;
  out.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out.push_back(summarize(model.name, case_name, cells[c].n, cells[c].tau, results[c],
                            experiment.detection.d_ex.dims()));
  }
  return out;
}

std::vector<std::pair<double, double>> pvalue_ecdf(std::vector<double> p_values) {
  if (p_values.empty()) throw DomainError("ECDF of an empty sample");
  std::sort(p_values.begin(), p_values.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(p_values.size());
  const double n = static_cast<double>(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    out.emplace_back(p_values[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

double ks_uniform_distance(std::span<const double> p_values) {
  if (p_values.empty()) throw DomainError("KS distance of an empty sample");
  std::vector<double> sorted(p_values.begin(), p_values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double u = std::clamp(sorted[i], 0.0, 1.0);
    dist = std::max({dist, static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n});
  }
  return dist;
}

double ks_critical(std::size_t n, double level) {
  // c(alpha) = sqrt(-ln(alpha / 2) / 2)
  return std::sqrt(-0.5 * std::log(0.5 * level)) / std::sqrt(static_cast<double>(n));
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw IoError("failed to format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw IoError("invalid number '" + std::string(text) + "'");
  }
  return value;
}

std::string csv_header(Eigen::Index nu_dims) {
  std::string h = "model,case,n,tau,N,rejections,degenerate,rate,wilson_lo,wilson_hi,pvalue_mean,pvalue_var";
  for (Eigen::Index i = 1; i <= nu_dims; ++i) h += ",nu_hat_" + std::to_string(i);
  return h;
}

std::string format_csv(const std::vector<CellResult>& results, Eigen::Index nu_dims) {
  std::string out = csv_header(nu_dims) + "\n";
  for (const auto& c : results) {
    if (c.mean_nu_hat.size() != nu_dims) throw DimensionMismatch("nu_hat width differs from header");
    out += c.model + ',' + c.case_name + ',' + std::to_string(c.n) + ',' + format_double(c.tau) + ',' +
           std::to_string(c.trials) + ',' + std::to_string(c.rejections) + ',' +
           std::to_string(c.degenerate) + ',' + format_double(c.rate) + ',' +
           format_double(c.wilson_lo) + ',' + format_double(c.wilson_hi) + ',' +
           format_double(c.pvalue_mean) + ',' + format_double(c.pvalue_var);
    for (Eigen::Index i = 0; i < nu_dims; ++i) out += ',' + format_double(c.mean_nu_hat(i));
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

long parse_long(std::string_view text) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw IoError("invalid integer '" + std::string(text) + "'");
  }
  return value;
}

constexpr std::size_t kFixedColumns = 12;

} // namespace

std::vector<CellResult> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing CSV header");
  const auto header = split(line, ',');
  if (header.size() < kFixedColumns) throw IoError("CSV header too short");
  const auto nu_dims = static_cast<Eigen::Index>(header.size() - kFixedColumns);
  if (line != csv_header(nu_dims)) throw IoError("unexpected CSV header: " + line);

  std::vector<CellResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw IoError("CSV row has wrong field count");
    CellResult c;
    c.model = std::string(f[0]);
    c.case_name = std::string(f[1]);
    c.n = parse_long(f[2]);
    c.tau = parse_double(f[3]);
    c.trials = parse_long(f[4]);
    c.rejections = parse_long(f[5]);
    c.degenerate = parse_long(f[6]);
    c.failures = c.trials - c.rejections;
    c.rate = parse_double(f[7]);
    c.wilson_lo = parse_double(f[8]);
    c.wilson_hi = parse_double(f[9]);
    c.pvalue_mean = parse_double(f[10]);
    c.pvalue_var = parse_double(f[11]);
    c.mean_nu_hat.resize(nu_dims);
    for (Eigen::Index i = 0; i < nu_dims; ++i) {
      c.mean_nu_hat(i) = parse_double(f[kFixedColumns + static_cast<std::size_t>(i)]);
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

} // namespace

void emit_csv(const std::vector<CellResult>& results, Eigen::Index nu_dims,
              const std::filesystem::path& path) {
  write_text(path, format_csv(results, nu_dims));
}

std::vector<CellResult> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void emit_ecdf(const std::vector<std::pair<double, double>>& ecdf, const std::filesystem::path& path) {
  std::string text = "p_value,ecdf\n";
  for (const auto& [p, f] : ecdf) text += format_double(p) + ',' + format_double(f) + '\n';
  write_text(path, text);
}

} // namespace lurk
