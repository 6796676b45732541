#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lurk/errors.hpp"
#include "lurk/harness.hpp"

using namespace lurk;

namespace {

SweepConfig null_pipe(long reps) {
  SweepConfig cfg;
  cfg.model = "pipe";
  cfg.setup = ExperimentSetup::from_names(pipe_model(), {});
  cfg.n_grid = {60, 120};
  cfg.tau_grid = {0.0, 3.0e8};
  cfg.replications = reps;
  cfg.seed = 17;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lurk_harness_" + name);
}

} // namespace

TEST(Sweep, ParallelismDoesNotChangeResults) {
  auto cfg = null_pipe(12);
  const auto serial = run_sweep(cfg);
  cfg.parallelism = 4;
  const auto parallel = run_sweep(cfg);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].p_values, parallel[i].p_values);
    EXPECT_EQ(serial[i].rejections, parallel[i].rejections);
  }
  EXPECT_EQ(format_csv(serial, 3), format_csv(parallel, 3));
}

TEST(Sweep, CellsAreIndependentOfGrid) {
  auto cfg = null_pipe(8);
  const auto full = run_sweep(cfg);
  cfg.n_grid = {120};
  cfg.tau_grid = {3.0e8};
  const auto single = run_sweep(cfg);
  ASSERT_EQ(single.size(), 1u);
  const auto& match = full.back();
  EXPECT_EQ(match.n, 120);
  EXPECT_EQ(match.tau, 3.0e8);
  EXPECT_EQ(match.p_values, single[0].p_values);
}

TEST(Sweep, MatchesManualReplications) {
  auto cfg = null_pipe(3);
  cfg.n_grid = {60};
  cfg.tau_grid = {0.0};
  const auto cell = run_sweep(cfg).at(0);
  const auto exp = PreparedExperiment::prepare(pipe_model(), cfg.setup, cfg.alpha);
  for (long r = 0; r < 3; ++r) {
    auto rng = replication_stream(17, 60, 0.0, static_cast<std::uint64_t>(r));
    EXPECT_EQ(run_replication(exp, 60, rng).p_value, cell.p_values[static_cast<std::size_t>(r)]);
  }
}

TEST(Sweep, SingleReplicationCell) {
  auto cfg = null_pipe(1);
  cfg.n_grid = {60};
  cfg.tau_grid = {0.0};
  const auto cells = run_sweep(cfg);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].trials, 1);
  EXPECT_EQ(cells[0].pvalue_var, 0.0);
  EXPECT_EQ(cells[0].pvalue_mean, cells[0].p_values[0]);
  EXPECT_TRUE(cells[0].rate == 0.0 || cells[0].rate == 1.0);
}

TEST(Sweep, RejectsBadGrids) {
  auto cfg = null_pipe(2);
  cfg.n_grid = {3};
  EXPECT_THROW(run_sweep(cfg), ConfigError);
  cfg = null_pipe(0);
  EXPECT_THROW(run_sweep(cfg), ConfigError);
  cfg = null_pipe(2);
  cfg.tau_grid = {-1.0};
  EXPECT_THROW(run_sweep(cfg), ConfigError);
  cfg = null_pipe(2);
  cfg.n_grid.clear();
  EXPECT_THROW(run_sweep(cfg), ConfigError);
}

TEST(Csv, HeaderAndRow) {
  EXPECT_EQ(csv_header(3),
            "model,case,n,tau,N,rejections,degenerate,rate,wilson_lo,wilson_hi,"
            "pvalue_mean,pvalue_var,nu_hat_1,nu_hat_2,nu_hat_3");
  auto cfg = null_pipe(4);
  cfg.n_grid = {60};
  cfg.tau_grid = {0.0};
  const auto text = format_csv(run_sweep(cfg), 3);
  std::istringstream lines(text);
  std::string header;
  std::string row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, csv_header(3));
  EXPECT_EQ(row.rfind("pipe,null,60,0,4,", 0), 0u) << row;
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
}

TEST(Csv, EmptyResultsGiveHeaderOnly) {
  EXPECT_EQ(format_csv({}, 2), csv_header(2) + "\n");
  EXPECT_TRUE(parse_csv(format_csv({}, 2)).empty());
}

TEST(Csv, RoundTripIsByteIdentical) {
  auto cfg = null_pipe(5);
  const auto results = run_sweep(cfg);
  const auto a = temp_file("a.csv");
  const auto b = temp_file("b.csv");
  emit_csv(results, 3, a);
  emit_csv(read_csv(a), 3, b);
  EXPECT_EQ(slurp(a), slurp(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Csv, RejectsForeignHeader) {
  EXPECT_THROW(parse_csv("model,n\npipe,3\n"), IoError);
}

TEST(Numbers, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 3.0e8, 5e-324, -2.5, 0.0}) {
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_TRUE(std::isnan(parse_double(format_double(std::nan("")))));
}

TEST(Ecdf, Basics) {
  const auto single = pvalue_ecdf({0.5});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].first, 0.5);
  EXPECT_EQ(single[0].second, 1.0);
  const auto three = pvalue_ecdf({0.9, 0.1, 0.4});
  EXPECT_EQ(three[0].first, 0.1);
  EXPECT_DOUBLE_EQ(three[1].second, 2.0 / 3.0);
  EXPECT_THROW(pvalue_ecdf({}), DomainError);
}

TEST(Ecdf, KolmogorovDistance) {
  const std::vector<double> grid{0.125, 0.375, 0.625, 0.875};
  EXPECT_DOUBLE_EQ(ks_uniform_distance(grid), 0.125);
  EXPECT_NEAR(ks_critical(100), 0.16276, 1e-4);
}

TEST(Ecdf, NullPipeIsUniform) {
  auto cfg = null_pipe(300);
  cfg.n_grid = {100};
  cfg.tau_grid = {0.0};
  const auto cell = run_sweep(cfg).at(0);
  EXPECT_EQ(cell.degenerate, 0);
  EXPECT_LT(ks_uniform_distance(cell.p_values), ks_critical(cell.p_values.size()));
}
