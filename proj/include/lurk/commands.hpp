#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lurk/config.hpp"

namespace lurk {

/// Exit codes shared by every command.
enum ExitCode : int { kNoDetection = 0, kError = 1, kDetection = 2 };

int cmd_analyze(const RunConfig& cfg, std::ostream& out);
int cmd_nondim(const RunConfig& cfg, std::ostream& out);
/// Writes the flat report to cfg.report_path when set.
int cmd_detect(const RunConfig& cfg, const DataTable& data, std::ostream& out);
/// Writes the table to cfg.data_path when set, otherwise to `out`.
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
/// Writes the CSV to cfg.csv_path when set, otherwise to `out`.
int cmd_sweep(const RunConfig& cfg, std::ostream& out);
int cmd_power(double k, const std::vector<Eigen::Index>& n_grid, Eigen::Index d, double alpha,
              std::ostream& out);
int cmd_models(std::ostream& out);

/// Full command line (args[0] is the program name). Errors are reported on
/// `err` and mapped to exit code 1.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lurk
