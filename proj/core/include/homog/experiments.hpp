#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "homog/config.hpp"

namespace homog {

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int threads = 1;
  std::uint64_t seed = 0;  // periodicity spot-checks only; solvers are deterministic
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 validation error, 2 solver error
  std::vector<std::filesystem::path> outputs;
  std::string error;
};

/// Loads and validates the config, runs the experiment, and writes its CSV
/// outputs plus a manifest.json (config hash, version, runtimes, output
/// list). The manifest is written even when the run fails; the failure is
/// recorded in its `error` field. Identical configs produce byte-identical
/// CSV files: 17 significant digits, LF line endings, fixed row order.
RunResult run_experiment(const std::filesystem::path& config_path,
                         const RunOptions& options);

struct ConvergenceRow {
  double eta = 0.0;
  double max_err = 0.0;
  double l2_err = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool monotone_decreasing = false;  // strictly, in the max norm
  std::string text;
};

/// Renders the (eta, max_err, l2_err) table and the monotone-decrease check.
/// Requires at least two rows.
ConvergenceReport report_convergence(const std::vector<ConvergenceRow>& rows);

/// 17-significant-digit formatting used for all CSV payloads.
std::string format_value(double v);

/// FNV-1a 64-bit hash, hex-encoded; used to fingerprint configs.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace homog
