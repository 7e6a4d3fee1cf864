#pragma once

// JSON-driven experiment runner: one spec in, one CSV and one sidecar JSON out.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ehaoi/error.hpp"

namespace ehaoi {

enum class ExperimentKind { SteadyState, Threshold, AoiCurve, Optimize, Simulate, Sweep };

const char* to_string(ExperimentKind k);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides params.sim.seed
  std::optional<int> threads;         // overrides params.sim.threads
  bool quiet = false;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::SteadyState;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // formatted cells
  std::filesystem::path csv_path;
  std::filesystem::path sidecar_path;
  std::string resolved;  // sidecar document
};

// Process exit code for an error category: 2 bad-config, 3 out-of-regime,
// 4 non-convergence, 5 io.
int exit_code(ErrorKind kind);

// Category name written on the single stderr error line.
const char* error_category(ErrorKind kind);

// Shortest round-trip decimal text, independent of locale.
std::string format_number(double v);

ExperimentResult run_experiment(const std::string& spec_json, const RunOptions& opts);
ExperimentResult run_experiment_file(const std::filesystem::path& spec_path, const RunOptions& opts);

}  // namespace ehaoi
