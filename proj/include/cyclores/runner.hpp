#pragma once

#include "cyclores/config.hpp"

#include <exception>
#include <string>
#include <vector>

namespace cyclores {

/// Command-line overrides applied on top of a parsed config.
struct RunOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  /// t1 - t0 for time-domain modes, cyclotron periods for scan
  std::optional<double> horizon;
  std::optional<Tolerance> tol;
};

ExperimentConfig apply_overrides(ExperimentConfig config, const RunOverrides& overrides);

struct RunResult {
  std::vector<std::string> files;  // written, relative to the output directory
  std::string manifest_path;
};

/// Runs the configured mode, writing CSVs, plot data and manifest.json into config.out.
RunResult run(const ExperimentConfig& config);

/// Short class name of a library error ("ParseError", ...), "Error" otherwise.
std::string error_kind(const std::exception& e);

/// Machine-readable error record {"error": kind, "message": ...} written to dir/error.json.
void write_error_record(const std::string& dir, const std::exception& e);

}  // namespace cyclores
