#pragma once

#include "cyclores/model.hpp"
#include "cyclores/ode.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cyclores {

enum class Mode { simulate, averaged, decoupled, analyze, scan, periodmap };
std::string_view mode_name(Mode m);
std::optional<Mode> mode_from_name(std::string_view name);

/// Plain-text experiment description: one `key value...` per line, `#` starts a comment.
/// Profile terms are `cos k value` / `sin k value`.
struct ExperimentConfig {
  Mode mode = Mode::simulate;
  ModelParams params;
  /// p_theta given explicitly; otherwise it is derived from q0, v0 at t0
  bool p_theta_explicit = false;

  std::optional<Vec2> q0, v0;
  std::optional<double> I0, phi0;   // action-angle start
  std::optional<double> chi0, J0;   // averaged start
  std::optional<double> F0;         // decoupled start (phase from phi0)

  double t0 = 0.0;
  double t1 = 150.0;
  std::size_t samples = 1001;
  Tolerance tol{1e-10, 1e-12};
  std::uint64_t seed = 1;

  // scan
  std::vector<std::pair<std::int64_t, std::int64_t>> ratios;
  std::uint64_t seeds = 20;
  double scan_periods = 1e4;

  // periodmap: constant rho and a, list of starting values
  double pm_rho = 1.0;
  double pm_a = 1.0;
  std::vector<double> pm_h0;
  bool pm_full = true;

  // analyze
  std::string trajectory;

  std::string out = "out";
  std::size_t plot_points = 2000;

  bool operator==(const ExperimentConfig& o) const;
};

/// ParseError on malformed lines (the message lists every bad line; the position is the
/// first one); ValidationError listing every violated parameter invariant.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Text that parses back to an equal config.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace cyclores
