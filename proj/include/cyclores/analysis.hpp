#pragma once

#include "cyclores/actionangle.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cyclores {

enum class ResidualClass { bounded, log, log_squared, other };
std::string_view residual_class_name(ResidualClass c);

struct AsymptoticFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
  std::optional<double> phi_infty;
  double t_lo = 0;
  double t_hi = 0;
  ResidualClass residual_class = ResidualClass::bounded;
  double rms_residual = 0;
  std::size_t samples = 0;  // points used in the tail fit
};

/// Least-squares line over the tail window [window_fraction * T, T] after log-spaced
/// resampling. The residual class compares the line against the line augmented by log t or
/// log^2 t over the whole series (t > 0).
AsymptoticFit fit_linear_growth(std::span<const double> t, std::span<const double> y,
                                double window_fraction = 0.5);
AsymptoticFit fit_linear_growth(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                                double window_fraction = 0.5);

/// Ordinary least squares y ~ X beta; returns beta and the residual RMS.
struct LeastSquares {
  Eigen::VectorXd beta;
  double rms;
};
LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Indices of at most `count` samples spread logarithmically over [t_lo, t_hi].
std::vector<std::size_t> log_spaced_indices(std::span<const double> t, double t_lo, double t_hi,
                                            std::size_t count);

struct PhaseEstimate {
  double value;
  double error;  // jackknife standard error
  double spread;  // max - min of the block means
};

/// phi(inf) from the tail average of phi(t) - b t (last `tail_fraction` of samples), with a
/// jackknife error over blocks. NonConvergent when the block means spread more than
/// `max_spread`.
PhaseEstimate extract_phase(const ModelParams& params, const Trajectory& aa,
                            double tail_fraction = 0.5, double max_spread = 0.1);

struct ConjectureReport {
  AsymptoticFit fit;
  double C_fit;
  double phi_infty;
  double phi_stderr;
  double xi;
  double fprime;     // f'(-xi)
  double C_formula;  // -(eps Omega / 2) f'(-xi)
  double discrepancy;  // |C_fit - C_formula| / C_fit
  bool sign_ok;        // f'(-xi) < 0
};

/// NotAccelerating if the tail slope of I(t) is not significantly positive.
ConjectureReport conjecture_check(const ModelParams& params, const Trajectory& aa,
                                  double window_fraction = 0.5, double max_spread = 0.1);

/// Same report for a pulled-back averaged trajectory, using the averaged-profile formula.
ConjectureReport averaged_conjecture_check(const ModelParams& params, const ResonancePair& pair,
                                           const Trajectory& aa, double window_fraction = 0.5,
                                           double max_spread = 0.1);

/// Slope fit that throws NotAccelerating unless it is positive beyond 3 standard errors.
AsymptoticFit require_acceleration(std::span<const double> t, std::span<const double> y,
                                   double window_fraction = 0.5);

enum class ScanClass { accelerating, bounded, undecided, failed };
std::string_view scan_class_name(ScanClass c);

struct ScanCell {
  std::int64_t ratio_num;
  std::int64_t ratio_den;
  std::uint64_t seed;
  ScanClass classification = ScanClass::undecided;
  double C_fit = std::nan("");
  double C_formula = std::nan("");
  double phi_infty = std::nan("");
  double discrepancy = std::nan("");
  double I0 = 0;
  double phi0 = 0;
  double max_over_median = std::nan("");
  std::string error;
};

struct ScanOptions {
  std::uint64_t base_seed = 1;
  double I_min = 0.1;
  double I_max = 1.0;
  /// samples per cyclotron period (must exceed 4 for angle unwrapping)
  double samples_per_period = 8;
  Tolerance tol{1e-10, 1e-12};
  unsigned threads = 0;  // 0: CYCLORES_THREADS or hardware concurrency
};

/// Uniform double in [0, 1) from a 64-bit generator state.
double unit_uniform(std::uint64_t bits);

/// Classify one cell: template params with omega = b * num / den, random (I0, phi0) from
/// (base_seed, seed), integrated over `horizon` cyclotron periods.
ScanCell scan_cell(const ModelParams& params_template, std::int64_t num, std::int64_t den,
                   std::uint64_t seed, double horizon_periods, const ScanOptions& options);

/// Every (ratio, seed) cell, computed on a thread pool; the rows are in input order.
std::vector<ScanCell> resonance_scan(const ModelParams& params_template,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& ratios,
                                     std::uint64_t seeds, double horizon_periods,
                                     const ScanOptions& options = {});

/// Fraction of accelerating cells per ratio, in first-appearance order.
std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, double>> acceleration_fraction(
    const std::vector<ScanCell>& cells);

/// Threads allowed by CYCLORES_THREADS (or the hardware when unset).
unsigned scan_threads(unsigned requested = 0);

void write_scan_csv(std::ostream& os, const std::vector<ScanCell>& cells,
                    const std::string& provenance);

}  // namespace cyclores
