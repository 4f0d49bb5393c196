#pragma once

#include "cyclores/analysis.hpp"

namespace cyclores {

struct GuidingFrame {
  Vec2 X;  // guiding center
  Vec2 R;  // gyroradius vector, q = X + R
  double chi;       // arg X
  double vartheta;  // arg R
  /// |X| = 0 to rounding: chi kept at the previous value (0 without one)
  bool undefined_angle = false;
};

/// Frame at one state. With `prev`, chi and vartheta take the branch nearest to prev's.
GuidingFrame guiding_frame(const ModelParams& params, const CartesianState& state, double t,
                           const GuidingFrame* prev = nullptr);

/// |X|^2 = (2I + |a| - a)/b and |R|^2 = (2I + |a| + a)/b.
double x_norm_squared(const ModelParams& params, double I, double t);
double r_norm_squared(const ModelParams& params, double I, double t);

struct GuidingSeries {
  std::vector<double> times;
  std::vector<GuidingFrame> frames;
  std::vector<double> H;
  std::string params_digest;
};

/// Frames along a cartesian or polar trajectory; ParameterError when consecutive samples are
/// more than a quarter cyclotron period apart.
GuidingSeries guiding_series(const ModelParams& params, const Trajectory& tr);

/// t, X1, X2, R1, R2, absX, absR, chi, vartheta, H.
CsvTable guiding_table(const GuidingSeries& series);

struct EnergyRate {
  std::vector<double> times;
  std::vector<double> H;
  AsymptoticFit fit;
  double gamma_fit;
  double phi_infty;
  double gamma_formula;  // b * C evaluated at the fitted phi_infty
};

/// Tail fit of H(t); NotAccelerating unless the slope is significantly positive.
EnergyRate energy_and_rate(const ModelParams& params, const Trajectory& tr,
                           double window_fraction = 0.5);

struct XRGrowthReport {
  double gamma;
  double target;  // 2 gamma / b^2
  AsymptoticFit X2;
  AsymptoticFit R2;
  double rel_err_X;
  double rel_err_R;
  double ratio_XR;  // |X| / |R| at the last sample
};

/// Slopes of |X|^2 and |R|^2 against 2 gamma / b^2.
XRGrowthReport xr_growth_check(const ModelParams& params, const GuidingSeries& series,
                               double gamma, double window_fraction = 0.5);
/// gamma taken from energy_and_rate.
XRGrowthReport xr_growth_check(const ModelParams& params, const Trajectory& tr,
                               double window_fraction = 0.5);

/// chi' = |R| a' cos(phi) / (|X| b r^2).
double chi_eom_rhs(const ModelParams& params, const CartesianState& state, double t);

/// D = (1/2) sum(a_k sin k xi + b_k cos k xi) / sum(a_k cos k xi - b_k sin k xi), with
/// f' = sum(a_k cos kt + b_k sin kt).
double log_drift_constant(const ModelParams& params, double xi);

struct ChiDriftReport {
  double D_fit;
  double D_formula;
  double rel_err;
  double chi_infty;
};

/// chi(t) ~ D log(b t) + chi(inf) over the tail window, against the closed form at xi.
ChiDriftReport chi_drift_check(const ModelParams& params, const GuidingSeries& series, double xi,
                               double window_fraction = 0.5);

struct KickLocalization {
  double in_window;  // H gained inside the windows
  double total;      // H gained over the periods
  double fraction;
  std::size_t periods;
};

/// Integrates `periods` cyclotron periods from (state, t0) and splits the H gain between the
/// windows |b t + phi_infty + pi/2| < half_width (mod 2 pi) and the rest.
KickLocalization kick_localization(const ModelParams& params, const CartesianState& state,
                                   double t0, double phi_infty, std::size_t periods,
                                   double half_width = 0.3, Tolerance tol = {1e-11, 1e-13});

}  // namespace cyclores
