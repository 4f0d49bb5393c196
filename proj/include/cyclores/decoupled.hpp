#pragma once

#include "cyclores/dynamics.hpp"

#include <functional>

namespace cyclores {

/// F = 2I + a and the slow phase phi = (action-angle phase) - bt.
struct DecoupledState {
  double F;
  double phi;
};

/// F' = a a' / (F + sqrt(F^2 - a^2) sin(bt + phi)) with phi frozen.
double f_rhs_frozen_phase(const ModelParams& params, double F, double t, double phi);

/// phi' = -a a' cos(s) / (sqrt(F^2 - a^2)(F + sqrt(F^2 - a^2) sin s)), s = bt + phi.
double phi_rhs_prescribed_F(const ModelParams& params, double phi, double t, double F);
double phi_rhs_prescribed_F(const ModelParams& params, double phi, double t,
                            const std::function<double(double)>& F_of_t);

/// a cos s / (F + sqrt(F^2 - a^2) sin s), bounded by 1 in absolute value for F >= a > 0.
double kick_ratio(double F, double a, double s);

/// F + sqrt(F^2 - a^2) sin s without cancellation near sin s = -1.
double kick_denominator(double F, double a, double s);

/// Times in [t0, t1] where sin(bt + phi) = -1.
std::vector<double> kick_times(const ModelParams& params, double phi, double t0, double t1);

/// F(t) with the phase frozen at phi. Chart decoupled; the phi column is constant. One event
/// per kick is logged with the denominator value at its centre.
Trajectory integrate_frozen_phase(const ModelParams& params, double F0, double phi, double t0,
                                  double t1, const IntegrateOptions& options = {});

/// phi(t) driven by a prescribed F(t). Chart decoupled with F column F_of_t(t).
Trajectory integrate_prescribed_F(const ModelParams& params, double phi0,
                                  const std::function<double(double)>& F_of_t, double t0,
                                  double t1, const IntegrateOptions& options = {});

using ScalarFn = std::function<double(double)>;

struct PeriodMapResult {
  double h0;
  double h_end;
  double increment;
  double predicted_increment;
  /// false when h0 is below the sufficient existence condition (integration went ahead
  /// because rho >= 0 on the interval)
  bool bound_satisfied;
};

/// Solution of h' = rho / (h + sign sqrt(h^2 - a^2) cos t) over [t0, t1], rescaled time.
/// The increment is integrated directly so that it keeps full relative precision for large h0.
PeriodMapResult period_map_segment(const ScalarFn& rho, const ScalarFn& a, double h0, double t0,
                                   double t1, int sign, Tolerance tol = {1e-12, 1e-14});

/// h(pi/2) for h' = rho / (h - sqrt(h^2 - a^2) cos t), h(0) = h0.
PeriodMapResult half_period_map(const ScalarFn& rho, const ScalarFn& a, double h0,
                                Tolerance tol = {1e-12, 1e-14});
/// h(2pi) for h' = rho / (h + sqrt(h^2 - a^2) cos t), h(0) = h0.
PeriodMapResult full_period_map(const ScalarFn& rho, const ScalarFn& a, double h0,
                                Tolerance tol = {1e-12, 1e-14});

struct SlopePrediction {
  double F_slope;
  double I_slope;
  double fprime;  // f'(-xi)
  double xi;
  bool outside_proven_regime;  // nu > 1
};

/// Linear-growth law at limit phase phi_infty; SignError unless eps f'(-xi) < 0.
SlopePrediction predicted_slope(const ModelParams& params, double phi_infty);

/// t, F, phi.
CsvTable decoupled_table(const Trajectory& tr);
/// h0, h_end, increment, predicted_increment.
CsvTable period_map_table(const std::vector<PeriodMapResult>& results);

}  // namespace cyclores
