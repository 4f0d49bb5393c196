#pragma once

#include "cyclores/dynamics.hpp"

namespace cyclores {

/// phi is unwrapped along trajectories.
struct ActionAngleState {
  double I;
  double phi;
};

struct RadialPoint {
  double r;
  double p_r;
};

struct ActionAngleRate {
  double dphi;
  double dI;
};

// Transforms at a frozen value of a(t); a > 0, b > 0.
ActionAngleState action_angle_at(double a, double b, double r, double p_r);
RadialPoint radial_at(double a, double b, const ActionAngleState& s);

ActionAngleState to_action_angle(const ModelParams& params, double r, double p_r, double t);
RadialPoint from_action_angle(const ModelParams& params, const ActionAngleState& s, double t);

/// Turning radii sqrt(2/b) (sqrt(I+a) -/+ sqrt(I)).
double r_minus(const ModelParams& params, double I, double t);
double r_plus(const ModelParams& params, double I, double t);

double hamiltonian_hc(const ModelParams& params, const ActionAngleState& s, double t);
/// DomainError at I <= 0, where the angle equation is singular.
ActionAngleRate eom_action_angle(const ModelParams& params, const ActionAngleState& s, double t);

Trajectory integrate(const ModelParams& params, const ActionAngleState& initial, double t0,
                     double t1, const IntegrateOptions& options = {});

/// Action-angle samples of a polar or cartesian trajectory. The angle is unwrapped by
/// continuation from the free rotation phi' = b, so samples must be closer than a quarter
/// cyclotron period.
Trajectory to_action_angle(const ModelParams& params, const Trajectory& tr);
/// Polar samples of an action-angle trajectory.
Trajectory to_polar(const ModelParams& params, const Trajectory& aa);

/// I, phi plus the derived r_minus, r_plus columns.
CsvTable actionangle_table(const ModelParams& params, const Trajectory& aa);

}  // namespace cyclores
