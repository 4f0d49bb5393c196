#pragma once

#include "cyclores/model.hpp"
#include "cyclores/ode.hpp"
#include "cyclores/trajectory.hpp"

#include <vector>

namespace cyclores {

struct CartesianState {
  Vec2 q;
  Vec2 p;
};

struct CartesianTangent {
  Vec2 dq;
  Vec2 dp;
};

/// theta is unwrapped; p_theta = q ^ p.
struct PolarState {
  double r;
  double theta;
  double p_r;
  double p_theta;
};

struct RadialRate {
  double dr;
  double dp_r;
};

/// A(q, t) = (-b/2 + eps f(Omega t) / |q|^2) q^perp.
Vec2 vector_potential(const ModelParams& params, const Vec2& q, double t);
/// v = p - A(q, t).
Vec2 velocity(const ModelParams& params, const CartesianState& s, double t);

double hamiltonian_cartesian(const ModelParams& params, const CartesianState& s, double t);
CartesianTangent eom_cartesian(const ModelParams& params, const CartesianState& s, double t);

/// H_rad = p_r^2/2 + a^2/(2 r^2) + b^2 r^2 / 8, the radial part of the polar Hamiltonian.
double hamiltonian_radial(const ModelParams& params, double r, double p_r, double t);
/// Full polar Hamiltonian, including the constant-in-r cross term a b / 2.
double hamiltonian_polar(const ModelParams& params, const PolarState& s, double t);
RadialRate eom_radial(const ModelParams& params, double r, double p_r, double t);
double theta_rate(const ModelParams& params, const PolarState& s, double t);

/// theta_ref, when given, selects the branch of theta nearest to it.
PolarState cartesian_to_polar(const CartesianState& s);
PolarState cartesian_to_polar(const CartesianState& s, double theta_ref);
CartesianState polar_to_cartesian(const PolarState& s);

/// Max |dH/dt + theta' Phi'/(2pi)| over interior samples of a cartesian or polar trajectory.
double energy_rate_identity_residual(const ModelParams& params, const Trajectory& trajectory);

struct IntegrateOptions {
  Tolerance tol{};
  /// Sorted output times; empty means `sample_count` uniform samples on [t0, t1].
  std::vector<double> samples;
  std::size_t sample_count = 1001;
  StepControl control{};
  bool log_perihelion = true;
};

/// Radius below which a passage is logged as a perihelion event.
double perihelion_threshold(const ModelParams& params);

Trajectory integrate(const ModelParams& params, const CartesianState& initial, double t0,
                     double t1, const IntegrateOptions& options = {});
/// Requires initial.p_theta to match params.p_theta.
Trajectory integrate(const ModelParams& params, const PolarState& initial, double t0, double t1,
                     const IntegrateOptions& options = {});

CartesianState cartesian_state(const Trajectory& tr, std::size_t i);
PolarState polar_state(const Trajectory& tr, std::size_t i);

/// Cartesian re-expression of a polar trajectory (same sample times).
Trajectory polar_to_cartesian(const Trajectory& polar);

namespace detail {
std::vector<double> resolve_samples(const IntegrateOptions& options, double t0, double t1);
}

}  // namespace cyclores
