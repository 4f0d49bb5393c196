#pragma once

#include "cyclores/flux.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace cyclores {

using Vec2 = Eigen::Vector2d;

/// x^perp = (-x2, x1).
inline Vec2 perp(const Vec2& x) { return {-x.y(), x.x()}; }

/// q ^ p = q1 p2 - q2 p1.
inline double wedge(const Vec2& q, const Vec2& p) { return q.x() * p.y() - q.y() * p.x(); }

/// Physical constants of the model with m = e = 1. The flux is Phi(t) = 2 pi eps f(Omega t),
/// so a(t) = p_theta - eps f(Omega t) must stay positive.
struct ModelParams {
  double b = 1.0;
  double omega = 1.0;
  double epsilon = 0.0;
  double p_theta = 1.0;
  FluxProfile profile;
  std::optional<ResonancePair> pair;

  /// Validated construction; throws ParameterError naming every violated invariant.
  static ModelParams make(double b, double omega, double epsilon, double p_theta,
                          FluxProfile profile, std::optional<ResonancePair> pair = std::nullopt);

  /// Human-readable list of violated invariants (empty when valid).
  std::vector<std::string> violations() const;
  void validate() const;

  double lambda() const { return omega / b; }

  double a(double t) const { return p_theta - epsilon * eval(profile, omega * t); }
  /// a'(t) = -eps Omega f'(Omega t).
  double a_prime(double t) const { return -epsilon * omega * eval_deriv(profile, omega * t, 1); }

  struct AJet {
    double a;
    double da;
  };
  AJet a_jet(double t) const {
    const auto j = profile.jet(omega * t);
    return {p_theta - epsilon * j.value, -epsilon * omega * j.d1};
  }

  /// Phi(t) / (2 pi) = eps f(Omega t).
  double flux_over_2pi(double t) const { return epsilon * eval(profile, omega * t); }
  /// Phi'(t) / (2 pi).
  double flux_rate_over_2pi(double t) const {
    return epsilon * omega * eval_deriv(profile, omega * t, 1);
  }

  /// Stable hex identifier of all fields.
  std::string digest() const;
};

/// a(t) = p_theta - eps f(Omega t).
double a_of_t(const ModelParams& params, double t);

/// Canonical angular momentum for an initial position and velocity, p = v + A(q, t0).
double p_theta_from_velocity(double b, double omega, double epsilon, const FluxProfile& profile,
                             const Vec2& q0, const Vec2& v0, double t0 = 0.0);

}  // namespace cyclores
