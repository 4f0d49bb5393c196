#pragma once

#include "cyclores/actionangle.hpp"

#include <complex>
#include <vector>

namespace cyclores {

using cplx = std::complex<double>;

/// Reduced variables chi1 = mu psi1 - nu psi2 (unwrapped) and J1 > 0.
struct AveragedState {
  double chi1;
  double J1;
};

struct AveragedRate {
  double dchi1;
  double dJ1;
};

/// h(z) = sum_{n=1..N} c_n z^n. coeffs[n-1] holds c_n.
struct HoloPoly {
  std::vector<cplx> coeffs;

  bool is_zero() const;
  cplx operator()(cplx z) const;
  cplx derivative(cplx z) const;
  /// z h'(z).
  cplx z_derivative(cplx z) const;
};

/// beta(J) = sqrt(J / (J + p_theta)).
double beta_of(double p_theta, double J);
/// rho(J) = beta(J)^mu and rho'(J) / rho(J).
double rho_of(double p_theta, int mu, double J);
double rho_log_derivative(double p_theta, int mu, double J);

/// c_n = -eps mu omega1 F[f]_{-n nu} i^{n mu}; the zero polynomial when nonresonant.
HoloPoly build_h(const ModelParams& params, const ResonancePair& pair);

/// First-order averaged term K1(psi, J1), from its Fourier series.
double k1_hamiltonian(const ModelParams& params, const ResonancePair& pair, double psi1,
                      double psi2, double J1);

/// Closed form of the unaveraged first-order term omega2 f'(phi2) F1(phi1, J1).
double k1_unaveraged(const ModelParams& params, double phi1, double phi2, double J1);

/// Z(chi1, J1) = Re h(rho(J1) e^{i chi1}).
double reduced_hamiltonian(const ModelParams& params, const ResonancePair& pair,
                           const HoloPoly& h, const AveragedState& s);
AveragedRate reduced_eom(const ModelParams& params, const ResonancePair& pair, const HoloPoly& h,
                         const AveragedState& s);
AveragedRate reduced_eom(const ModelParams& params, const ResonancePair& pair,
                         const AveragedState& s);

/// Im[e^{i chi} h'(e^{i chi})], the limiting growth rate of J1 at a limit angle chi.
double limiting_rate(const HoloPoly& h, double chi);

/// K_(1)(psi, J) = (omega1/nu)(nu J1 + mu J2) + eps K1.
double averaged_hamiltonian_K1trunc(const ModelParams& params, const ResonancePair& pair,
                                    const Eigen::Vector2d& psi, const Eigen::Vector2d& J);

/// Right-hand side of the four-dimensional first-order averaged flow in (psi1, psi2, J1, J2).
Eigen::Vector4d averaged_flow_rhs(const ModelParams& params, const ResonancePair& pair,
                                  const HoloPoly& h, const Eigen::Vector4d& y);

struct S1Gradient {
  double value;
  double dJ1;
  double dphi1;
  double dphi2;
  int inner_terms;  // retained |n| per sign
};

/// Generating function S1 and its partial derivatives.
S1Gradient s1_gradients(const ModelParams& params, const ResonancePair& pair, double phi1,
                        double phi2, double J1);

/// Point of the extended action-angle phase space: angles (x1, x2), actions (y1, y2).
struct CanonicalPoint {
  Eigen::Vector2d angles;
  Eigen::Vector2d actions;
};

/// Explicit half of the first-order transform: (phi, J) -> (psi, I) with
/// psi = phi + eps dS1/dJ, I = J + eps dS1/dphi.
CanonicalPoint generating_map(const ModelParams& params, const ResonancePair& pair,
                              const CanonicalPoint& phi_J);

enum class Direction { forward, inverse };

/// forward: original (phi, I) -> averaged (psi, J); inverse: (psi, J) -> (phi, I).
/// Each direction solves one implicit scalar equation to 1e-12 within 50 iterations.
CanonicalPoint vonzeipel_transform(const ModelParams& params, const ResonancePair& pair,
                                   Direction direction, const CanonicalPoint& point);

Trajectory integrate_reduced(const ModelParams& params, const ResonancePair& pair,
                             const AveragedState& initial, double t0, double t1,
                             const IntegrateOptions& options = {});

/// Samples of the four-dimensional averaged flow; rows are (psi1, psi2, J1, J2).
struct AveragedFlow {
  std::vector<double> times;
  Eigen::MatrixXd states;
};
AveragedFlow integrate_averaged_flow(const ModelParams& params, const ResonancePair& pair,
                                     const Eigen::Vector4d& initial, double t0, double t1,
                                     const IntegrateOptions& options = {});

/// Reduced trajectory mapped back to original action-angle variables (phi1, I1) through the
/// inverse transform, with psi2 = omega2 t.
Trajectory pull_back(const ModelParams& params, const ResonancePair& pair,
                     const Trajectory& reduced);

struct ComparisonReport {
  double horizon;
  double max_dev_I;      // true I vs pulled-back averaged I
  double max_dev_raw;    // true I vs averaged J, no transform
  double max_I;
  std::size_t samples;
};

/// Sup-norm deviation of I1 over [0, min(horizon, 1/eps)] between the exact action-angle flow
/// and the first-order averaged flow, both started from the same (phi, I) at t = 0.
ComparisonReport averaged_vs_true_comparison(const ModelParams& params, const ResonancePair& pair,
                                             const ActionAngleState& initial, double horizon,
                                             const IntegrateOptions& options = {});

/// t, chi1, J1, Z, beta.
CsvTable averaged_table(const ModelParams& params, const ResonancePair& pair,
                        const Trajectory& reduced);

/// Slope predicted for I1 from the limit phase: -(eps omega2/2) f_nu'(-(phi_inf + pi/2) lambda).
double averaged_slope(const ModelParams& params, const ResonancePair& pair, double phi_infty);

}  // namespace cyclores
