#include "cyclores/averaging.hpp"

#include "cyclores/errors.hpp"

#include <cmath>
#include <numbers>

namespace cyclores {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

cplx ipow(int m) {
  switch (((m % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

void require_J(double J1) {
  if (!(J1 > 0.0)) throw DomainError("averaged system needs J1 > 0");
}

// x = g(x) by secant iteration on x - g(x).
template <typename G>
double solve_fixed_point(G&& g, double x0, double scale, const char* what) {
  constexpr double tol = 1e-12;
  double xa = x0;
  double ra = xa - g(xa);
  if (std::abs(ra) <= tol * scale) return xa;
  double xb = xa - ra;
  for (int it = 0; it < 50; ++it) {
    const double rb = xb - g(xb);
    if (std::abs(rb) <= tol * scale) return xb;
    const double den = rb - ra;
    double xn = den != 0.0 ? xb - rb * (xb - xa) / den : xb - rb;
    if (!std::isfinite(xn)) xn = xb - rb;
    xa = xb;
    ra = rb;
    xb = xn;
  }
  const double last = std::abs(xb - g(xb));
  throw NoConvergence(std::string(what) + " did not converge in 50 iterations (residual " +
                      std::to_string(last) + ")");
}

}  // namespace

bool HoloPoly::is_zero() const {
  for (const auto& c : coeffs) {
    if (c != cplx(0, 0)) return false;
  }
  return true;
}

cplx HoloPoly::operator()(cplx z) const {
  cplx acc = 0;
  for (std::size_t n = coeffs.size(); n-- > 0;) acc = (acc + coeffs[n]) * z;
  return acc;
}

cplx HoloPoly::derivative(cplx z) const {
  cplx acc = 0;
  for (std::size_t n = coeffs.size(); n-- > 0;) acc = acc * z + double(n + 1) * coeffs[n];
  return acc;
}

cplx HoloPoly::z_derivative(cplx z) const { return z * derivative(z); }

double beta_of(double p_theta, double J) { return std::sqrt(J / (J + p_theta)); }

double rho_of(double p_theta, int mu, double J) { return std::pow(beta_of(p_theta, J), mu); }

double rho_log_derivative(double p_theta, int mu, double J) {
  return 0.5 * mu * p_theta / (J * (J + p_theta));
}

HoloPoly build_h(const ModelParams& params, const ResonancePair& pair) {
  HoloPoly h;
  const int mu = pair.mu(), nu = pair.nu();
  const int N = params.profile.order() / nu;
  h.coeffs.resize(std::size_t(N));
  for (int n = 1; n <= N; ++n) {
    h.coeffs[std::size_t(n - 1)] =
        -params.epsilon * mu * params.b * fourier_coeff(params.profile, -n * nu) * ipow(n * mu);
  }
  while (!h.coeffs.empty() && h.coeffs.back() == cplx(0, 0)) h.coeffs.pop_back();
  return h;
}

double k1_hamiltonian(const ModelParams& params, const ResonancePair& pair, double psi1,
                      double psi2, double J1) {
  require_J(J1);
  const int mu = pair.mu(), nu = pair.nu();
  const int N = params.profile.order() / nu;
  const double beta = beta_of(params.p_theta, J1);
  const double chi = mu * psi1 - nu * psi2;
  cplx acc = 0;
  for (int n = -N; n <= N; ++n) {
    if (n == 0) continue;
    acc += fourier_coeff(params.profile, -n * nu) * ipow(n * mu) *
           std::pow(beta, std::abs(n) * mu) * std::polar(1.0, n * chi);
  }
  return -0.5 * params.b * acc.real();
}

double k1_unaveraged(const ModelParams& params, double phi1, double phi2, double J1) {
  require_J(J1);
  const double sJ = std::sqrt(J1);
  return params.omega * eval_deriv(params.profile, phi2, 1) *
         std::atan2(sJ * std::cos(phi1), std::sqrt(J1 + params.p_theta) + sJ * std::sin(phi1));
}

double reduced_hamiltonian(const ModelParams& params, const ResonancePair& pair,
                           const HoloPoly& h, const AveragedState& s) {
  require_J(s.J1);
  return h(std::polar(rho_of(params.p_theta, pair.mu(), s.J1), s.chi1)).real();
}

AveragedRate reduced_eom(const ModelParams& params, const ResonancePair& pair, const HoloPoly& h,
                         const AveragedState& s) {
  require_J(s.J1);
  const cplx z = std::polar(rho_of(params.p_theta, pair.mu(), s.J1), s.chi1);
  const cplx w = h.z_derivative(z);
  return {rho_log_derivative(params.p_theta, pair.mu(), s.J1) * w.real(), w.imag()};
}

AveragedRate reduced_eom(const ModelParams& params, const ResonancePair& pair,
                         const AveragedState& s) {
  return reduced_eom(params, pair, build_h(params, pair), s);
}

double limiting_rate(const HoloPoly& h, double chi) {
  return h.z_derivative(std::polar(1.0, chi)).imag();
}

double averaged_hamiltonian_K1trunc(const ModelParams& params, const ResonancePair& pair,
                                    const Eigen::Vector2d& psi, const Eigen::Vector2d& J) {
  const double lin = params.b / pair.nu() * (pair.nu() * J[0] + pair.mu() * J[1]);
  if (params.epsilon == 0.0) return lin;
  return lin + params.epsilon * k1_hamiltonian(params, pair, psi[0], psi[1], J[0]);
}

Eigen::Vector4d averaged_flow_rhs(const ModelParams& params, const ResonancePair& pair,
                                  const HoloPoly& h, const Eigen::Vector4d& y) {
  require_J(y[2]);
  const int mu = pair.mu(), nu = pair.nu();
  const cplx z = std::polar(rho_of(params.p_theta, mu, y[2]), mu * y[0] - nu * y[1]);
  const cplx w = h.z_derivative(z);
  const double dJ1 = w.imag();
  return {params.b + rho_log_derivative(params.p_theta, mu, y[2]) * w.real() / mu, params.omega,
          dJ1, -double(nu) / mu * dJ1};
}

S1Gradient s1_gradients(const ModelParams& params, const ResonancePair& pair, double phi1,
                        double phi2, double J1) {
  require_J(J1);
  S1Gradient out{0, 0, 0, 0, 0};
  const FluxProfile& f = params.profile;
  if (f.is_zero()) return out;
  const int mu = pair.mu(), nu = pair.nu();
  const double lam = pair.lambda();
  const double p = params.p_theta;
  const double beta = beta_of(p, J1);
  const double dbeta = p / (2 * beta * (J1 + p) * (J1 + p));

  // Tail past N, with N >= 2 k lambda + 1, is below beta^N / (N (1 - beta)).
  int N = int(std::ceil(2 * f.order() * lam)) + 1;
  N = std::max(N, int(std::ceil(std::log(1e-14 * (1 - beta)) / std::log(beta))));
  while (std::pow(beta, N) / (N * (1 - beta)) > 1e-14) ++N;
  out.inner_terms = N;

  const cplx wp = cplx(0, 1) * std::polar(beta, phi1);   // i beta e^{i phi1}
  const cplx wm = cplx(0, -1) * std::polar(beta, -phi1); // -i beta e^{-i phi1}
  cplx S = 0, SJ = 0, S1 = 0, S2 = 0;
  for (int k = 1; k <= f.order(); ++k) {
    const cplx Ff = fourier_coeff(f, k);
    if (Ff == cplx(0, 0)) continue;
    const cplx Ffp = cplx(0, k) * Ff;
    const double c = k * lam;
    const bool integral = k % nu == 0;
    const int c_int = integral ? k * mu / nu : -1;
    cplx G = 0, Gphi = 0, Gbeta = 0;
    cplx pp = 1, pm = 1;
    for (int n = 1; n <= N; ++n) {
      pp *= wp;
      pm *= wm;
      const cplx tp = pp / (2.0 * n * (n + c));
      G += tp;
      Gphi += cplx(0, n) * tp;
      Gbeta += double(n) * tp;
      if (n != c_int) {
        const cplx tm = pm / (2.0 * n * (n - c));
        G += tm;
        Gphi -= cplx(0, n) * tm;
        Gbeta += double(n) * tm;
      }
    }
    G *= lam;
    Gphi *= lam;
    Gbeta *= lam / beta;
    const cplx e2 = std::polar(1.0, k * phi2);
    S += Ffp * G * e2;
    SJ += Ffp * Gbeta * e2;
    S1 += Ffp * Gphi * e2;
    S2 += cplx(0, k) * Ffp * G * e2;
  }
  out.value = 2 * S.real();
  out.dJ1 = 2 * SJ.real() * dbeta;
  out.dphi1 = 2 * S1.real();
  out.dphi2 = 2 * S2.real();
  return out;
}

CanonicalPoint generating_map(const ModelParams& params, const ResonancePair& pair,
                              const CanonicalPoint& phi_J) {
  CanonicalPoint out = phi_J;
  if (params.epsilon == 0.0) return out;
  const auto g = s1_gradients(params, pair, phi_J.angles[0], phi_J.angles[1], phi_J.actions[0]);
  out.angles[0] += params.epsilon * g.dJ1;
  out.actions[0] += params.epsilon * g.dphi1;
  out.actions[1] += params.epsilon * g.dphi2;
  return out;
}

CanonicalPoint vonzeipel_transform(const ModelParams& params, const ResonancePair& pair,
                                   Direction direction, const CanonicalPoint& point) {
  const double eps = params.epsilon;
  if (eps == 0.0) return point;
  CanonicalPoint out = point;
  const double x2 = point.angles[1];
  if (direction == Direction::forward) {
    const double phi1 = point.angles[0];
    const double I1 = point.actions[0];
    auto g = [&](double J) {
      // keep the iterate inside the chart
      const double Jc = std::max(J, 1e-300);
      return I1 - eps * s1_gradients(params, pair, phi1, x2, Jc).dphi1;
    };
    const double J1 = solve_fixed_point(g, I1, std::max(1.0, std::abs(I1)), "forward transform");
    require_J(J1);
    const auto grad = s1_gradients(params, pair, phi1, x2, J1);
    out.angles[0] = phi1 + eps * grad.dJ1;
    out.actions[0] = J1;
    out.actions[1] = point.actions[1] - eps * grad.dphi2;
  } else {
    const double psi1 = point.angles[0];
    const double J1 = point.actions[0];
    require_J(J1);
    auto g = [&](double phi) { return psi1 - eps * s1_gradients(params, pair, phi, x2, J1).dJ1; };
    const double phi1 = solve_fixed_point(g, psi1, 1.0, "inverse transform");
    const auto grad = s1_gradients(params, pair, phi1, x2, J1);
    out.angles[0] = phi1;
    out.actions[0] = J1 + eps * grad.dphi1;
    out.actions[1] = point.actions[1] + eps * grad.dphi2;
  }
  return out;
}

Trajectory integrate_reduced(const ModelParams& params, const ResonancePair& pair,
                             const AveragedState& initial, double t0, double t1,
                             const IntegrateOptions& options) {
  require_J(initial.J1);
  const auto samples = detail::resolve_samples(options, t0, t1);
  const HoloPoly h = build_h(params, pair);
  using V2 = Eigen::Vector2d;
  auto rhs = [&](double, const V2& y) -> V2 {
    const auto d = reduced_eom(params, pair, h, {y[0], y[1]});
    return {d.dchi1, d.dJ1};
  };
  const auto sol = solve_ode<double, 2>(rhs, t0, V2(initial.chi1, initial.J1), t1,
                                        std::span<const double>(samples), options.tol,
                                        options.control);
  return to_trajectory(Chart::averaged, sol, params.digest());
}

AveragedFlow integrate_averaged_flow(const ModelParams& params, const ResonancePair& pair,
                                     const Eigen::Vector4d& initial, double t0, double t1,
                                     const IntegrateOptions& options) {
  const auto samples = detail::resolve_samples(options, t0, t1);
  const HoloPoly h = build_h(params, pair);
  using V4 = Eigen::Vector4d;
  auto rhs = [&](double, const V4& y) -> V4 { return averaged_flow_rhs(params, pair, h, y); };
  const auto sol = solve_ode<double, 4>(rhs, t0, initial, t1, std::span<const double>(samples),
                                        options.tol, options.control);
  return {sol.times, sol.states.transpose()};
}

Trajectory pull_back(const ModelParams& params, const ResonancePair& pair,
                     const Trajectory& reduced) {
  if (reduced.chart != Chart::averaged) throw Error("trajectory is not in the averaged chart");
  Trajectory out;
  out.chart = Chart::actionangle;
  out.times = reduced.times;
  out.params_digest = reduced.params_digest;
  out.stats = reduced.stats;
  out.states.resize(reduced.states.rows(), 2);
  const int mu = pair.mu(), nu = pair.nu();
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    const double t = reduced.times[i];
    const double psi2 = params.omega * t;
    const double psi1 = (reduced.states(Eigen::Index(i), 0) + nu * psi2) / mu;
    const CanonicalPoint p{{psi1, psi2}, {reduced.states(Eigen::Index(i), 1), 0.0}};
    const auto q = vonzeipel_transform(params, pair, Direction::inverse, p);
    out.states(Eigen::Index(i), 0) = q.actions[0];
    out.states(Eigen::Index(i), 1) = q.angles[0];
  }
  return out;
}

ComparisonReport averaged_vs_true_comparison(const ModelParams& params, const ResonancePair& pair,
                                             const ActionAngleState& initial, double horizon,
                                             const IntegrateOptions& options) {
  const double T = params.epsilon > 0.0 ? std::min(horizon, 1.0 / params.epsilon) : horizon;
  IntegrateOptions opt = options;
  opt.samples = linspace(0.0, T, std::max<std::size_t>(options.sample_count, 2));
  const Trajectory truth = integrate(params, initial, 0.0, T, opt);

  const CanonicalPoint start{{initial.phi, 0.0}, {initial.I, 0.0}};
  const auto avg0 = vonzeipel_transform(params, pair, Direction::forward, start);
  const AveragedState r0{pair.mu() * avg0.angles[0] - pair.nu() * avg0.angles[1], avg0.actions[0]};
  const Trajectory reduced = integrate_reduced(params, pair, r0, 0.0, T, opt);
  const Trajectory back = pull_back(params, pair, reduced);

  ComparisonReport rep{T, 0.0, 0.0, 0.0, truth.size()};
  const std::size_t n = std::min(truth.size(), back.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double I = truth.states(Eigen::Index(i), 0);
    rep.max_dev_I = std::max(rep.max_dev_I, std::abs(I - back.states(Eigen::Index(i), 0)));
    rep.max_dev_raw = std::max(rep.max_dev_raw, std::abs(I - reduced.states(Eigen::Index(i), 1)));
    rep.max_I = std::max(rep.max_I, I);
  }
  return rep;
}

CsvTable averaged_table(const ModelParams& params, const ResonancePair& pair,
                        const Trajectory& reduced) {
  const HoloPoly h = build_h(params, pair);
  CsvTable t = trajectory_table(reduced);
  t.header.push_back("Z");
  t.header.push_back("beta");
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    const AveragedState s{reduced.states(Eigen::Index(i), 0), reduced.states(Eigen::Index(i), 1)};
    t.rows[i].push_back(reduced_hamiltonian(params, pair, h, s));
    t.rows[i].push_back(beta_of(params.p_theta, s.J1));
  }
  return t;
}

double averaged_slope(const ModelParams& params, const ResonancePair& pair, double phi_infty) {
  const FluxProfile fnu = averaged_profile(params.profile, pair.nu());
  return -0.5 * params.epsilon * params.omega *
         eval_deriv(fnu, -(phi_infty + kHalfPi) * pair.lambda(), 1);
}

}  // namespace cyclores
