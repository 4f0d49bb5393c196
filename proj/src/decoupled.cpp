#include "cyclores/decoupled.hpp"

#include "cyclores/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace cyclores {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// F - sqrt(F^2 - a^2) evaluated as a^2 / (F + sqrt(F^2 - a^2)).
double gap(double F, double a) { return a * a / (F + std::sqrt(F * F - a * a)); }

void require_F(double F, double a) {
  if (!(F > a)) {
    throw DomainError("decoupled system needs F > a(t) (F = " + std::to_string(F) +
                      ", a = " + std::to_string(a) + ")");
  }
}

// first t > t_from with b t + phi = -pi/2 (mod 2 pi)
double next_kick(double b, double phi, double t_from) {
  const double s0 = -0.5 * kPi - phi;
  const double m = std::floor((b * t_from - s0) / (2 * kPi)) + 1;
  double t = (s0 + 2 * kPi * m) / b;
  if (t <= t_from) t += 2 * kPi / b;
  return t;
}

struct FnBounds {
  double rho_norm = 0, rho_min = std::numeric_limits<double>::infinity();
  double a_norm = 0, a_min = std::numeric_limits<double>::infinity();
};

FnBounds sample_bounds(const ScalarFn& rho, const ScalarFn& a, double t0, double t1) {
  FnBounds out;
  constexpr int n = 2048;
  for (int i = 0; i <= n; ++i) {
    const double t = t0 + (t1 - t0) * i / n;
    const double r = rho(t), av = a(t);
    out.rho_norm = std::max(out.rho_norm, std::abs(r));
    out.rho_min = std::min(out.rho_min, r);
    out.a_norm = std::max(out.a_norm, std::abs(av));
    out.a_min = std::min(out.a_min, av);
  }
  return out;
}

}  // namespace

double kick_denominator(double F, double a, double s) {
  const double sn = std::sin(s);
  const double half = std::sin(0.5 * s + 0.25 * kPi);
  // 1 + sin s = 2 sin^2(s/2 + pi/4)
  return 2 * F * half * half - sn * gap(F, a);
}

double kick_ratio(double F, double a, double s) {
  return a * std::cos(s) / kick_denominator(F, a, s);
}

double f_rhs_frozen_phase(const ModelParams& params, double F, double t, double phi) {
  const auto j = params.a_jet(t);
  require_F(F, j.a);
  return j.a * j.da / kick_denominator(F, j.a, params.b * t + phi);
}

double phi_rhs_prescribed_F(const ModelParams& params, double phi, double t, double F) {
  const auto j = params.a_jet(t);
  require_F(F, j.a);
  return -j.da * kick_ratio(F, j.a, params.b * t + phi) / std::sqrt(F * F - j.a * j.a);
}

double phi_rhs_prescribed_F(const ModelParams& params, double phi, double t,
                            const std::function<double(double)>& F_of_t) {
  return phi_rhs_prescribed_F(params, phi, t, F_of_t(t));
}

std::vector<double> kick_times(const ModelParams& params, double phi, double t0, double t1) {
  std::vector<double> out;
  double t = next_kick(params.b, phi, t0 - 1e-300);
  if (std::abs(std::sin(params.b * t0 + phi) + 1) < 1e-15) out.push_back(t0);
  for (; t <= t1; t = next_kick(params.b, phi, t)) {
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  return out;
}

Trajectory integrate_frozen_phase(const ModelParams& params, double F0, double phi, double t0,
                                  double t1, const IntegrateOptions& options) {
  require_F(F0, params.a(t0));
  const auto samples = detail::resolve_samples(options, t0, t1);
  using V1 = Eigen::Matrix<double, 1, 1>;
  auto rhs = [&](double t, const V1& y) -> V1 {
    return V1(f_rhs_frozen_phase(params, y[0], t, phi));
  };
  StepControl ctl = options.control;
  ctl.h_max = std::min(ctl.h_max, 0.5 * kPi / params.b);
  auto stepper = make_stepper<double, 1>(rhs, t0, V1(F0), t1 - t0, options.tol, ctl);

  std::vector<double> ts;
  std::vector<double> Fs;
  auto sink = [&](double t, const V1& y) {
    ts.push_back(t);
    Fs.push_back(y[0]);
  };
  std::size_t next = 0;
  if (!samples.empty() && samples[0] == t0) {
    sink(t0, V1(F0));
    next = 1;
  }
  std::vector<PerihelionEvent> events;
  double t = t0;
  while (t < t1) {
    const double tk = next_kick(params.b, phi, t);
    const double target = std::min(tk, t1);
    stepper.advance(target, std::span<const double>(samples), next, sink);
    t = target;
    if (target == tk && options.log_perihelion) {
      const double a = params.a(tk);
      events.push_back({tk, kick_denominator(stepper.state()[0], a, params.b * tk + phi)});
    }
  }
  Trajectory tr;
  tr.chart = Chart::decoupled;
  tr.times = std::move(ts);
  tr.states.resize(Eigen::Index(tr.times.size()), 2);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    tr.states(Eigen::Index(i), 0) = Fs[i];
    tr.states(Eigen::Index(i), 1) = phi;
  }
  tr.params_digest = params.digest();
  tr.stats = stepper.stats();
  tr.events = std::move(events);
  return tr;
}

Trajectory integrate_prescribed_F(const ModelParams& params, double phi0,
                                  const std::function<double(double)>& F_of_t, double t0,
                                  double t1, const IntegrateOptions& options) {
  const auto samples = detail::resolve_samples(options, t0, t1);
  using V1 = Eigen::Matrix<double, 1, 1>;
  auto rhs = [&](double t, const V1& y) -> V1 {
    return V1(phi_rhs_prescribed_F(params, y[0], t, F_of_t(t)));
  };
  StepControl ctl = options.control;
  ctl.h_max = std::min(ctl.h_max, 0.5 * kPi / params.b);
  auto stepper = make_stepper<double, 1>(rhs, t0, V1(phi0), t1 - t0, options.tol, ctl);
  std::vector<double> ts, phis;
  auto sink = [&](double t, const V1& y) {
    ts.push_back(t);
    phis.push_back(y[0]);
  };
  std::size_t next = 0;
  if (!samples.empty() && samples[0] == t0) {
    sink(t0, V1(phi0));
    next = 1;
  }
  double t = t0;
  while (t < t1) {
    // the phase drifts by O(1/F^2) per period, far less than the kick width O(1/F)
    const double tk = next_kick(params.b, stepper.state()[0], t);
    const double target = std::min(tk, t1);
    stepper.advance(target, std::span<const double>(samples), next, sink);
    t = target;
  }
  Trajectory tr;
  tr.chart = Chart::decoupled;
  tr.times = std::move(ts);
  tr.states.resize(Eigen::Index(tr.times.size()), 2);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    tr.states(Eigen::Index(i), 0) = F_of_t(tr.times[i]);
    tr.states(Eigen::Index(i), 1) = phis[i];
  }
  tr.params_digest = params.digest();
  tr.stats = stepper.stats();
  return tr;
}

PeriodMapResult period_map_segment(const ScalarFn& rho, const ScalarFn& a, double h0, double t0,
                                   double t1, int sign, Tolerance tol) {
  if (!(t1 > t0)) throw ParameterError("period map needs t1 > t0");
  if (sign != 1 && sign != -1) throw ParameterError("period map sign must be +1 or -1");
  const FnBounds bnd = sample_bounds(rho, a, t0, t1);
  if (!(bnd.a_min > 0.0)) throw ParameterError("period map needs a(t) > 0");
  const double bound =
      std::exp(2 * bnd.rho_norm * (t1 - t0) / (bnd.a_min * bnd.a_min)) * bnd.a_norm;
  PeriodMapResult res{h0, kNaN, kNaN, kNaN, h0 > bound};
  if (!res.bound_satisfied && bnd.rho_min < 0.0) {
    throw ExistenceBound("h0 = " + std::to_string(h0) + " is below the existence bound " +
                         std::to_string(bound) + " and rho changes sign");
  }
  if (!(h0 > bnd.a_norm)) throw DomainError("period map needs h0 > max a");

  using V1 = Eigen::Matrix<double, 1, 1>;
  auto rhs = [&](double t, const V1& u) -> V1 {
    const double h = h0 + u[0];
    const double av = a(t);
    if (!(h > av)) throw DomainError("period map left h > a");
    const double c = std::cos(t);
    double den;
    if (sign < 0) {
      const double s = std::sin(0.5 * t);
      den = 2 * h * s * s + c * gap(h, av);
    } else {
      const double s = std::cos(0.5 * t);
      den = 2 * h * s * s - c * gap(h, av);
    }
    return V1(rho(t) / den);
  };
  StepControl ctl;
  ctl.h_max = 0.125 * kPi;
  auto stepper = make_stepper<double, 1>(rhs, t0, V1(0.0), t1 - t0, tol, ctl);
  // the denominator is smallest where sign * cos t = -1
  const double centre = sign < 0 ? 0.0 : kPi;
  double t = t0;
  while (t < t1) {
    double tk = centre + 2 * kPi * std::floor((t - centre) / (2 * kPi));
    while (tk <= t) tk += 2 * kPi;
    const double target = std::min(tk, t1);
    stepper.advance(target);
    t = target;
  }
  res.increment = stepper.state()[0];
  res.h_end = h0 + res.increment;
  return res;
}

PeriodMapResult half_period_map(const ScalarFn& rho, const ScalarFn& a, double h0,
                                Tolerance tol) {
  auto res = period_map_segment(rho, a, h0, 0.0, 0.5 * kPi, -1, tol);
  res.predicted_increment = kPi * rho(0.0) / a(0.0);
  return res;
}

PeriodMapResult full_period_map(const ScalarFn& rho, const ScalarFn& a, double h0,
                                Tolerance tol) {
  auto res = period_map_segment(rho, a, h0, 0.0, 2 * kPi, 1, tol);
  res.predicted_increment = 2 * kPi * rho(kPi) / a(kPi);
  return res;
}

SlopePrediction predicted_slope(const ModelParams& params, double phi_infty) {
  const double lam = params.lambda();
  const double xi = lam * (phi_infty + 0.5 * kPi);
  const double fp = eval_deriv(params.profile, -xi, 1);
  if (!(params.epsilon * fp < 0.0)) {
    throw SignError("no acceleration predicted: eps f'(-xi) = " +
                    std::to_string(params.epsilon * fp) + " is not negative");
  }
  const bool outside = params.pair ? params.pair->nu() > 1
                                   : std::abs(lam - std::round(lam)) > 1e-12;
  const double F_slope = params.epsilon * params.omega * std::abs(fp);
  return {F_slope, 0.5 * F_slope, fp, xi, outside};
}

CsvTable decoupled_table(const Trajectory& tr) { return trajectory_table(tr); }

CsvTable period_map_table(const std::vector<PeriodMapResult>& results) {
  CsvTable t;
  t.provenance = "cyclores chart=periodmap";
  t.header = {"h0", "h_end", "increment", "predicted_increment"};
  for (const auto& r : results) t.rows.push_back({r.h0, r.h_end, r.increment, r.predicted_increment});
  return t;
}

}  // namespace cyclores
