#include "cyclores/dynamics.hpp"

#include "cyclores/errors.hpp"

#include <cmath>
#include <numbers>

namespace cyclores {

namespace {

void require_q(const Vec2& q) {
  if (!(q.squaredNorm() > 0.0)) throw DomainError("position q = 0 is outside the chart");
}

double nearest_branch(double angle, double ref) {
  constexpr double two_pi = 2 * std::numbers::pi;
  return angle + two_pi * std::round((ref - angle) / two_pi);
}

// d/dx at x[2] of the interpolating polynomial through five nodes.
double five_point_derivative(const double* x, const double* y) {
  double out = 0.0;
  for (int j = 0; j < 5; ++j) {
    double w;
    if (j == 2) {
      w = 0.0;
      for (int m = 0; m < 5; ++m) {
        if (m != 2) w += 1.0 / (x[2] - x[m]);
      }
    } else {
      double num = 1.0, den = 1.0;
      for (int m = 0; m < 5; ++m) {
        if (m == j) continue;
        den *= x[j] - x[m];
        if (m != 2) num *= x[2] - x[m];
      }
      w = num / den;
    }
    out += w * y[j];
  }
  return out;
}

struct PerihelionLog {
  double threshold;
  bool inside = false;
  PerihelionEvent current{0.0, 0.0};
  std::vector<PerihelionEvent> events;

  void observe(double t, double r) {
    if (r < threshold) {
      if (!inside || r < current.r) current = {t, r};
      inside = true;
    } else if (inside) {
      events.push_back(current);
      inside = false;
    }
  }
  void finish() {
    if (inside) events.push_back(current);
    inside = false;
  }
};

}  // namespace

Vec2 vector_potential(const ModelParams& params, const Vec2& q, double t) {
  require_q(q);
  const double g = -0.5 * params.b + params.flux_over_2pi(t) / q.squaredNorm();
  return g * perp(q);
}

Vec2 velocity(const ModelParams& params, const CartesianState& s, double t) {
  return s.p - vector_potential(params, s.q, t);
}

double hamiltonian_cartesian(const ModelParams& params, const CartesianState& s, double t) {
  return 0.5 * velocity(params, s, t).squaredNorm();
}

CartesianTangent eom_cartesian(const ModelParams& params, const CartesianState& s, double t) {
  require_q(s.q);
  const double q2 = s.q.squaredNorm();
  const double sflux = params.flux_over_2pi(t);
  const double g = -0.5 * params.b + sflux / q2;
  const Vec2 v = s.p - g * perp(s.q);
  // dp = (dA/dq)^T v
  const Vec2 dp = (-2.0 * sflux * perp(s.q).dot(v) / (q2 * q2)) * s.q - g * perp(v);
  return {v, dp};
}

double hamiltonian_radial(const ModelParams& params, double r, double p_r, double t) {
  if (!(r > 0.0)) throw DomainError("radial chart needs r > 0");
  const double a = params.a(t);
  const double b = params.b;
  return 0.5 * p_r * p_r + a * a / (2 * r * r) + b * b * r * r / 8;
}

double hamiltonian_polar(const ModelParams& params, const PolarState& s, double t) {
  if (!(s.r > 0.0)) throw DomainError("radial chart needs r > 0");
  const double a = s.p_theta - params.flux_over_2pi(t);
  const double w = a / s.r + 0.5 * params.b * s.r;
  return 0.5 * (s.p_r * s.p_r + w * w);
}

RadialRate eom_radial(const ModelParams& params, double r, double p_r, double t) {
  if (!(r > 0.0)) throw DomainError("radial chart needs r > 0");
  const double a = params.a(t);
  const double b = params.b;
  return {p_r, a * a / (r * r * r) - 0.25 * b * b * r};
}

double theta_rate(const ModelParams& params, const PolarState& s, double t) {
  const double a = s.p_theta - params.flux_over_2pi(t);
  return a / (s.r * s.r) + 0.5 * params.b;
}

PolarState cartesian_to_polar(const CartesianState& s) {
  require_q(s.q);
  const double r = s.q.norm();
  return {r, std::atan2(s.q.y(), s.q.x()), s.p.dot(s.q) / r, wedge(s.q, s.p)};
}

PolarState cartesian_to_polar(const CartesianState& s, double theta_ref) {
  PolarState out = cartesian_to_polar(s);
  out.theta = nearest_branch(out.theta, theta_ref);
  return out;
}

CartesianState polar_to_cartesian(const PolarState& s) {
  if (!(s.r > 0.0)) throw DomainError("radial chart needs r > 0");
  const Vec2 e_r(std::cos(s.theta), std::sin(s.theta));
  return {s.r * e_r, s.p_r * e_r + (s.p_theta / s.r) * perp(e_r)};
}

double energy_rate_identity_residual(const ModelParams& params, const Trajectory& tr) {
  if (tr.size() < 8) {
    throw InsufficientSamples("energy-rate identity needs at least 8 samples, got " +
                              std::to_string(tr.size()));
  }
  if (tr.chart != Chart::cartesian && tr.chart != Chart::polar) {
    throw Error("energy-rate identity needs a cartesian or polar trajectory");
  }
  const std::size_t n = tr.size();
  std::vector<double> H(n), rate(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = tr.times[i];
    PolarState ps;
    if (tr.chart == Chart::cartesian) {
      const CartesianState cs = cartesian_state(tr, i);
      H[i] = hamiltonian_cartesian(params, cs, t);
      ps = cartesian_to_polar(cs);
    } else {
      ps = polar_state(tr, i);
      H[i] = hamiltonian_polar(params, ps, t);
    }
    rate[i] = theta_rate(params, ps, t) * params.flux_rate_over_2pi(t);
  }
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double dH = five_point_derivative(&tr.times[i - 2], &H[i - 2]);
    worst = std::max(worst, std::abs(dH + rate[i]));
  }
  return worst;
}

double perihelion_threshold(const ModelParams& params) {
  return 1e-3 * std::sqrt(2.0 * params.p_theta / params.b);
}

namespace detail {
std::vector<double> resolve_samples(const IntegrateOptions& options, double t0, double t1) {
  if (!(t1 > t0)) throw ParameterError("integration needs t1 > t0");
  if (!options.samples.empty()) {
    for (std::size_t i = 1; i < options.samples.size(); ++i) {
      if (!(options.samples[i] > options.samples[i - 1])) {
        throw ParameterError("sample times must be strictly increasing");
      }
    }
    return options.samples;
  }
  if (options.sample_count < 2) throw ParameterError("need at least two samples");
  return linspace(t0, t1, options.sample_count);
}
}  // namespace detail

Trajectory integrate(const ModelParams& params, const CartesianState& initial, double t0,
                     double t1, const IntegrateOptions& options) {
  require_q(initial.q);
  const auto samples = detail::resolve_samples(options, t0, t1);
  using V4 = Eigen::Vector4d;
  auto rhs = [&params](double t, const V4& y) -> V4 {
    const auto d = eom_cartesian(params, {y.head<2>(), y.tail<2>()}, t);
    V4 out;
    out << d.dq, d.dp;
    return out;
  };
  PerihelionLog log;
  log.threshold = perihelion_threshold(params);
  auto observer = [&](double t, const V4& y) {
    if (options.log_perihelion) log.observe(t, y.head<2>().norm());
  };
  V4 y0;
  y0 << initial.q, initial.p;
  const auto sol = solve_ode<double, 4>(rhs, t0, y0, t1, std::span<const double>(samples),
                                        options.tol, options.control, observer);
  log.finish();
  Trajectory tr = to_trajectory(Chart::cartesian, sol, params.digest());
  tr.events = std::move(log.events);
  return tr;
}

Trajectory integrate(const ModelParams& params, const PolarState& initial, double t0, double t1,
                     const IntegrateOptions& options) {
  if (!(initial.r > 0.0)) throw DomainError("radial chart needs r > 0");
  if (std::abs(initial.p_theta - params.p_theta) > 1e-12 * std::max(1.0, params.p_theta)) {
    throw ParameterError("polar state p_theta differs from the model's p_theta");
  }
  const auto samples = detail::resolve_samples(options, t0, t1);
  using V3 = Eigen::Vector3d;
  auto rhs = [&params](double t, const V3& y) -> V3 {
    if (!(y[0] > 0.0)) throw DomainError("radial chart needs r > 0");
    const auto j = params.a_jet(t);
    const double r = y[0];
    const double b = params.b;
    return {y[2], j.a / (r * r) + 0.5 * b, j.a * j.a / (r * r * r) - 0.25 * b * b * r};
  };
  PerihelionLog log;
  log.threshold = perihelion_threshold(params);
  auto observer = [&](double t, const V3& y) {
    if (options.log_perihelion) log.observe(t, y[0]);
  };
  const V3 y0(initial.r, initial.theta, initial.p_r);
  const auto sol = solve_ode<double, 3>(rhs, t0, y0, t1, std::span<const double>(samples),
                                        options.tol, options.control, observer);
  log.finish();
  Trajectory tr;
  tr.chart = Chart::polar;
  tr.times = sol.times;
  tr.states.resize(sol.states.cols(), 4);
  tr.states.leftCols(3) = sol.states.transpose();
  tr.states.col(3).setConstant(initial.p_theta);
  tr.params_digest = params.digest();
  tr.stats = sol.stats;
  tr.events = std::move(log.events);
  return tr;
}

CartesianState cartesian_state(const Trajectory& tr, std::size_t i) {
  if (tr.chart != Chart::cartesian) throw Error("trajectory is not in the cartesian chart");
  const auto row = tr.states.row(Eigen::Index(i));
  return {Vec2(row(0), row(1)), Vec2(row(2), row(3))};
}

PolarState polar_state(const Trajectory& tr, std::size_t i) {
  if (tr.chart != Chart::polar) throw Error("trajectory is not in the polar chart");
  const auto row = tr.states.row(Eigen::Index(i));
  return {row(0), row(1), row(2), row(3)};
}

Trajectory polar_to_cartesian(const Trajectory& polar) {
  Trajectory out;
  out.chart = Chart::cartesian;
  out.times = polar.times;
  out.params_digest = polar.params_digest;
  out.events = polar.events;
  out.stats = polar.stats;
  out.states.resize(polar.states.rows(), 4);
  for (std::size_t i = 0; i < polar.size(); ++i) {
    const auto c = polar_to_cartesian(polar_state(polar, i));
    out.states.row(Eigen::Index(i)) << c.q.transpose(), c.p.transpose();
  }
  return out;
}

}  // namespace cyclores
