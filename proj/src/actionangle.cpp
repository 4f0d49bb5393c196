#include "cyclores/actionangle.hpp"

#include "cyclores/errors.hpp"

#include <cmath>
#include <numbers>

namespace cyclores {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

}  // namespace

ActionAngleState action_angle_at(double a, double b, double r, double p_r) {
  if (!(r > 0.0)) throw DomainError("action-angle transform needs r > 0");
  const double w = a / r - 0.5 * b * r;
  const double I = (p_r * p_r + w * w) / (2 * b);
  if (I == 0.0) return {0.0, 0.0};
  // sin/cos of phi scaled by 2 sqrt(I(I+a)); the common factor drops out of atan2.
  const double s = 0.5 * b * r * r - 2 * I - a;
  const double c = r * p_r;
  return {I, std::atan2(s, c)};
}

RadialPoint radial_at(double a, double b, const ActionAngleState& s) {
  const double I = std::max(s.I, 0.0);
  const double sq = std::sqrt(I * (I + a));
  // D = 2I + a + 2 sqrt(I(I+a)) sin(phi), written as a sum of squares
  const double den = std::sqrt(I + a) + std::sqrt(I) * std::sin(s.phi);
  const double D = den * den + I * std::pow(std::cos(s.phi), 2);
  const double r = std::sqrt(2 * D / b);
  return {r, 2 * sq * std::cos(s.phi) / r};
}

ActionAngleState to_action_angle(const ModelParams& params, double r, double p_r, double t) {
  return action_angle_at(params.a(t), params.b, r, p_r);
}

RadialPoint from_action_angle(const ModelParams& params, const ActionAngleState& s, double t) {
  return radial_at(params.a(t), params.b, s);
}

double r_minus(const ModelParams& params, double I, double t) {
  const double a = params.a(t);
  // sqrt(I+a) - sqrt(I) without cancellation
  return std::sqrt(2 / params.b) * a / (std::sqrt(I + a) + std::sqrt(I));
}

double r_plus(const ModelParams& params, double I, double t) {
  const double a = params.a(t);
  return std::sqrt(2 / params.b) * (std::sqrt(I + a) + std::sqrt(I));
}

double hamiltonian_hc(const ModelParams& params, const ActionAngleState& s, double t) {
  const auto j = params.a_jet(t);
  const double sI = std::sqrt(std::max(s.I, 0.0));
  return params.b * s.I -
         j.da * std::atan2(sI * std::cos(s.phi), std::sqrt(s.I + j.a) + sI * std::sin(s.phi));
}

ActionAngleRate eom_action_angle(const ModelParams& params, const ActionAngleState& s, double t) {
  if (!(s.I > 0.0)) throw DomainError("action-angle equations are singular at I = 0");
  const auto j = params.a_jet(t);
  const double a = j.a;
  const double sn = std::sin(s.phi), cs = std::cos(s.phi);
  const double den = std::sqrt(s.I + a) + std::sqrt(s.I) * sn;
  const double D = den * den + s.I * cs * cs;
  const double sq = std::sqrt(s.I * (s.I + a));
  return {params.b - cs * a * j.da / (2 * sq * D), -0.5 * j.da * (1 - a / D)};
}

Trajectory integrate(const ModelParams& params, const ActionAngleState& initial, double t0,
                     double t1, const IntegrateOptions& options) {
  if (!(initial.I > 0.0)) throw DomainError("action-angle integration needs I > 0");
  const auto samples = detail::resolve_samples(options, t0, t1);
  using V2 = Eigen::Vector2d;
  auto rhs = [&params](double t, const V2& y) -> V2 {
    const auto d = eom_action_angle(params, {y[0], y[1]}, t);
    return {d.dI, d.dphi};
  };
  const double thr = perihelion_threshold(params);
  std::vector<PerihelionEvent> events;
  bool inside = false;
  auto observer = [&](double t, const V2& y) {
    if (!options.log_perihelion) return;
    const double r = radial_at(params.a(t), params.b, {y[0], y[1]}).r;
    if (r < thr) {
      if (!inside || r < events.back().r) {
        if (!inside) events.push_back({t, r});
        else events.back() = {t, r};
      }
      inside = true;
    } else {
      inside = false;
    }
  };
  const auto sol = solve_ode<double, 2>(rhs, t0, V2(initial.I, initial.phi), t1,
                                        std::span<const double>(samples), options.tol,
                                        options.control, observer);
  Trajectory tr = to_trajectory(Chart::actionangle, sol, params.digest());
  tr.events = std::move(events);
  return tr;
}

Trajectory to_action_angle(const ModelParams& params, const Trajectory& tr) {
  if (tr.chart != Chart::polar && tr.chart != Chart::cartesian) {
    throw Error("action-angle conversion needs a polar or cartesian trajectory");
  }
  const double quarter = 0.5 * std::numbers::pi / params.b;
  Trajectory out;
  out.chart = Chart::actionangle;
  out.times = tr.times;
  out.params_digest = tr.params_digest;
  out.events = tr.events;
  out.stats = tr.stats;
  out.states.resize(Eigen::Index(tr.size()), 2);
  double prev_phi = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times[i];
    double r, p_r;
    if (tr.chart == Chart::polar) {
      const auto row = tr.states.row(Eigen::Index(i));
      r = row(0);
      p_r = row(2);
    } else {
      const auto ps = cartesian_to_polar(cartesian_state(tr, i));
      r = ps.r;
      p_r = ps.p_r;
    }
    ActionAngleState s = to_action_angle(params, r, p_r, t);
    if (i > 0) {
      const double dt = t - tr.times[i - 1];
      if (dt > quarter * (1 + 1e-12)) {
        throw ParameterError("angle unwrapping needs samples closer than a quarter period");
      }
      const double predicted = prev_phi + params.b * dt;
      s.phi += kTwoPi * std::round((predicted - s.phi) / kTwoPi);
    }
    prev_phi = s.phi;
    out.states(Eigen::Index(i), 0) = s.I;
    out.states(Eigen::Index(i), 1) = s.phi;
  }
  return out;
}

Trajectory to_polar(const ModelParams& params, const Trajectory& aa) {
  if (aa.chart != Chart::actionangle) throw Error("trajectory is not in the action-angle chart");
  Trajectory out;
  out.chart = Chart::polar;
  out.times = aa.times;
  out.params_digest = aa.params_digest;
  out.events = aa.events;
  out.stats = aa.stats;
  out.states.resize(Eigen::Index(aa.size()), 4);
  for (std::size_t i = 0; i < aa.size(); ++i) {
    const auto rp = from_action_angle(params, {aa.states(Eigen::Index(i), 0),
                                               aa.states(Eigen::Index(i), 1)},
                                      aa.times[i]);
    // theta is not part of the action-angle chart
    out.states.row(Eigen::Index(i)) << rp.r, std::numeric_limits<double>::quiet_NaN(), rp.p_r,
        params.p_theta;
  }
  return out;
}

CsvTable actionangle_table(const ModelParams& params, const Trajectory& aa) {
  CsvTable t = trajectory_table(aa);
  t.header.push_back("r_minus");
  t.header.push_back("r_plus");
  for (std::size_t i = 0; i < aa.size(); ++i) {
    const double I = aa.states(Eigen::Index(i), 0);
    t.rows[i].push_back(r_minus(params, I, aa.times[i]));
    t.rows[i].push_back(r_plus(params, I, aa.times[i]));
  }
  return t;
}

}  // namespace cyclores
