#include "cyclores/guiding.hpp"

#include "cyclores/errors.hpp"

#include <cmath>
#include <numbers>

namespace cyclores {

namespace {

constexpr double kPi = std::numbers::pi;

double nearest(double angle, double ref) {
  return angle + 2 * kPi * std::round((ref - angle) / (2 * kPi));
}

std::vector<double> column_of(const std::vector<GuidingFrame>& frames, auto&& get) {
  std::vector<double> out(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) out[i] = get(frames[i]);
  return out;
}

}  // namespace

GuidingFrame guiding_frame(const ModelParams& params, const CartesianState& state, double t,
                           const GuidingFrame* prev) {
  if (!(state.q.squaredNorm() > 0.0)) throw DomainError("guiding frame needs q != 0");
  const Vec2 v = velocity(params, state, t);
  GuidingFrame g;
  g.R = -perp(v) / params.b;
  g.X = state.q - g.R;
  g.vartheta = std::atan2(g.R.y(), g.R.x());
  // |X| at rounding level of |q|: the angle is noise
  if (g.X.norm() > 1e-13 * (state.q.norm() + g.R.norm())) {
    g.chi = std::atan2(g.X.y(), g.X.x());
  } else {
    g.undefined_angle = true;
    g.chi = prev ? prev->chi : 0.0;
  }
  if (prev) {
    g.chi = nearest(g.chi, prev->chi);
    g.vartheta = nearest(g.vartheta, prev->vartheta);
  }
  return g;
}

double x_norm_squared(const ModelParams& params, double I, double t) {
  const double a = params.a(t);
  return (2 * I + std::abs(a) - a) / params.b;
}

double r_norm_squared(const ModelParams& params, double I, double t) {
  const double a = params.a(t);
  return (2 * I + std::abs(a) + a) / params.b;
}

GuidingSeries guiding_series(const ModelParams& params, const Trajectory& tr) {
  if (tr.chart != Chart::cartesian && tr.chart != Chart::polar) {
    throw Error("guiding series needs a cartesian or polar trajectory");
  }
  const double quarter = 0.5 * kPi / params.b;
  GuidingSeries s;
  s.params_digest = tr.params_digest;
  s.times = tr.times;
  s.frames.reserve(tr.size());
  s.H.reserve(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (i > 0 && tr.times[i] - tr.times[i - 1] > quarter) {
      throw ParameterError("sample spacing exceeds a quarter cyclotron period");
    }
    const CartesianState cs =
        tr.chart == Chart::cartesian ? cartesian_state(tr, i) : polar_to_cartesian(polar_state(tr, i));
    const double t = tr.times[i];
    s.frames.push_back(guiding_frame(params, cs, t, i ? &s.frames.back() : nullptr));
    s.H.push_back(hamiltonian_cartesian(params, cs, t));
  }
  return s;
}

CsvTable guiding_table(const GuidingSeries& s) {
  CsvTable t;
  t.provenance = "cyclores chart=guiding params_digest=" + s.params_digest;
  t.header = {"t", "X1", "X2", "R1", "R2", "absX", "absR", "chi", "vartheta", "H"};
  t.rows.reserve(s.times.size());
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const auto& f = s.frames[i];
    t.rows.push_back({s.times[i], f.X.x(), f.X.y(), f.R.x(), f.R.y(), f.X.norm(), f.R.norm(),
                      f.chi, f.vartheta, s.H[i]});
  }
  return t;
}

EnergyRate energy_and_rate(const ModelParams& params, const Trajectory& tr,
                           double window_fraction) {
  EnergyRate out;
  out.times = tr.times;
  out.H.resize(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times[i];
    if (tr.chart == Chart::cartesian) {
      out.H[i] = hamiltonian_cartesian(params, cartesian_state(tr, i), t);
    } else if (tr.chart == Chart::polar) {
      out.H[i] = hamiltonian_polar(params, polar_state(tr, i), t);
    } else {
      throw Error("energy rate needs a cartesian or polar trajectory");
    }
  }
  out.fit = require_acceleration(out.times, out.H, window_fraction);
  out.gamma_fit = out.fit.slope;
  const Trajectory aa = to_action_angle(params, tr);
  const PhaseEstimate ph = extract_phase(params, aa, 1.0 - window_fraction);
  out.phi_infty = ph.value;
  const double fp = eval_deriv(params.profile, -params.lambda() * (ph.value + 0.5 * kPi), 1);
  out.gamma_formula = -0.5 * params.b * params.epsilon * params.omega * fp;
  return out;
}

XRGrowthReport xr_growth_check(const ModelParams& params, const GuidingSeries& s, double gamma,
                               double window_fraction) {
  const auto X2 = column_of(s.frames, [](const GuidingFrame& f) { return f.X.squaredNorm(); });
  const auto R2 = column_of(s.frames, [](const GuidingFrame& f) { return f.R.squaredNorm(); });
  XRGrowthReport rep;
  rep.gamma = gamma;
  rep.target = 2 * gamma / (params.b * params.b);
  rep.X2 = fit_linear_growth(s.times, X2, window_fraction);
  rep.R2 = fit_linear_growth(s.times, R2, window_fraction);
  const double scale = rep.target != 0.0 ? std::abs(rep.target) : 1.0;
  rep.rel_err_X = std::abs(rep.X2.slope - rep.target) / scale;
  rep.rel_err_R = std::abs(rep.R2.slope - rep.target) / scale;
  rep.ratio_XR = std::sqrt(X2.back() / R2.back());
  return rep;
}

XRGrowthReport xr_growth_check(const ModelParams& params, const Trajectory& tr,
                               double window_fraction) {
  const EnergyRate er = energy_and_rate(params, tr, window_fraction);
  return xr_growth_check(params, guiding_series(params, tr), er.gamma_fit, window_fraction);
}

double chi_eom_rhs(const ModelParams& params, const CartesianState& state, double t) {
  const GuidingFrame g = guiding_frame(params, state, t);
  const double xn = g.X.norm();
  if (!(xn > 0.0)) throw DomainError("chi equation needs |X| > 0");
  const PolarState ps = cartesian_to_polar(state);
  const auto aa = to_action_angle(params, ps.r, ps.p_r, t);
  const double r2 = ps.r * ps.r;
  return g.R.norm() * params.a_prime(t) * std::cos(aa.phi) / (xn * params.b * r2);
}

double log_drift_constant(const ModelParams& params, double xi) {
  // f = sum c_k cos kt + s_k sin kt  =>  a_k = k s_k, b_k = -k c_k
  double num = 0.0, den = 0.0;
  for (int k = 1; k <= params.profile.order(); ++k) {
    const double ak = k * params.profile.sin_coeff(k);
    const double bk = -k * params.profile.cos_coeff(k);
    num += ak * std::sin(k * xi) + bk * std::cos(k * xi);
    den += ak * std::cos(k * xi) - bk * std::sin(k * xi);
  }
  if (std::abs(den) < 1e-12) {
    throw DegenerateDenominator("log-drift constant: f'(-xi) vanishes at xi = " + std::to_string(xi));
  }
  return 0.5 * num / den;
}

ChiDriftReport chi_drift_check(const ModelParams& params, const GuidingSeries& s, double xi,
                               double window_fraction) {
  const auto chi = column_of(s.frames, [](const GuidingFrame& f) { return f.chi; });
  const double T = s.times.back();
  const auto idx = log_spaced_indices(s.times, std::max(window_fraction * T, 1e-300), T, 4096);
  if (idx.size() < 32) throw InsufficientSamples("chi drift fit needs 32 tail samples");
  Eigen::MatrixXd A(Eigen::Index(idx.size()), 2);
  Eigen::VectorXd y(Eigen::Index(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    A(Eigen::Index(i), 0) = 1.0;
    A(Eigen::Index(i), 1) = std::log(params.b * s.times[idx[i]]);
    y[Eigen::Index(i)] = chi[idx[i]];
  }
  const auto ls = least_squares(A, y);
  ChiDriftReport rep;
  rep.D_fit = ls.beta[1];
  rep.chi_infty = ls.beta[0];
  rep.D_formula = log_drift_constant(params, xi);
  rep.rel_err = std::abs(rep.D_fit - rep.D_formula) / std::abs(rep.D_formula);
  return rep;
}

KickLocalization kick_localization(const ModelParams& params, const CartesianState& state,
                                   double t0, double phi_infty, std::size_t periods,
                                   double half_width, Tolerance tol) {
  if (periods == 0) throw ParameterError("kick localization needs at least one period");
  if (!(half_width > 0.0 && half_width < kPi)) throw ParameterError("window half width must lie in (0, pi)");
  const double b = params.b;
  const double P = 2 * kPi / b;
  // period boundaries sit half way between window centres
  const double c0 = -0.5 * kPi - phi_infty + kPi;
  double start = (c0 + 2 * kPi * std::ceil((b * t0 - c0) / (2 * kPi))) / b;
  std::vector<double> ts;
  for (std::size_t k = 0; k < periods; ++k) {
    const double s = start + double(k) * P;
    ts.push_back(s);
    ts.push_back(s + (kPi - half_width) / b);
    ts.push_back(s + (kPi + half_width) / b);
  }
  ts.push_back(start + double(periods) * P);
  IntegrateOptions io;
  io.tol = tol;
  io.log_perihelion = false;
  io.samples = ts;
  CartesianState s0 = state;
  double t_begin = t0;
  if (ts.front() > t0) {
    io.samples.insert(io.samples.begin(), t0);
  } else {
    t_begin = ts.front();
  }
  const Trajectory tr = integrate(params, s0, t_begin, ts.back(), io);
  const std::size_t off = tr.size() - ts.size();
  std::vector<double> H(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    H[i] = hamiltonian_cartesian(params, cartesian_state(tr, off + i), tr.times[off + i]);
  }
  KickLocalization out{0.0, H.back() - H.front(), 0.0, periods};
  for (std::size_t k = 0; k < periods; ++k) out.in_window += H[3 * k + 2] - H[3 * k + 1];
  out.fraction = out.in_window / out.total;
  return out;
}

}  // namespace cyclores
