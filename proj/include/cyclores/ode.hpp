#pragma once

// Embedded Dormand-Prince 5(4) pair with PI step-size control and the
// fourth-order continuous extension, templated on scalar type and dimension.

#include "cyclores/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cyclores {

struct Tolerance {
  double rel = 1e-10;
  double abs = 1e-12;
};

struct StepControl {
  double h_max = std::numeric_limits<double>::infinity();
  double h_init = 0.0;            // 0 selects a starting step automatically
  double floor_fraction = 1e-12;  // step floor relative to the integration span
  long max_steps = 500'000'000;
  bool land_on_samples = false;   // truncate steps at sample times instead of interpolating
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  long floor_steps = 0;
};

template <typename Scalar, int N, typename Rhs>
class DormandPrince {
 public:
  using State = Eigen::Matrix<Scalar, N, 1>;

  DormandPrince(Rhs rhs, Scalar t0, const State& y0, Scalar span, Tolerance tol = {},
                StepControl control = {})
      : rhs_(std::move(rhs)), t_(t0), y_(y0), tol_(tol), ctl_(control) {
    h_floor_ = std::max<Scalar>(ctl_.floor_fraction * std::abs(span),
                                16 * std::numeric_limits<Scalar>::min());
    k1_ = eval(t_, y_);
    h_ = ctl_.h_init > 0 ? Scalar(ctl_.h_init) : initial_step(span > 0 ? 1 : -1);
  }

  Scalar time() const { return t_; }
  const State& state() const { return y_; }
  Scalar step_size() const { return h_; }
  const IntegratorStats& stats() const { return stats_; }

  /// Cap the next step (e.g. right after a breakpoint).
  void limit_next_step(Scalar h) { h_ = std::min(h_, h); }

  /// Advance to t_target (> time()). Each sample time in (time(), t_target] is reported via
  /// sink(t, y) in order; observer(t, y) is called after every accepted step.
  template <typename Sink, typename Observer>
  void advance(Scalar t_target, std::span<const Scalar> samples, std::size_t& next, Sink&& sink,
               Observer&& observer) {
    while (t_ < t_target) {
      Scalar h = std::min<Scalar>(h_, ctl_.h_max);
      bool forced_floor = false;
      if (h < h_floor_) {
        h = h_floor_;
        forced_floor = true;
      }
      Scalar t_end = t_ + h;
      bool to_sample = false;
      if (ctl_.land_on_samples && next < samples.size() && samples[next] < t_end &&
          samples[next] <= t_target) {
        t_end = samples[next];
        to_sample = true;
      }
      bool to_target = false;
      if (t_end >= t_target || t_target - t_end < h_floor_) {
        t_end = t_target;
        to_target = true;
      }
      h = t_end - t_;

      if (stats_.accepted + stats_.rejected >= ctl_.max_steps) {
        throw StepFloorReached("integrator exceeded the maximum number of steps at t = " +
                                   std::to_string(double(t_)),
                               double(t_));
      }

      Scalar err = 0;
      bool ok = attempt(h, err);
      if (!ok) {
        // a stage left the chart domain
        ++stats_.rejected;
        if (h <= h_floor_ * 1.0000001) {
          throw DomainError("state left the chart domain at t = " + std::to_string(double(t_)));
        }
        h_ = std::max<Scalar>(h * Scalar(0.25), h_floor_);
        continue;
      }
      if (err > 1 && !forced_floor && !(h <= h_floor_ * 1.0000001)) {
        ++stats_.rejected;
        const Scalar fac11 = std::pow(err, Scalar(kExpo1));
        h_ = h / std::min<Scalar>(Scalar(kFacc1), fac11 / Scalar(kSafe));
        consecutive_floor_ = 0;
        continue;
      }
      if (err > 1) {
        ++stats_.floor_steps;
        if (++consecutive_floor_ >= 3) {
          throw StepFloorReached("step floor reached 3 consecutive times at t = " +
                                     std::to_string(double(t_)),
                                 double(t_));
        }
      } else {
        consecutive_floor_ = 0;
      }

      ++stats_.accepted;
      // samples covered by this step
      const Scalar t_old = t_;
      while (next < samples.size() && samples[next] <= t_end) {
        if (samples[next] >= t_old) {
          if (samples[next] == t_end) {
            sink(t_end, y_new_);
          } else {
            sink(samples[next], interpolate(t_old, h, samples[next]));
          }
        }
        ++next;
      }
      t_ = to_target ? t_target : t_end;
      y_ = y_new_;
      k1_ = k7_;
      observer(t_, y_);

      const Scalar e = std::max<Scalar>(err, Scalar(1e-16));
      const Scalar fac11 = std::pow(e, Scalar(kExpo1));
      Scalar fac = fac11 / std::pow(facold_, Scalar(kBeta));
      fac = std::max<Scalar>(Scalar(kFacc2), std::min<Scalar>(Scalar(kFacc1), fac / Scalar(kSafe)));
      const Scalar h_next = h / fac;
      facold_ = std::max<Scalar>(e, Scalar(1e-4));
      // a truncated step says little about the natural step length
      h_ = (to_sample || to_target) ? std::max(h_next, h_) : h_next;
      if (to_target) return;
    }
  }

  template <typename Sink>
  void advance(Scalar t_target, std::span<const Scalar> samples, std::size_t& next, Sink&& sink) {
    advance(t_target, samples, next, std::forward<Sink>(sink), [](Scalar, const State&) {});
  }

  void advance(Scalar t_target) {
    std::size_t next = 0;
    advance(t_target, std::span<const Scalar>{}, next, [](Scalar, const State&) {});
  }

 private:
  static constexpr double kBeta = 0.04;
  static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
  static constexpr double kSafe = 0.9;
  static constexpr double kFacc1 = 5.0;  // max shrink 1/0.2
  static constexpr double kFacc2 = 0.1;  // max growth 10

  State eval(Scalar t, const State& y) {
    ++stats_.rhs_evals;
    return rhs_(t, y);
  }

  Scalar scaled_norm(const State& v, const State& y0, const State& y1) const {
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const Scalar sc = tol_.abs + tol_.rel * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const Scalar r = v[i] / sc;
      acc += r * r;
    }
    return std::sqrt(acc / Scalar(v.size()));
  }

  Scalar initial_step(int dir) {
    const Scalar d0 = scaled_norm(y_, y_, y_);
    const Scalar d1 = scaled_norm(k1_, y_, y_);
    Scalar h0 = (d0 < 1e-5 || d1 < 1e-5) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1;
    h0 = std::min<Scalar>(h0, ctl_.h_max);
    State f1;
    try {
      f1 = eval(t_ + dir * h0, y_ + dir * h0 * k1_);
    } catch (const DomainError&) {
      return std::max<Scalar>(h0 * Scalar(1e-3), h_floor_);
    }
    const Scalar d2 = scaled_norm(f1 - k1_, y_, y_) / h0;
    const Scalar m = std::max(d1, d2);
    const Scalar h1 = m <= 1e-15 ? std::max<Scalar>(Scalar(1e-6), h0 * Scalar(1e-3))
                                 : std::pow(Scalar(0.01) / m, Scalar(0.2));
    return std::min<Scalar>(100 * h0, h1);
  }

  bool attempt(Scalar h, Scalar& err) {
    try {
      const State& k1 = k1_;
      k2_ = eval(t_ + h * Scalar(1.0 / 5), y_ + h * (Scalar(1.0 / 5) * k1));
      k3_ = eval(t_ + h * Scalar(3.0 / 10),
                 y_ + h * (Scalar(3.0 / 40) * k1 + Scalar(9.0 / 40) * k2_));
      k4_ = eval(t_ + h * Scalar(4.0 / 5), y_ + h * (Scalar(44.0 / 45) * k1 - Scalar(56.0 / 15) * k2_ +
                                                    Scalar(32.0 / 9) * k3_));
      k5_ = eval(t_ + h * Scalar(8.0 / 9),
                 y_ + h * (Scalar(19372.0 / 6561) * k1 - Scalar(25360.0 / 2187) * k2_ +
                           Scalar(64448.0 / 6561) * k3_ - Scalar(212.0 / 729) * k4_));
      k6_ = eval(t_ + h, y_ + h * (Scalar(9017.0 / 3168) * k1 - Scalar(355.0 / 33) * k2_ +
                                  Scalar(46732.0 / 5247) * k3_ + Scalar(49.0 / 176) * k4_ -
                                  Scalar(5103.0 / 18656) * k5_));
      y_new_ = y_ + h * (Scalar(35.0 / 384) * k1 + Scalar(500.0 / 1113) * k3_ +
                         Scalar(125.0 / 192) * k4_ - Scalar(2187.0 / 6784) * k5_ +
                         Scalar(11.0 / 84) * k6_);
      k7_ = eval(t_ + h, y_new_);
    } catch (const DomainError&) {
      return false;
    }
    const State e = h * (Scalar(71.0 / 57600) * k1_ - Scalar(71.0 / 16695) * k3_ +
                         Scalar(71.0 / 1920) * k4_ - Scalar(17253.0 / 339200) * k5_ +
                         Scalar(22.0 / 525) * k6_ - Scalar(1.0 / 40) * k7_);
    err = scaled_norm(e, y_, y_new_);
    if (!std::isfinite(double(err))) return false;
    return true;
  }

  State interpolate(Scalar t_old, Scalar h, Scalar t) const {
    const Scalar theta = (t - t_old) / h;
    const Scalar theta1 = 1 - theta;
    const State ydiff = y_new_ - y_;
    const State bspl = h * k1_ - ydiff;
    const State r4 = ydiff - h * k7_ - bspl;
    const State r5 = h * (Scalar(-12715105075.0 / 11282082432.0) * k1_ +
                          Scalar(87487479700.0 / 32700410799.0) * k3_ +
                          Scalar(-10690763975.0 / 1880347072.0) * k4_ +
                          Scalar(701980252875.0 / 199316789632.0) * k5_ +
                          Scalar(-1453857185.0 / 822651844.0) * k6_ +
                          Scalar(69997945.0 / 29380423.0) * k7_);
    return y_ + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
  }

  Rhs rhs_;
  Scalar t_;
  State y_;
  Tolerance tol_;
  StepControl ctl_;
  Scalar h_ = 0;
  Scalar h_floor_ = 0;
  Scalar facold_ = Scalar(1e-4);
  int consecutive_floor_ = 0;
  IntegratorStats stats_;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, y_new_;
};

template <typename Scalar, int N, typename Rhs>
auto make_stepper(Rhs rhs, Scalar t0, const Eigen::Matrix<Scalar, N, 1>& y0, Scalar span,
                  Tolerance tol = {}, StepControl control = {}) {
  return DormandPrince<Scalar, N, Rhs>(std::move(rhs), t0, y0, span, tol, control);
}

/// Samples of one integration: column i holds the state at times[i].
template <typename Scalar, int N>
struct OdeSolution {
  std::vector<Scalar> times;
  Eigen::Matrix<Scalar, N, Eigen::Dynamic> states;
  IntegratorStats stats;
};

/// `count` equally spaced sample times on [t0, t1], endpoints included.
inline std::vector<double> linspace(double t0, double t1, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = t1;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = t0 + (t1 - t0) * double(i) / double(count - 1);
  }
  out.back() = t1;
  return out;
}

/// One-shot integration of y' = rhs(t, y) from t0 to t1, sampled at the sorted `samples`
/// (samples outside [t0, t1] are dropped).
template <typename Scalar, int N, typename Rhs, typename Observer>
OdeSolution<Scalar, N> solve_ode(Rhs&& rhs, Scalar t0, const Eigen::Matrix<Scalar, N, 1>& y0,
                                 Scalar t1, std::span<const Scalar> samples, Tolerance tol,
                                 StepControl control, Observer&& observer) {
  if (!(t1 > t0)) throw ParameterError("integration needs t1 > t0");
  auto stepper = make_stepper<Scalar, N>(std::forward<Rhs>(rhs), t0, y0, t1 - t0, tol, control);
  OdeSolution<Scalar, N> out;
  std::vector<Eigen::Matrix<Scalar, N, 1>> cols;
  std::size_t next = 0;
  while (next < samples.size() && samples[next] < t0) ++next;
  auto sink = [&](Scalar t, const Eigen::Matrix<Scalar, N, 1>& y) {
    out.times.push_back(t);
    cols.push_back(y);
  };
  if (next < samples.size() && samples[next] == t0) {
    sink(t0, y0);
    ++next;
  }
  stepper.advance(t1, samples, next, sink, observer);
  out.states.resize(y0.size(), Eigen::Index(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.states.col(Eigen::Index(i)) = cols[i];
  out.stats = stepper.stats();
  return out;
}

template <typename Scalar, int N, typename Rhs>
OdeSolution<Scalar, N> solve_ode(Rhs&& rhs, Scalar t0, const Eigen::Matrix<Scalar, N, 1>& y0,
                                 Scalar t1, std::span<const Scalar> samples, Tolerance tol = {},
                                 StepControl control = {}) {
  return solve_ode<Scalar, N>(std::forward<Rhs>(rhs), t0, y0, t1, samples, tol, control,
                              [](Scalar, const Eigen::Matrix<Scalar, N, 1>&) {});
}

}  // namespace cyclores
