#include "cyclores/analysis.hpp"

#include "cyclores/averaging.hpp"
#include "cyclores/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

namespace cyclores {

namespace {

constexpr double kPi = std::numbers::pi;

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

std::string_view residual_class_name(ResidualClass c) {
  switch (c) {
    case ResidualClass::bounded: return "bounded";
    case ResidualClass::log: return "log";
    case ResidualClass::log_squared: return "log_squared";
    case ResidualClass::other: return "other";
  }
  return "other";
}

std::string_view scan_class_name(ScanClass c) {
  switch (c) {
    case ScanClass::accelerating: return "accelerating";
    case ScanClass::bounded: return "bounded";
    case ScanClass::undecided: return "undecided";
    case ScanClass::failed: return "failed";
  }
  return "failed";
}

LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  // column scaling keeps t and log^2 t columns comparable
  Eigen::VectorXd scale = X.cwiseAbs().colwise().maxCoeff().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (scale[j] == 0.0) scale[j] = 1.0;
  }
  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  const Eigen::VectorXd bs = Xs.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd beta = bs.cwiseQuotient(scale);
  const double rms = std::sqrt((X * beta - y).squaredNorm() / double(std::max<Eigen::Index>(1, y.size())));
  return {beta, rms};
}

std::vector<std::size_t> log_spaced_indices(std::span<const double> t, double t_lo, double t_hi,
                                            std::size_t count) {
  std::vector<std::size_t> out;
  const auto first = std::size_t(std::lower_bound(t.begin(), t.end(), t_lo) - t.begin());
  const auto last = std::size_t(std::upper_bound(t.begin(), t.end(), t_hi) - t.begin());
  if (last <= first) return out;
  const std::size_t n = last - first;
  if (n <= count || !(t[first] > 0.0)) {
    // uniform thinning
    const std::size_t stride = (n + count - 1) / std::max<std::size_t>(count, 1);
    for (std::size_t i = first; i < last; i += std::max<std::size_t>(stride, 1)) out.push_back(i);
    return out;
  }
  const double l0 = std::log(t[first]), l1 = std::log(t[last - 1]);
  std::size_t j = first;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = std::exp(l0 + (l1 - l0) * double(k) / double(count - 1));
    while (j + 1 < last && t[j] < target) ++j;
    if (out.empty() || j > out.back()) out.push_back(j);
  }
  return out;
}

AsymptoticFit fit_linear_growth(std::span<const double> t, std::span<const double> y,
                                double window_fraction) {
  if (t.size() != y.size()) throw ParameterError("time and value series differ in length");
  if (t.empty()) throw InsufficientSamples("empty series");
  if (!(window_fraction >= 0.0 && window_fraction < 1.0)) {
    throw ParameterError("window fraction must lie in [0, 1)");
  }
  const double T = t.back();
  const double t_lo = std::max(t.front(), window_fraction * T);
  const auto idx = log_spaced_indices(t, t_lo, T, 4096);
  if (idx.size() < 32) {
    throw InsufficientSamples("linear-growth fit needs 32 samples in the window, got " +
                              std::to_string(idx.size()));
  }
  const Eigen::Index m = Eigen::Index(idx.size());
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd yy(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = t[idx[std::size_t(i)]];
    yy[i] = y[idx[std::size_t(i)]];
  }
  const auto ls = least_squares(X, yy);
  AsymptoticFit fit;
  fit.intercept = ls.beta[0];
  fit.slope = ls.beta[1];
  fit.t_lo = t[idx.front()];
  fit.t_hi = t[idx.back()];
  fit.rms_residual = ls.rms;
  fit.samples = idx.size();
  {
    const double tm = X.col(1).mean();
    const double sxx = (X.col(1).array() - tm).square().sum();
    const double s2 = ls.rms * ls.rms * double(m) / double(m - 2);
    fit.slope_stderr = sxx > 0 ? std::sqrt(s2 / sxx) : 0.0;
  }

  // residual class over the whole positive-time series
  const auto first_pos = std::upper_bound(t.begin(), t.end(), 0.0) - t.begin();
  const auto all = log_spaced_indices(t, t[std::size_t(first_pos < Eigen::Index(t.size()) ? first_pos : 0)], T, 4096);
  std::vector<std::size_t> pos;
  for (auto i : all) {
    if (t[i] > 0.0) pos.push_back(i);
  }
  if (pos.size() >= 8) {
    const Eigen::Index n = Eigen::Index(pos.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    double ymax = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ti = t[pos[std::size_t(i)]];
      A(i, 0) = 1.0;
      A(i, 1) = ti;
      A(i, 2) = std::log(ti);
      b[i] = y[pos[std::size_t(i)]];
      ymax = std::max(ymax, std::abs(b[i]));
    }
    const auto m0 = least_squares(A.leftCols(2), b);
    const auto m1 = least_squares(A, b);
    Eigen::MatrixXd A2 = A;
    A2.col(2) = A.col(2).array().square();
    const auto m2 = least_squares(A2, b);
    const double floor = 1e-9 * ymax + 1e-300;
    if (m0.rms <= floor) {
      fit.residual_class = ResidualClass::bounded;
    } else {
      const double best = std::min(m1.rms, m2.rms);
      const Eigen::VectorXd r0 = b - A.leftCols(2) * m0.beta;
      const Eigen::Index h = n / 2;
      const double early = std::sqrt(r0.head(h).squaredNorm() / double(h));
      const double late = std::sqrt(r0.tail(n - h).squaredNorm() / double(n - h));
      if (best > 0.5 * m0.rms) {
        fit.residual_class = late <= 2 * early ? ResidualClass::bounded : ResidualClass::other;
      } else {
        fit.residual_class = m2.rms < m1.rms ? ResidualClass::log_squared : ResidualClass::log;
      }
    }
  }
  return fit;
}

AsymptoticFit fit_linear_growth(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                                double window_fraction) {
  return fit_linear_growth(std::span<const double>(t.data(), std::size_t(t.size())),
                           std::span<const double>(y.data(), std::size_t(y.size())),
                           window_fraction);
}

AsymptoticFit require_acceleration(std::span<const double> t, std::span<const double> y,
                                   double window_fraction) {
  AsymptoticFit fit = fit_linear_growth(t, y, window_fraction);
  if (!(fit.slope > 3 * fit.slope_stderr) || !(fit.slope > 0.0)) {
    throw NotAccelerating("tail slope " + std::to_string(fit.slope) + " +- " +
                          std::to_string(fit.slope_stderr) + " is not positive");
  }
  return fit;
}

PhaseEstimate extract_phase(const ModelParams& params, const Trajectory& aa,
                            double tail_fraction, double max_spread) {
  if (aa.chart != Chart::actionangle) throw Error("phase extraction needs an action-angle trajectory");
  const std::size_t n = aa.size();
  const std::size_t start = std::size_t(double(n) * (1.0 - tail_fraction));
  const std::size_t m = n - std::min(start, n);
  if (m < 8) throw InsufficientSamples("phase extraction needs 8 tail samples");
  const std::size_t blocks = std::min<std::size_t>(16, m / 2);
  std::vector<double> sums(blocks, 0.0);
  std::vector<std::size_t> counts(blocks, 0);
  for (std::size_t i = start; i < n; ++i) {
    const std::size_t blk = std::min(blocks - 1, (i - start) * blocks / m);
    sums[blk] += aa.states(Eigen::Index(i), 1) - params.b * aa.times[i];
    ++counts[blk];
  }
  double total = 0;
  std::size_t total_count = 0;
  std::vector<double> means(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    means[b] = sums[b] / double(counts[b]);
    total += sums[b];
    total_count += counts[b];
  }
  const double mean = total / double(total_count);
  // leave-one-block-out
  double jk_mean = 0;
  std::vector<double> loo(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    loo[b] = (total - sums[b]) / double(total_count - counts[b]);
    jk_mean += loo[b];
  }
  jk_mean /= double(blocks);
  double acc = 0;
  for (double v : loo) acc += (v - jk_mean) * (v - jk_mean);
  const double err = std::sqrt(double(blocks - 1) / double(blocks) * acc);
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  const PhaseEstimate est{mean, err, *hi - *lo};
  if (est.spread > max_spread) {
    throw NonConvergent("phi(t) - bt does not settle: block means spread " +
                        std::to_string(est.spread) + " rad");
  }
  return est;
}

namespace {

ConjectureReport finish_report(const AsymptoticFit& fit, const PhaseEstimate& ph, double lam,
                               double fprime, double C_formula) {
  ConjectureReport rep;
  rep.fit = fit;
  rep.fit.phi_infty = ph.value;
  rep.C_fit = fit.slope;
  rep.phi_infty = ph.value;
  rep.phi_stderr = ph.error;
  rep.xi = lam * (ph.value + 0.5 * kPi);
  rep.fprime = fprime;
  rep.C_formula = C_formula;
  rep.discrepancy = std::abs(rep.C_fit - C_formula) / std::abs(rep.C_fit);
  rep.sign_ok = fprime < 0.0;
  return rep;
}

std::pair<std::vector<double>, std::vector<double>> action_series(const Trajectory& aa) {
  if (aa.chart != Chart::actionangle) throw Error("expected an action-angle trajectory");
  std::vector<double> I(aa.size());
  for (std::size_t i = 0; i < aa.size(); ++i) I[i] = aa.states(Eigen::Index(i), 0);
  return {aa.times, I};
}

}  // namespace

ConjectureReport conjecture_check(const ModelParams& params, const Trajectory& aa,
                                  double window_fraction, double max_spread) {
  const auto [t, I] = action_series(aa);
  const AsymptoticFit fit = require_acceleration(t, I, window_fraction);
  const PhaseEstimate ph = extract_phase(params, aa, 1.0 - window_fraction, max_spread);
  const double lam = params.lambda();
  const double fp = eval_deriv(params.profile, -lam * (ph.value + 0.5 * kPi), 1);
  return finish_report(fit, ph, lam, fp, -0.5 * params.epsilon * params.omega * fp);
}

ConjectureReport averaged_conjecture_check(const ModelParams& params, const ResonancePair& pair,
                                           const Trajectory& aa, double window_fraction,
                                           double max_spread) {
  const auto [t, I] = action_series(aa);
  const AsymptoticFit fit = require_acceleration(t, I, window_fraction);
  const PhaseEstimate ph = extract_phase(params, aa, 1.0 - window_fraction, max_spread);
  const double lam = pair.lambda();
  const FluxProfile fnu = averaged_profile(params.profile, pair.nu());
  const double fp = eval_deriv(fnu, -lam * (ph.value + 0.5 * kPi), 1);
  return finish_report(fit, ph, lam, fp, averaged_slope(params, pair, ph.value));
}

double unit_uniform(std::uint64_t bits) { return double(bits >> 11) * 0x1.0p-53; }

ScanCell scan_cell(const ModelParams& tmpl, std::int64_t num, std::int64_t den,
                   std::uint64_t seed, double horizon_periods, const ScanOptions& options) {
  ScanCell cell;
  cell.ratio_num = num;
  cell.ratio_den = den;
  cell.seed = seed;
  try {
    const auto pair = ResonancePair::from_ratio(num, den);
    ModelParams params = tmpl;
    params.omega = tmpl.b * double(num) / double(den);
    params.pair = pair;
    params.validate();

    std::mt19937_64 gen(options.base_seed * 0x9E3779B97F4A7C15ull + seed);
    cell.I0 = options.I_min + (options.I_max - options.I_min) * unit_uniform(gen());
    cell.phi0 = 2 * kPi * unit_uniform(gen());

    if (!(options.samples_per_period > 4)) {
      throw ParameterError("scan needs more than 4 samples per cyclotron period");
    }
    const double period = 2 * kPi / params.b;
    const double t_end = horizon_periods * period;
    IntegrateOptions io;
    io.tol = options.tol;
    io.sample_count = std::size_t(std::ceil(horizon_periods * options.samples_per_period)) + 1;
    io.log_perihelion = false;
    const auto rp = from_action_angle(params, {cell.I0, cell.phi0}, 0.0);
    const Trajectory polar =
        integrate(params, PolarState{rp.r, 0.0, rp.p_r, params.p_theta}, 0.0, t_end, io);
    const Trajectory aa = to_action_angle(params, polar);

    std::vector<double> I(aa.size());
    for (std::size_t i = 0; i < aa.size(); ++i) I[i] = aa.states(Eigen::Index(i), 0);
    const double med = median(I);
    const double mx = *std::max_element(I.begin(), I.end());
    cell.max_over_median = med > 0 ? mx / med : std::numeric_limits<double>::infinity();
    const auto fit = fit_linear_growth(aa.times, I, 0.5);
    cell.C_fit = fit.slope;
    const std::vector<double> head(I.begin(), I.begin() + std::ptrdiff_t(std::max<std::size_t>(1, I.size() / 10)));
    const double I_early = std::max(median(head), 0.1);
    const bool growing = fit.slope > 3 * fit.slope_stderr && fit.slope * t_end > 10 * I_early;
    if (growing) {
      cell.classification = ScanClass::accelerating;
      try {
        const auto ph = extract_phase(params, aa);
        cell.phi_infty = ph.value;
        const double fp = eval_deriv(params.profile, -params.lambda() * (ph.value + 0.5 * kPi), 1);
        cell.C_formula = -0.5 * params.epsilon * params.omega * fp;
        cell.discrepancy = std::abs(cell.C_fit - cell.C_formula) / std::abs(cell.C_fit);
      } catch (const NonConvergent&) {
        // phase not settled; slope-only classification
      }
    } else if (cell.max_over_median <= 5.0) {
      cell.classification = ScanClass::bounded;
    } else {
      cell.classification = ScanClass::undecided;
    }
  } catch (const std::exception& e) {
    cell.classification = ScanClass::failed;
    cell.error = e.what();
  }
  return cell;
}

unsigned scan_threads(unsigned requested) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned cap = hw;
  if (const char* env = std::getenv("CYCLORES_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) cap = unsigned(v);
  }
  if (requested > 0) cap = std::min(cap, requested);
  return std::max(1u, cap);
}

std::vector<ScanCell> resonance_scan(const ModelParams& tmpl,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& ratios,
                                     std::uint64_t seeds, double horizon_periods,
                                     const ScanOptions& options) {
  struct Task {
    std::int64_t num, den;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& [num, den] : ratios) {
    for (std::uint64_t s = 0; s < seeds; ++s) tasks.push_back({num, den, s});
  }
  std::vector<ScanCell> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      out[i] = scan_cell(tmpl, tasks[i].num, tasks[i].den, tasks[i].seed, horizon_periods, options);
    }
  };
  const unsigned n = std::min<unsigned>(scan_threads(options.threads), unsigned(std::max<std::size_t>(1, tasks.size())));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, double>> acceleration_fraction(
    const std::vector<ScanCell>& cells) {
  std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, double>> out;
  std::vector<std::size_t> totals;
  for (const auto& c : cells) {
    const std::pair<std::int64_t, std::int64_t> key{c.ratio_num, c.ratio_den};
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == key; });
    if (it == out.end()) {
      out.push_back({key, 0.0});
      totals.push_back(0);
      it = out.end() - 1;
    }
    const auto k = std::size_t(it - out.begin());
    ++totals[k];
    if (c.classification == ScanClass::accelerating) it->second += 1.0;
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k].second /= double(totals[k]);
  return out;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanCell>& cells,
                    const std::string& provenance) {
  if (!provenance.empty()) os << "# " << provenance << '\n';
  os << "ratio_num,ratio_den,seed,classification,C_fit,C_formula,phi_infty,discrepancy,error\n";
  for (const auto& c : cells) {
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << c.ratio_num << ',' << c.ratio_den << ',' << c.seed << ',' << scan_class_name(c.classification)
       << ',' << format_double(c.C_fit) << ',' << format_double(c.C_formula) << ','
       << format_double(c.phi_infty) << ',' << format_double(c.discrepancy) << ',' << err << '\n';
  }
}

}  // namespace cyclores
