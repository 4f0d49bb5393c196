#include "cyclores/runner.hpp"

#include "cyclores/analysis.hpp"
#include "cyclores/averaging.hpp"
#include "cyclores/decoupled.hpp"
#include "cyclores/errors.hpp"
#include "cyclores/guiding.hpp"

#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cyclores {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

std::string provenance(const ExperimentConfig& c, std::string_view chart) {
  return "cyclores chart=" + std::string(chart) + " params_digest=" + c.params.digest();
}

class Output {
 public:
  explicit Output(const ExperimentConfig& c) : cfg_(c), dir_(c.out) { fs::create_directories(dir_); }

  void table(const std::string& name, CsvTable t) {
    t.write((dir_ / name).string());
    files.push_back(name);
  }
  void text(const std::string& name, const std::string& body) {
    std::ofstream os(dir_ / name, std::ios::binary);
    os << body;
    if (!os) throw Error("cannot write " + (dir_ / name).string());
    files.push_back(name);
  }
  // x-y pairs thinned to at most plot_points rows
  void plot(const std::string& name, std::string xname, std::string yname,
            const std::vector<double>& x, const std::vector<double>& y) {
    CsvTable t;
    t.provenance = provenance(cfg_, "plot");
    t.header = {std::move(xname), std::move(yname)};
    const std::size_t n = x.size();
    const std::size_t stride = std::max<std::size_t>(1, (n + cfg_.plot_points - 1) / cfg_.plot_points);
    for (std::size_t i = 0; i < n; i += stride) t.rows.push_back({x[i], y[i]});
    if (n && (n - 1) % stride) t.rows.push_back({x[n - 1], y[n - 1]});
    table(name, std::move(t));
  }
  const fs::path& dir() const { return dir_; }

  std::vector<std::string> files;

 private:
  const ExperimentConfig& cfg_;
  fs::path dir_;
};

std::vector<double> col(const Trajectory& tr, Eigen::Index j) {
  std::vector<double> v(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) v[i] = tr.states(Eigen::Index(i), j);
  return v;
}

IntegrateOptions options_of(const ExperimentConfig& c) {
  IntegrateOptions io;
  io.tol = c.tol;
  io.sample_count = c.samples;
  return io;
}

json fit_json(const AsymptoticFit& f) {
  json j{{"slope", f.slope},
         {"intercept", f.intercept},
         {"slope_stderr", f.slope_stderr},
         {"t_lo", f.t_lo},
         {"t_hi", f.t_hi},
         {"residual_class", residual_class_name(f.residual_class)},
         {"rms_residual", f.rms_residual}};
  if (f.phi_infty) j["phi_infty"] = *f.phi_infty;
  return j;
}

json conjecture_json(const ConjectureReport& r) {
  return {{"fit", fit_json(r.fit)},   {"C_fit", r.C_fit},         {"phi_infty", r.phi_infty},
          {"phi_stderr", r.phi_stderr}, {"xi", r.xi},             {"fprime", r.fprime},
          {"C_formula", r.C_formula}, {"discrepancy", r.discrepancy}, {"sign_ok", r.sign_ok}};
}

json run_simulate(const ExperimentConfig& c, Output& out) {
  const auto& p = c.params;
  const auto io = options_of(c);
  Trajectory tr;
  if (c.q0 && c.v0) {
    const Vec2 A = vector_potential(p, *c.q0, c.t0);
    tr = integrate(p, CartesianState{*c.q0, *c.v0 + A}, c.t0, c.t1, io);
  } else if (c.I0 && c.phi0) {
    const auto rp = from_action_angle(p, {*c.I0, *c.phi0}, c.t0);
    tr = polar_to_cartesian(integrate(p, PolarState{rp.r, 0.0, rp.p_r, p.p_theta}, c.t0, c.t1, io));
  } else {
    throw ValidationError("simulate mode needs q0 and v0, or I0 and phi0");
  }
  out.table("trajectory.csv", trajectory_table(tr));
  const Trajectory aa = to_action_angle(p, tr);
  out.table("actionangle.csv", actionangle_table(p, aa));
  const GuidingSeries gs = guiding_series(p, tr);
  out.table("guiding.csv", guiding_table(gs));
  out.plot("plot_q.csv", "q1", "q2", col(tr, 0), col(tr, 1));
  out.plot("plot_I.csv", "t", "I", aa.times, col(aa, 0));

  double p_drift = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto ps = cartesian_to_polar(cartesian_state(tr, i));
    p_drift = std::max(p_drift, std::abs(ps.p_theta - p.p_theta) / p.p_theta);
  }
  json events = json::array();
  for (const auto& e : tr.events) events.push_back({{"t", e.t}, {"r", e.r}});
  return {{"samples", tr.size()},
          {"p_theta", p.p_theta},
          {"p_theta_rel_drift", p_drift},
          {"accepted_steps", tr.stats.accepted},
          {"rejected_steps", tr.stats.rejected},
          {"perihelion_events", events}};
}

json run_averaged(const ExperimentConfig& c, Output& out) {
  const auto& p = c.params;
  const auto pair = *p.pair;
  const AveragedState s0{c.chi0.value_or(0.0), c.J0.value_or(c.I0.value_or(1.0))};
  const Trajectory red = integrate_reduced(p, pair, s0, c.t0, c.t1, options_of(c));
  out.table("averaged.csv", averaged_table(p, pair, red));
  out.plot("plot_J1.csv", "t", "J1", red.times, col(red, 1));
  const json summary{{"samples", red.size()},
                     {"chi1_end", red.states(Eigen::Index(red.size()) - 1, 0)},
                     {"J1_end", red.states(Eigen::Index(red.size()) - 1, 1)},
                     {"resonant", is_resonant(p.profile, pair)}};
  return summary;
}

json run_decoupled(const ExperimentConfig& c, Output& out) {
  const auto& p = c.params;
  const double phi = c.phi0.value_or(0.0);
  const Trajectory tr = integrate_frozen_phase(p, *c.F0, phi, c.t0, c.t1, options_of(c));
  out.table("decoupled.csv", decoupled_table(tr));
  out.plot("plot_F.csv", "t", "F", tr.times, col(tr, 0));
  json summary{{"samples", tr.size()}, {"F_end", tr.states(Eigen::Index(tr.size()) - 1, 0)},
               {"F_over_t_end", tr.states(Eigen::Index(tr.size()) - 1, 0) / tr.times.back()}};
  try {
    const auto pred = predicted_slope(p, phi);
    summary["predicted_F_slope"] = pred.F_slope;
    summary["outside_proven_regime"] = pred.outside_proven_regime;
  } catch (const SignError& e) {
    summary["predicted_F_slope"] = nullptr;
    summary["prediction"] = e.what();
  }
  return summary;
}

json run_analyze(const ExperimentConfig& c, Output& out) {
  const auto& p = c.params;
  const CsvTable table = CsvTable::read_file(c.trajectory);
  const std::string digest = table.provenance_value("params_digest");
  if (digest != p.digest()) {
    throw ValidationError("trajectory params_digest '" + digest + "' does not match the config ('" +
                          p.digest() + "')");
  }
  Trajectory tr = trajectory_from_table(table);
  tr.params_digest = digest;
  const Trajectory aa = tr.chart == Chart::actionangle ? tr : to_action_angle(p, tr);
  const auto rep = conjecture_check(p, aa);
  json report{{"conjecture", conjecture_json(rep)}};
  if (tr.chart == Chart::cartesian || tr.chart == Chart::polar) {
    const GuidingSeries gs = guiding_series(p, tr);
    const auto xr = xr_growth_check(p, gs, p.b * rep.C_fit);
    report["guiding"] = {{"target", xr.target},        {"X2_slope", xr.X2.slope},
                         {"R2_slope", xr.R2.slope},    {"rel_err_X", xr.rel_err_X},
                         {"rel_err_R", xr.rel_err_R}, {"ratio_XR", xr.ratio_XR}};
    try {
      const auto cd = chi_drift_check(p, gs, rep.xi);
      report["chi_drift"] = {{"D_fit", cd.D_fit}, {"D_formula", cd.D_formula}, {"rel_err", cd.rel_err}};
    } catch (const DegenerateDenominator& e) {
      report["chi_drift"] = {{"error", e.what()}};
    }
  }
  out.text("report.json", report.dump(2) + "\n");
  return report;
}

json run_scan(const ExperimentConfig& c, Output& out) {
  ScanOptions so;
  so.base_seed = c.seed;
  so.tol = c.tol;
  const auto cells = resonance_scan(c.params, c.ratios, c.seeds, c.scan_periods, so);
  std::ostringstream os;
  write_scan_csv(os, cells, provenance(c, "scan"));
  out.text("scan.csv", os.str());
  json fr = json::array();
  for (const auto& [ratio, f] : acceleration_fraction(cells)) {
    fr.push_back({{"ratio", std::to_string(ratio.first) + "/" + std::to_string(ratio.second)}, {"accelerating_fraction", f}});
  }
  return {{"cells", cells.size()}, {"fractions", fr}};
}

json run_periodmap(const ExperimentConfig& c, Output& out) {
  const double rho = c.pm_rho, a = c.pm_a;
  const ScalarFn frho = [rho](double) { return rho; };
  const ScalarFn fa = [a](double) { return a; };
  std::vector<PeriodMapResult> res;
  json warn = json::array();
  for (double h0 : c.pm_h0) {
    res.push_back(c.pm_full ? full_period_map(frho, fa, h0) : half_period_map(frho, fa, h0));
    if (!res.back().bound_satisfied) warn.push_back(h0);
  }
  CsvTable t = period_map_table(res);
  t.provenance = provenance(c, "periodmap");
  out.table("periodmap.csv", std::move(t));
  return {{"maps", res.size()}, {"below_existence_bound", warn}};
}

}  // namespace

ExperimentConfig apply_overrides(ExperimentConfig c, const RunOverrides& o) {
  if (o.out) c.out = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.tol) c.tol = *o.tol;
  if (o.horizon) {
    if (!(*o.horizon > 0.0)) throw ValidationError("horizon must be positive");
    if (c.mode == Mode::scan) {
      c.scan_periods = *o.horizon;
    } else {
      c.t1 = c.t0 + *o.horizon;
    }
  }
  return c;
}

RunResult run(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  Output out(c);
  json summary;
  switch (c.mode) {
    case Mode::simulate: summary = run_simulate(c, out); break;
    case Mode::averaged: summary = run_averaged(c, out); break;
    case Mode::decoupled: summary = run_decoupled(c, out); break;
    case Mode::analyze: summary = run_analyze(c, out); break;
    case Mode::scan: summary = run_scan(c, out); break;
    case Mode::periodmap: summary = run_periodmap(c, out); break;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json manifest{{"tool", "cyclores"},
                      {"version", CYCLORES_VERSION},
                      {"mode", mode_name(c.mode)},
                      {"params_digest", c.params.digest()},
                      {"config", serialize_config(c)},
                      {"wall_time_s", wall},
                      {"files", out.files},
                      {"summary", summary}};
  RunResult r;
  r.files = out.files;
  r.manifest_path = (out.dir() / "manifest.json").string();
  std::ofstream os(r.manifest_path, std::ios::binary);
  os << manifest.dump(2) << '\n';
  if (!os) throw Error("cannot write " + r.manifest_path);
  return r;
}

std::string error_kind(const std::exception& e) {
#define CYCLORES_KIND(T) \
  if (dynamic_cast<const T*>(&e)) return #T
  CYCLORES_KIND(ParseError);
  CYCLORES_KIND(ValidationError);
  CYCLORES_KIND(ParameterError);
  CYCLORES_KIND(DomainError);
  CYCLORES_KIND(InsufficientSamples);
  CYCLORES_KIND(NoConvergence);
  CYCLORES_KIND(NonConvergent);
  CYCLORES_KIND(NotAccelerating);
  CYCLORES_KIND(SignError);
  CYCLORES_KIND(DegenerateDenominator);
  CYCLORES_KIND(ExistenceBound);
  CYCLORES_KIND(StepFloorReached);
#undef CYCLORES_KIND
  return "Error";
}

void write_error_record(const std::string& dir, const std::exception& e) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  json j{{"error", error_kind(e)}, {"message", e.what()}};
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
    j["line"] = pe->line;
    j["column"] = pe->column;
  }
  std::ofstream os(fs::path(dir) / "error.json", std::ios::binary);
  os << j.dump(2) << '\n';
}

}  // namespace cyclores
