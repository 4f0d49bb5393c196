#include "common.hpp"
#include "doctest.h"

#include "cyclores/analysis.hpp"
#include "cyclores/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace cyclores;
using test::pi;

namespace {

std::vector<double> grid(double t0, double t1, std::size_t n) { return linspace(t0, t1, n); }

Trajectory synthetic_aa(const ModelParams& p, const std::vector<double>& t, auto&& I, auto&& phi) {
  Trajectory tr;
  tr.chart = Chart::actionangle;
  tr.times = t;
  tr.states.resize(Eigen::Index(t.size()), 2);
  for (std::size_t i = 0; i < t.size(); ++i) {
    tr.states(Eigen::Index(i), 0) = I(t[i]);
    tr.states(Eigen::Index(i), 1) = p.b * t[i] + phi(t[i]);
  }
  tr.params_digest = p.digest();
  return tr;
}

}  // namespace

TEST_CASE("linear growth fits") {
  const auto t = grid(1.0, 1e4, 5001);
  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) y[i] = 3 * t[i] + 7;
  auto f = fit_linear_growth(t, y);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(f.residual_class == ResidualClass::bounded);
  CHECK(f.t_lo >= 0.5 * 1e4 - 2);
  CHECK(f.t_hi == 1e4);

  for (std::size_t i = 0; i < t.size(); ++i) y[i] = 0.35 * t[i] + std::pow(std::log(t[i]), 2);
  f = fit_linear_growth(t, y);
  CHECK(f.slope == doctest::Approx(0.35).epsilon(1e-2));
  CHECK(f.residual_class == ResidualClass::log_squared);

  for (std::size_t i = 0; i < t.size(); ++i) y[i] = 0.35 * t[i] + 2 * std::log(t[i]);
  CHECK(fit_linear_growth(t, y).residual_class == ResidualClass::log);

  for (std::size_t i = 0; i < t.size(); ++i) y[i] = 5.0 + 0.1 * std::sin(t[i]);
  f = fit_linear_growth(t, y);
  CHECK(std::abs(f.slope) < 1e-4);
  CHECK_THROWS_AS(require_acceleration(t, y), NotAccelerating);

  const std::vector<double> few(10, 1.0);
  CHECK_THROWS_AS(fit_linear_growth(few, few), InsufficientSamples);
}

TEST_CASE("least squares and log spacing") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 0, 1, 1, 1, 2, 1, 3;
  Eigen::VectorXd y(4);
  y << 1, 3, 5, 7;
  const auto ls = least_squares(X, y);
  CHECK(ls.beta[0] == doctest::Approx(1.0));
  CHECK(ls.beta[1] == doctest::Approx(2.0));
  CHECK(ls.rms < 1e-12);
  const auto t = grid(0.0, 1e4, 100001);
  const auto idx = log_spaced_indices(t, 10.0, 1e4, 200);
  CHECK(idx.size() <= 200);
  CHECK(idx.size() > 150);
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
  CHECK(t[idx.front()] >= 10.0);
  CHECK(unit_uniform(0) == 0.0);
  CHECK(unit_uniform(~std::uint64_t(0)) < 1.0);
}

TEST_CASE("limit phase and conjecture report") {
  const auto p = test::spiral_params();
  const auto t = grid(0.0, 2e4, 40001);
  const double phi_inf = 1.77516;
  const auto tr = synthetic_aa(p, t, [](double s) { return 1.0 + 0.2177 * s; },
                               [&](double s) { return phi_inf + 0.3 / (1 + s); });
  const auto ph = extract_phase(p, tr);
  CHECK(ph.value == doctest::Approx(phi_inf).epsilon(1e-4));
  CHECK(ph.error < 1e-4);
  CHECK(ph.spread < 1e-3);

  const auto rep = conjecture_check(p, tr);
  CHECK(rep.C_fit == doctest::Approx(0.2177).epsilon(1e-9));
  CHECK(rep.xi == doctest::Approx(ph.value + pi / 2));
  CHECK(rep.fprime < 0);
  CHECK(rep.sign_ok);
  CHECK(rep.C_formula == doctest::Approx(-0.5 * 0.35 * rep.fprime));
  CHECK(rep.discrepancy < 1e-3);

  const auto drift = synthetic_aa(p, t, [](double s) { return 1.0 + s; },
                                  [](double s) { return 0.5 * std::sin(1e-3 * s); });
  CHECK_THROWS_AS(extract_phase(p, drift), NonConvergent);

  const auto flat = synthetic_aa(p, t, [](double s) { return 2.0 + 0.1 * std::cos(s); },
                                 [](double) { return 0.0; });
  CHECK_THROWS_AS(conjecture_check(p, flat), NotAccelerating);
}

TEST_CASE("unforced motion does not accelerate") {
  const auto p = test::spiral_params(0.0);
  IntegrateOptions io;
  io.sample_count = 4001;
  const auto tr = integrate(p, ActionAngleState{0.5, 0.2}, 0.0, 500.0, io);
  CHECK_THROWS_AS(conjecture_check(p, tr), NotAccelerating);
}

TEST_CASE("resonance scan") {
  const auto p = test::spiral_params();
  ScanOptions opt;
  opt.base_seed = 7;
  opt.threads = 1;
  const auto a = scan_cell(p, 1, 1, 3, 50, opt);
  const auto b = scan_cell(p, 1, 1, 3, 50, opt);
  CHECK(a.I0 == b.I0);
  CHECK(a.phi0 == b.phi0);
  CHECK(a.classification == b.classification);
  CHECK(a.I0 >= opt.I_min);
  CHECK(a.I0 <= opt.I_max);
  CHECK(a.phi0 >= 0);
  CHECK(a.phi0 < 2 * pi);
  const auto c = scan_cell(p, 1, 1, 4, 50, opt);
  CHECK(c.I0 != a.I0);

  opt.threads = 2;
  const std::vector<std::pair<std::int64_t, std::int64_t>> ratios{{1, 1}, {1, 3}};
  const auto cells = resonance_scan(p, ratios, 3, 50, opt);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].ratio_den == 1);
  CHECK(cells[5].ratio_den == 3);
  CHECK(cells[2].seed == 2);
  CHECK(cells[3].I0 == scan_cell(p, 1, 3, 0, 50, opt).I0);
  const auto frac = acceleration_fraction(cells);
  REQUIRE(frac.size() == 2);
  for (const auto& [r, x] : frac) CHECK((x >= 0.0 && x <= 1.0));

  std::ostringstream os;
  write_scan_csv(os, cells, "cyclores chart=scan");
  const std::string text = os.str();
  CHECK(text.find("ratio_num,ratio_den,seed,classification") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 8);
}
