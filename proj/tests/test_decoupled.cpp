#include "common.hpp"
#include "doctest.h"

#include "cyclores/decoupled.hpp"
#include "cyclores/errors.hpp"

#include <cmath>

using namespace cyclores;
using test::pi;

TEST_CASE("kick ratio is bounded") {
  std::mt19937_64 g(17);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = test::uniform(g, 1e-3, 10);
    const double F = a * (i % 10 == 0 ? 1.0 : 1.0 + std::pow(10.0, test::uniform(g, -12, 4)));
    const double s = i % 7 == 0 ? -pi / 2 + test::uniform(g, -1e-6, 1e-6) : test::uniform(g, -10, 10);
    const double r = kick_ratio(F, a, s);
    CHECK(std::isfinite(r));
    worst = std::max(worst, std::abs(r));
    const double naive = F + std::sqrt(F * F - a * a) * std::sin(s);
    CHECK(std::abs(kick_denominator(F, a, s) - naive) <= 1e-12 * F);
  }
  CHECK(worst <= 1.0 + 1e-12);
  CHECK(kick_ratio(2.0, 2.0, 0.3) == doctest::Approx(std::cos(0.3)));
}

TEST_CASE("decoupled right-hand sides") {
  const auto p = test::spiral_params();
  const double t = 0.8, a = p.a(t);
  CHECK(f_rhs_frozen_phase(p, a * (1 + 1e-12), t, 0.4) == doctest::Approx(p.a_prime(t)).epsilon(1e-6));
  CHECK_THROWS_AS(f_rhs_frozen_phase(p, 0.5 * a, t, 0.0), DomainError);
  const double F = 3.0, s = p.b * t + 0.4;
  const double expected = -a * p.a_prime(t) * std::cos(s) /
                          (std::sqrt(F * F - a * a) * (F + std::sqrt(F * F - a * a) * std::sin(s)));
  CHECK(phi_rhs_prescribed_F(p, 0.4, t, F) == doctest::Approx(expected));
  CHECK(phi_rhs_prescribed_F(p, 0.4, t, [](double) { return 3.0; }) == doctest::Approx(expected));
  const auto kt = kick_times(p, 0.3, 0.0, 50.0);
  REQUIRE(kt.size() >= 7);
  for (std::size_t i = 0; i < kt.size(); ++i) {
    CHECK(std::abs(std::sin(p.b * kt[i] + 0.3) + 1) < 1e-12);
    if (i) CHECK(kt[i] - kt[i - 1] == doctest::Approx(2 * pi));
  }
}

TEST_CASE("linear-growth prediction") {
  const auto p = test::spiral_params();
  const auto s = predicted_slope(p, 1.77516);
  CHECK(s.xi == doctest::Approx(1.77516 + pi / 2));
  CHECK(s.fprime == doctest::Approx(std::cos(-s.xi) + 2.0 / 3.0 * std::sin(-2 * s.xi)));
  CHECK(s.F_slope == doctest::Approx(0.35 * std::abs(s.fprime)));
  CHECK(s.I_slope == doctest::Approx(0.5 * s.F_slope));
  CHECK(s.I_slope == doctest::Approx(0.2177).epsilon(1e-3));
  CHECK_FALSE(s.outside_proven_regime);
  CHECK_THROWS_AS(predicted_slope(p, -pi / 2), SignError);
}

TEST_CASE("frozen-phase integration") {
  const auto p = test::spiral_params();
  IntegrateOptions io;
  io.tol = {1e-12, 1e-12};
  io.sample_count = 101;
  const auto tr = integrate_frozen_phase(p, 20.0, pi / 2, 0.0, 200.0, io);
  CHECK(tr.chart == Chart::decoupled);
  CHECK((tr.states.col(1).array() == pi / 2).all());
  CHECK(tr.events.size() == kick_times(p, pi / 2, 0.0, 200.0).size());
  CHECK(tr.states(tr.states.rows() - 1, 0) > 20.0);
}

TEST_CASE("period maps") {
  const ScalarFn one = [](double) { return 1.0; };
  const ScalarFn zero = [](double) { return 0.0; };

  const auto z = full_period_map(zero, one, 10.0);
  CHECK(z.increment == 0.0);
  CHECK(z.h_end == 10.0);

  const auto full = full_period_map(one, one, 1e5);
  CHECK(full.predicted_increment == doctest::Approx(2 * pi));
  CHECK(std::abs(full.increment - 2 * pi) < 1e-4);
  // sufficient condition exp(4 pi) max a ~ 2.9e5
  CHECK_FALSE(full.bound_satisfied);
  CHECK(full_period_map(one, one, 1e6).bound_satisfied);

  const auto half = half_period_map(one, one, 1e6);
  CHECK(std::abs(half.increment - pi) < 1e-4);

  // no kick when rho vanishes at the kick centre
  const ScalarFn dip = [](double t) { return 1.0 + std::cos(t); };
  const auto d = full_period_map(dip, one, 1e5);
  CHECK(d.predicted_increment == doctest::Approx(0.0));
  CHECK(std::abs(d.increment) < 1e-3);

  // composing segments
  const auto s1 = period_map_segment(dip, one, 50.0, 0.0, pi / 2, 1);
  const auto s2 = period_map_segment(dip, one, s1.h_end, pi / 2, pi, 1);
  const auto s12 = period_map_segment(dip, one, 50.0, 0.0, pi, 1);
  CHECK(s2.h_end == doctest::Approx(s12.h_end).epsilon(1e-10));

  const ScalarFn osc = [](double t) { return std::cos(t); };
  CHECK_THROWS_AS(full_period_map(osc, one, 2.0), ExistenceBound);
  const auto weak = full_period_map(one, one, 2.0);
  CHECK_FALSE(weak.bound_satisfied);
  CHECK_THROWS_AS(full_period_map(one, one, 0.5), DomainError);
  CHECK_THROWS_AS(period_map_segment(one, one, 10.0, 1.0, 0.0, 1), ParameterError);

  const auto table = period_map_table({full, half});
  CHECK(table.rows.size() == 2);
}
