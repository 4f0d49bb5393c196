#include "common.hpp"
#include "doctest.h"

#include "cyclores/dynamics.hpp"
#include "cyclores/errors.hpp"

#include <cmath>
#include <sstream>

using namespace cyclores;
using test::pi;

namespace {

Vec2 rotate(const Vec2& x, double a) {
  return {std::cos(a) * x.x() - std::sin(a) * x.y(), std::sin(a) * x.x() + std::cos(a) * x.y()};
}

}  // namespace

TEST_CASE("cartesian Hamiltonian") {
  const auto p0 = ModelParams::make(1, 1, 0.0, 1.0, test::spiral_profile());
  CHECK(hamiltonian_cartesian(p0, {Vec2(1, 0), Vec2(0, 0.5)}, 0.0) == doctest::Approx(0.5));
  const auto p = test::spiral_params();
  const Vec2 q(0.3, -1.2);
  CHECK(hamiltonian_cartesian(p, {q, vector_potential(p, q, 0.4)}, 0.4) == 0.0);
  CHECK_THROWS_AS(hamiltonian_cartesian(p, {Vec2(0, 0), Vec2(1, 0)}, 0.0), DomainError);

  std::mt19937_64 g(1);
  for (int i = 0; i < 100; ++i) {
    const Vec2 qq(test::uniform(g, -3, 3), test::uniform(g, -3, 3));
    const Vec2 pp(test::uniform(g, -3, 3), test::uniform(g, -3, 3));
    const double t = test::uniform(g, 0, 10), ang = test::uniform(g, 0, 2 * pi);
    const double h1 = hamiltonian_cartesian(p, {qq, pp}, t);
    const double h2 = hamiltonian_cartesian(p, {rotate(qq, ang), rotate(pp, ang)}, t);
    CHECK(std::abs(h1 - h2) <= 1e-12 * std::max(1.0, h1));
  }
}

TEST_CASE("cartesian equations are the exact gradient") {
  const auto p = test::spiral_params();
  std::mt19937_64 g(2);
  for (int i = 0; i < 100; ++i) {
    const CartesianState s{Vec2(test::uniform(g, -2, 2), test::uniform(g, -2, 2)),
                           Vec2(test::uniform(g, -2, 2), test::uniform(g, -2, 2))};
    if (s.q.norm() < 0.2) continue;
    const double t = test::uniform(g, 0, 10);
    const auto d = eom_cartesian(p, s, t);
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
      CartesianState a = s, b = s;
      a.p[j] += h;
      b.p[j] -= h;
      const double dHdp = (hamiltonian_cartesian(p, a, t) - hamiltonian_cartesian(p, b, t)) / (2 * h);
      a = s;
      b = s;
      a.q[j] += h;
      b.q[j] -= h;
      const double dHdq = (hamiltonian_cartesian(p, a, t) - hamiltonian_cartesian(p, b, t)) / (2 * h);
      CHECK(std::abs(d.dq[j] - dHdp) <= 1e-6 * std::max(1.0, std::abs(dHdp)));
      CHECK(std::abs(d.dp[j] + dHdq) <= 1e-6 * std::max(1.0, std::abs(dHdq)));
    }
    // d(q ^ p)/dt = 0
    CHECK(std::abs(wedge(d.dq, s.p) + wedge(s.q, d.dp)) < 1e-12 * std::max(1.0, s.p.squaredNorm()));
  }
  const auto p0 = ModelParams::make(1, 1, 0.0, 1.0, test::spiral_profile());
  const auto d0 = eom_cartesian(p0, {Vec2(1, 0), Vec2(0, 0.5)}, 0.0);
  CHECK(d0.dq.isApprox(Vec2(0, 1)));
}

TEST_CASE("radial chart") {
  const auto p = ModelParams::make(2, 1, 0.0, 1.0, FluxProfile{});
  const auto d = eom_radial(p, 1.0, 0.0, 0.0);
  CHECK(std::abs(d.dp_r) < 1e-15);
  const auto p1 = ModelParams::make(1, 1, 0.0, 1.0, FluxProfile{});
  CHECK(std::abs(eom_radial(p1, std::sqrt(2.0), 0.0, 0.0).dp_r) < 1e-15);
  CHECK(theta_rate(p1, {std::sqrt(2.0), 0, 0, 1.0}, 0.0) == doctest::Approx(1.0));
  CHECK(theta_rate(p1, {1e9, 0, 0, 1.0}, 0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(eom_radial(p1, 0.0, 0.0, 0.0), DomainError);

  const auto pf = test::spiral_params();
  std::mt19937_64 g(3);
  for (int i = 0; i < 100; ++i) {
    const double r = test::uniform(g, 0.2, 5), pr = test::uniform(g, -3, 3), t = test::uniform(g, 0, 9);
    const double h = 1e-6;
    const auto e = eom_radial(pf, r, pr, t);
    const double dr = (hamiltonian_radial(pf, r + h, pr, t) - hamiltonian_radial(pf, r - h, pr, t)) / (2 * h);
    const double dp = (hamiltonian_radial(pf, r, pr + h, t) - hamiltonian_radial(pf, r, pr - h, t)) / (2 * h);
    CHECK(std::abs(e.dr - dp) <= 1e-6 * std::max(1.0, std::abs(dp)));
    CHECK(std::abs(e.dp_r + dr) <= 1e-6 * std::max(1.0, std::abs(dr)));
    // H_polar = H_rad + a b / 2
    const double hp = hamiltonian_polar(pf, {r, 0.0, pr, pf.p_theta}, t);
    CHECK(std::abs(hp - hamiltonian_radial(pf, r, pr, t) - 0.5 * pf.a(t) * pf.b) < 1e-12 * hp);
  }
}

TEST_CASE("chart conversions") {
  const auto ps = cartesian_to_polar({Vec2(1, 0), Vec2(0, 1)});
  CHECK(ps.r == 1.0);
  CHECK(ps.theta == 0.0);
  CHECK(ps.p_r == 0.0);
  CHECK(ps.p_theta == 1.0);
  std::mt19937_64 g(4);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const CartesianState s{Vec2(test::uniform(g, -3, 3), test::uniform(g, -3, 3)),
                           Vec2(test::uniform(g, -3, 3), test::uniform(g, -3, 3))};
    const auto back = polar_to_cartesian(cartesian_to_polar(s));
    worst = std::max({worst, (back.q - s.q).norm(), (back.p - s.p).norm()});
  }
  CHECK(worst <= 1e-13);
  // continuation past the branch cut
  double ref = 0;
  for (int k = 1; k <= 16; ++k) {
    const double ang = 2 * pi * k / 8;
    ref = cartesian_to_polar({Vec2(std::cos(ang), std::sin(ang)), Vec2(0, 0)}, ref).theta;
  }
  CHECK(ref == doctest::Approx(4 * pi));
  CHECK_THROWS_AS(cartesian_to_polar({Vec2(0, 0), Vec2(1, 1)}), DomainError);
}

TEST_CASE("p_theta from the initial velocity") {
  const double pt = p_theta_from_velocity(1, 1, 0.35, test::spiral_profile(), Vec2(1, 0), Vec2(0, 1.617));
  CHECK(pt == doctest::Approx(1.617 - 0.5 - 0.35 / 3).epsilon(1e-14));
}

TEST_CASE("integration invariants") {
  SUBCASE("energy without drive") {
    const auto p = ModelParams::make(1, 1, 0.0, 0.7, test::spiral_profile());
    const CartesianState s{Vec2(0.8, 0.1), Vec2(0.2, 0.9)};
    IntegrateOptions io;
    io.tol = {1e-11, 1e-13};
    io.sample_count = 2001;
    const auto tr = integrate(p, s, 0.0, 1000.0, io);
    const double h0 = hamiltonian_cartesian(p, s, 0.0);
    double drift = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      drift = std::max(drift, std::abs(hamiltonian_cartesian(p, cartesian_state(tr, i), tr.times[i]) - h0) / h0);
    }
    CHECK(drift <= 1e-8);
  }
  SUBCASE("angular momentum and energy-rate identity on the spiral") {
    const auto p = test::spiral_params();
    const Vec2 q0(1, 0);
    const CartesianState s{q0, Vec2(0, 1.617) + vector_potential(p, q0, 0.0)};
    CHECK(wedge(s.q, s.p) == doctest::Approx(p.p_theta).epsilon(1e-14));
    IntegrateOptions io;
    io.tol = {1e-11, 1e-13};
    io.sample_count = 3001;
    const auto tr = integrate(p, s, 0.0, 150.0, io);
    double drift = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const auto c = cartesian_state(tr, i);
      drift = std::max(drift, std::abs(wedge(c.q, c.p) - p.p_theta) / p.p_theta);
    }
    CHECK(drift <= 1e-8);
    IntegrateOptions fine;
    fine.tol = {1e-12, 1e-14};
    fine.sample_count = 50001;
    const auto tf = integrate(p, s, 0.0, 50.0, fine);
    CHECK(energy_rate_identity_residual(p, tf) <= 1e-6);
  }
  SUBCASE("cartesian and radial charts agree") {
    const auto p = test::spiral_params();
    const Vec2 q0(1, 0);
    const CartesianState s{q0, Vec2(0, 1.617) + vector_potential(p, q0, 0.0)};
    const auto tc = integrate(p, s, 0.0, 100.0);
    const auto tp = integrate(p, cartesian_to_polar(s), 0.0, 100.0);
    double worst = 0;
    for (std::size_t i = 0; i < tc.size(); ++i) {
      worst = std::max(worst, std::abs(cartesian_state(tc, i).q.norm() - tp.states(Eigen::Index(i), 0)));
    }
    CHECK(worst <= 1e-6);
    // unwrapped theta matches theta_rate by differentiation
    for (std::size_t i = 100; i < 110; ++i) {
      const double dt = tp.times[i + 1] - tp.times[i - 1];
      const double fd = (tp.states(Eigen::Index(i + 1), 1) - tp.states(Eigen::Index(i - 1), 1)) / dt;
      CHECK(fd == doctest::Approx(theta_rate(p, polar_state(tp, i), tp.times[i])).epsilon(1e-3));
    }
  }
  SUBCASE("error paths") {
    const auto p = test::spiral_params();
    Trajectory one;
    one.chart = Chart::cartesian;
    one.times = {0.0};
    one.states = Eigen::MatrixXd::Zero(1, 4);
    CHECK_THROWS_AS(energy_rate_identity_residual(p, one), InsufficientSamples);
    CHECK_THROWS_AS(integrate(p, PolarState{1.0, 0.0, 0.0, 2.0}, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(integrate(p, CartesianState{Vec2(1, 0), Vec2(0, 1)}, 1.0, 0.0), ParameterError);
  }
}

TEST_CASE("trajectory CSV round trip") {
  const auto p = test::spiral_params();
  const auto tr = integrate(p, PolarState{1.0, 0.0, 0.1, p.p_theta}, 0.0, 5.0);
  std::stringstream ss;
  trajectory_table(tr).write(ss);
  const auto back = trajectory_from_table(CsvTable::read(ss));
  CHECK(back.chart == Chart::polar);
  CHECK(back.times == tr.times);
  CHECK(back.states == tr.states);
  std::stringstream again(ss.str());
  const auto t2 = CsvTable::read(again);
  CHECK(t2.provenance_value("params_digest") == p.digest());
}
