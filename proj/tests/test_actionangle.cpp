#include "common.hpp"
#include "doctest.h"

#include "cyclores/actionangle.hpp"
#include "cyclores/errors.hpp"

#include <cmath>

using namespace cyclores;
using test::pi;

TEST_CASE("hand-evaluated points") {
  const auto s = action_angle_at(1.0, 1.0, 2.0, 0.0);
  CHECK(s.I == doctest::Approx(0.125));
  CHECK(s.phi == doctest::Approx(pi / 2));
  const auto rp = radial_at(1.0, 1.0, {0.125, pi / 2});
  CHECK(rp.r == doctest::Approx(2.0));
  CHECK(std::abs(rp.p_r) < 1e-15);
  const auto c = action_angle_at(1.0, 1.0, std::sqrt(2.0), 0.0);
  CHECK(std::abs(c.I) < 1e-15);
  for (double phi : {0.0, 1.0, 4.0}) {
    const auto z = radial_at(1.5, 2.0, {0.0, phi});
    CHECK(z.r == doctest::Approx(std::sqrt(1.5)));
    CHECK(z.p_r == 0.0);
  }
  const auto a = radial_at(1.0, 1.0, {0.4, 0.3});
  const auto b = radial_at(1.0, 1.0, {0.4, 0.3 + 2 * pi});
  CHECK(std::abs(a.r - b.r) < 1e-14);
  CHECK(std::abs(a.p_r - b.p_r) < 1e-14);
}

TEST_CASE("round trips, ranges and energy relation") {
  std::mt19937_64 g(9);
  double worst = 0, worst_h = 0;
  const auto p = test::spiral_params();
  for (int i = 0; i < 1000; ++i) {
    const double a = test::uniform(g, 0.5, 2), b = test::uniform(g, 0.5, 2);
    const double r = test::uniform(g, 0.1, 10), pr = test::uniform(g, -10, 10);
    const auto s = action_angle_at(a, b, r, pr);
    const auto back = radial_at(a, b, s);
    worst = std::max({worst, std::abs(back.r - r) / r, std::abs(back.p_r - pr) / std::max(1.0, std::abs(pr))});
    const double rm = std::sqrt(2 / b) * (std::sqrt(s.I + a) - std::sqrt(s.I));
    const double rpl = std::sqrt(2 / b) * (std::sqrt(s.I + a) + std::sqrt(s.I));
    CHECK(r >= rm * (1 - 1e-12));
    CHECK(r <= rpl * (1 + 1e-12));
    const double t = test::uniform(g, 0, 10);
    const auto st = to_action_angle(p, r, pr, t);
    const double h = hamiltonian_polar(p, {r, 0.0, pr, p.p_theta}, t);
    worst_h = std::max(worst_h, std::abs(h - p.b * (st.I + p.a(t))) / h);
  }
  CHECK(worst <= 1e-11);
  CHECK(worst_h <= 1e-10);
  CHECK(r_minus(p, 2.0, 0.3) == doctest::Approx(std::sqrt(2.0) * (std::sqrt(2 + p.a(0.3)) - std::sqrt(2.0))));
  CHECK(r_plus(p, 2.0, 0.3) == doctest::Approx(std::sqrt(2.0) * (std::sqrt(2 + p.a(0.3)) + std::sqrt(2.0))));
}

TEST_CASE("the chart is canonical") {
  std::mt19937_64 g(10);
  for (int i = 0; i < 200; ++i) {
    const double a = test::uniform(g, 0.5, 2), b = test::uniform(g, 0.5, 2);
    const double r = test::uniform(g, 0.3, 5), pr = test::uniform(g, -3, 3);
    const double h = 1e-6;
    auto S = [&](double rr, double pp) { return action_angle_at(a, b, rr, pp); };
    auto unwrap = [](double x, double ref) { return x + 2 * pi * std::round((ref - x) / (2 * pi)); };
    const auto c = S(r, pr);
    const auto r1 = S(r + h, pr), r0 = S(r - h, pr), p1 = S(r, pr + h), p0 = S(r, pr - h);
    const double dphi_dr = (unwrap(r1.phi, c.phi) - unwrap(r0.phi, c.phi)) / (2 * h);
    const double dphi_dp = (unwrap(p1.phi, c.phi) - unwrap(p0.phi, c.phi)) / (2 * h);
    const double dI_dr = (r1.I - r0.I) / (2 * h), dI_dp = (p1.I - p0.I) / (2 * h);
    CHECK(std::abs(dphi_dr * dI_dp - dphi_dp * dI_dr - 1.0) <= 1e-6);
  }
}

TEST_CASE("equations of motion in action-angle form") {
  const auto p0 = test::spiral_params(0.0);
  const auto e0 = eom_action_angle(p0, {1.0, 0.2}, 0.0);
  CHECK(e0.dphi == doctest::Approx(1.0));
  CHECK(e0.dI == 0.0);
  CHECK(hamiltonian_hc(p0, {0.7, 2.0}, 1.0) == doctest::Approx(0.7));
  const auto p = test::spiral_params();
  CHECK(hamiltonian_hc(p, {0.0, 1.0}, 0.3) == 0.0);
  CHECK_THROWS_AS(eom_action_angle(p, {0.0, 0.3}, 0.0), DomainError);

  // large-action limit away from the kick: dI -> -a'/2 at sin phi = 1
  const double t = 0.4;
  const auto big = eom_action_angle(p, {1e8, pi / 2}, t);
  CHECK(big.dI == doctest::Approx(-0.5 * p.a_prime(t)).epsilon(1e-3));

  std::mt19937_64 g(12);
  for (int i = 0; i < 100; ++i) {
    const ActionAngleState s{test::uniform(g, 0.1, 5), test::uniform(g, -pi, pi)};
    const double tt = test::uniform(g, 0, 10);
    const double h = 1e-6;
    const auto e = eom_action_angle(p, s, tt);
    const double dHdI = (hamiltonian_hc(p, {s.I + h, s.phi}, tt) - hamiltonian_hc(p, {s.I - h, s.phi}, tt)) / (2 * h);
    const double dHdphi = (hamiltonian_hc(p, {s.I, s.phi + h}, tt) - hamiltonian_hc(p, {s.I, s.phi - h}, tt)) / (2 * h);
    CHECK(std::abs(e.dphi - dHdI) <= 1e-6 * std::max(1.0, std::abs(dHdI)));
    CHECK(std::abs(e.dI + dHdphi) <= 1e-6 * std::max(1.0, std::abs(dHdphi)));

    // pushforward of the radial flow
    const auto rp = from_action_angle(p, s, tt);
    const auto rr = eom_radial(p, rp.r, rp.p_r, tt);
    const double dt = 1e-6;
    const auto fw = to_action_angle(p, rp.r + dt * rr.dr, rp.p_r + dt * rr.dp_r, tt + dt);
    const auto rr_b = eom_radial(p, rp.r, rp.p_r, tt);
    const auto bw = to_action_angle(p, rp.r - dt * rr_b.dr, rp.p_r - dt * rr_b.dp_r, tt - dt);
    const double dI = (fw.I - bw.I) / (2 * dt);
    CHECK(std::abs(dI - e.dI) <= 1e-5 * std::max(1.0, std::abs(e.dI)));
  }
}

TEST_CASE("action-angle integration matches the radial chart") {
  const auto p = test::spiral_params();
  const ActionAngleState s0{0.8, 0.3};
  IntegrateOptions io;
  io.sample_count = 2001;
  const auto aa = integrate(p, s0, 0.0, 100.0, io);
  const auto rp = from_action_angle(p, s0, 0.0);
  const auto pol = integrate(p, PolarState{rp.r, 0.0, rp.p_r, p.p_theta}, 0.0, 100.0, io);
  const auto conv = to_action_angle(p, pol);
  double worst = 0;
  for (std::size_t i = 0; i < aa.size(); ++i) {
    const auto a = from_action_angle(p, {aa.states(Eigen::Index(i), 0), aa.states(Eigen::Index(i), 1)}, aa.times[i]);
    worst = std::max(worst, std::abs(a.r - pol.states(Eigen::Index(i), 0)));
    CHECK(std::abs(conv.states(Eigen::Index(i), 1) - aa.states(Eigen::Index(i), 1)) < 1e-5);
  }
  CHECK(worst <= 1e-6);
  const auto table = actionangle_table(p, conv);
  CHECK(table.header == std::vector<std::string>{"t", "I", "phi", "r_minus", "r_plus"});
  Trajectory coarse = pol;
  coarse.times = {0.0, 3.0};
  coarse.states = pol.states.topRows(2);
  CHECK_THROWS_AS(to_action_angle(p, coarse), ParameterError);
}
