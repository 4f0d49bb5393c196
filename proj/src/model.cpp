#include "cyclores/model.hpp"

#include "cyclores/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cyclores {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

ModelParams ModelParams::make(double b, double omega, double epsilon, double p_theta,
                              FluxProfile profile, std::optional<ResonancePair> pair) {
  ModelParams p;
  p.b = b;
  p.omega = omega;
  p.epsilon = epsilon;
  p.p_theta = p_theta;
  p.profile = std::move(profile);
  p.pair = pair;
  p.validate();
  return p;
}

std::vector<std::string> ModelParams::violations() const {
  std::vector<std::string> out;
  if (!(b > 0.0)) out.push_back("b > 0 (got " + fmt17(b) + ")");
  if (!(omega > 0.0)) out.push_back("omega > 0 (got " + fmt17(omega) + ")");
  if (!(epsilon >= 0.0)) out.push_back("epsilon >= 0 (got " + fmt17(epsilon) + ")");
  if (!(p_theta > 0.0)) out.push_back("p_theta > 0 (got " + fmt17(p_theta) + ")");
  const double bound = epsilon * profile.amplitude_bound();
  if (!(bound < p_theta)) {
    out.push_back("epsilon*max|f| >= p_theta (epsilon*sum|coeffs| = " + fmt17(bound) +
                  ", p_theta = " + fmt17(p_theta) + ")");
  }
  if (pair && b > 0.0 && omega > 0.0) {
    const double lam = omega / b;
    if (std::abs(lam - pair->lambda()) > 1e-12 * std::max(1.0, lam)) {
      out.push_back("omega/b == mu/nu (omega/b = " + fmt17(lam) + ", mu/nu = " +
                    std::to_string(pair->mu()) + "/" + std::to_string(pair->nu()) + ")");
    }
  }
  return out;
}

void ModelParams::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid model parameters:";
  for (const auto& s : v) msg += " [" + s + "]";
  throw ParameterError(msg);
}

std::string ModelParams::digest() const {
  std::ostringstream os;
  os << "b=" << fmt17(b) << ";omega=" << fmt17(omega) << ";epsilon=" << fmt17(epsilon)
     << ";p_theta=" << fmt17(p_theta);
  for (int k = 1; k <= profile.order(); ++k) {
    if (profile.cos_coeff(k) != 0.0) os << ";cos" << k << "=" << fmt17(profile.cos_coeff(k));
    if (profile.sin_coeff(k) != 0.0) os << ";sin" << k << "=" << fmt17(profile.sin_coeff(k));
  }
  if (pair) os << ";pair=" << pair->mu() << "/" << pair->nu();
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

double a_of_t(const ModelParams& params, double t) { return params.a(t); }

double p_theta_from_velocity(double b, double omega, double epsilon, const FluxProfile& profile,
                             const Vec2& q0, const Vec2& v0, double t0) {
  // q ^ A = (-b/2 + eps f / |q|^2) |q|^2
  return wedge(q0, v0) - 0.5 * b * q0.squaredNorm() + epsilon * eval(profile, omega * t0);
}

}  // namespace cyclores
