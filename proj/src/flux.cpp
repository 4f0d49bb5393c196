#include "cyclores/flux.hpp"

#include "cyclores/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace cyclores {

FluxProfile::FluxProfile(Eigen::VectorXd cos_coeffs, Eigen::VectorXd sin_coeffs)
    : cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
  const Eigen::Index k = std::max(cos_.size(), sin_.size());
  cos_.conservativeResizeLike(Eigen::VectorXd::Zero(k));
  sin_.conservativeResizeLike(Eigen::VectorXd::Zero(k));
}

FluxProfile FluxProfile::cosine(int k, double amplitude) {
  FluxProfile p;
  p.set_cos(k, amplitude);
  return p;
}

FluxProfile FluxProfile::sine(int k, double amplitude) {
  FluxProfile p;
  p.set_sin(k, amplitude);
  return p;
}

bool FluxProfile::is_zero() const {
  return (cos_.array() == 0.0).all() && (sin_.array() == 0.0).all();
}

double FluxProfile::cos_coeff(int k) const {
  return (k >= 1 && k <= order()) ? cos_[k - 1] : 0.0;
}

double FluxProfile::sin_coeff(int k) const {
  return (k >= 1 && k <= order()) ? sin_[k - 1] : 0.0;
}

void FluxProfile::grow(int k) {
  if (k < 1) throw ParameterError("harmonic index must be >= 1, got " + std::to_string(k));
  if (k > order()) {
    cos_.conservativeResizeLike(Eigen::VectorXd::Zero(k));
    sin_.conservativeResizeLike(Eigen::VectorXd::Zero(k));
  }
}

void FluxProfile::set_cos(int k, double value) {
  grow(k);
  cos_[k - 1] = value;
}

void FluxProfile::set_sin(int k, double value) {
  grow(k);
  sin_[k - 1] = value;
}

double FluxProfile::amplitude_bound() const {
  return cos_.cwiseAbs().sum() + sin_.cwiseAbs().sum();
}

FluxProfile::Jet FluxProfile::jet(double t) const {
  Jet out{0.0, 0.0, 0.0};
  if (order() == 0) return out;
  const double c1 = std::cos(t);
  const double s1 = std::sin(t);
  double ck = c1;
  double sk = s1;
  for (int k = 1; k <= order(); ++k) {
    const double a = cos_[k - 1];
    const double b = sin_[k - 1];
    const double kk = k;
    out.value += a * ck + b * sk;
    out.d1 += kk * (b * ck - a * sk);
    out.d2 -= kk * kk * (a * ck + b * sk);
    // angle addition: (k+1) t
    const double cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
  }
  return out;
}

FluxProfile FluxProfile::derivative() const {
  FluxProfile d;
  d.cos_ = Eigen::VectorXd::Zero(order());
  d.sin_ = Eigen::VectorXd::Zero(order());
  for (int k = 1; k <= order(); ++k) {
    d.cos_[k - 1] = k * sin_[k - 1];
    d.sin_[k - 1] = -k * cos_[k - 1];
  }
  return d;
}

FluxProfile operator+(const FluxProfile& lhs, const FluxProfile& rhs) {
  FluxProfile out = lhs;
  for (int k = 1; k <= rhs.order(); ++k) {
    out.set_cos(k, out.cos_coeff(k) + rhs.cos_coeff(k));
    out.set_sin(k, out.sin_coeff(k) + rhs.sin_coeff(k));
  }
  return out;
}

FluxProfile operator*(double s, const FluxProfile& p) {
  return FluxProfile(s * p.cos_, s * p.sin_);
}

bool operator==(const FluxProfile& lhs, const FluxProfile& rhs) {
  const int k = std::max(lhs.order(), rhs.order());
  for (int i = 1; i <= k; ++i) {
    if (lhs.cos_coeff(i) != rhs.cos_coeff(i) || lhs.sin_coeff(i) != rhs.sin_coeff(i)) return false;
  }
  return true;
}

ResonancePair ResonancePair::from_ratio(std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0) {
    throw ParameterError("resonance ratio needs positive integers, got " + std::to_string(num) +
                         "/" + std::to_string(den));
  }
  const std::int64_t g = std::gcd(num, den);
  return ResonancePair(static_cast<int>(num / g), static_cast<int>(den / g));
}

double eval(const FluxProfile& profile, double t) { return profile.jet(t).value; }

double eval_deriv(const FluxProfile& profile, double t, int order) {
  const auto j = profile.jet(t);
  if (order == 1) return j.d1;
  if (order == 2) return j.d2;
  throw ParameterError("derivative order must be 1 or 2, got " + std::to_string(order));
}

std::complex<double> fourier_coeff(const FluxProfile& profile, int k) {
  if (k == 0) return {0.0, 0.0};
  const int m = std::abs(k);
  const double a = profile.cos_coeff(m);
  const double b = profile.sin_coeff(m);
  return k > 0 ? std::complex<double>(a / 2, -b / 2) : std::complex<double>(a / 2, b / 2);
}

FluxProfile averaged_profile(const FluxProfile& profile, int nu) {
  if (nu < 1) throw ParameterError("averaging order nu must be >= 1");
  FluxProfile out(Eigen::VectorXd::Zero(profile.order()), Eigen::VectorXd::Zero(profile.order()));
  for (int k = nu; k <= profile.order(); k += nu) {
    out.set_cos(k, profile.cos_coeff(k));
    out.set_sin(k, profile.sin_coeff(k));
  }
  return out;
}

bool is_resonant(const FluxProfile& profile, int nu) { return !averaged_profile(profile, nu).is_zero(); }

bool is_resonant(const FluxProfile& profile, const ResonancePair& pair) {
  return is_resonant(profile, pair.nu());
}

}  // namespace cyclores
