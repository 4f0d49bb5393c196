#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>

namespace cyclores {

/// Finite, mean-zero trigonometric polynomial
///   f(t) = sum_{k=1..K} a_k cos(kt) + b_k sin(kt),
/// the 2pi-periodic shape of the driving flux. Coefficient k is stored at index k-1.
class FluxProfile {
 public:
  FluxProfile() = default;
  FluxProfile(Eigen::VectorXd cos_coeffs, Eigen::VectorXd sin_coeffs);

  /// Profile with a single non-zero coefficient.
  static FluxProfile cosine(int k, double amplitude);
  static FluxProfile sine(int k, double amplitude);

  int order() const { return static_cast<int>(cos_.size()); }
  bool is_zero() const;

  double cos_coeff(int k) const;
  double sin_coeff(int k) const;
  void set_cos(int k, double value);
  void set_sin(int k, double value);

  const Eigen::VectorXd& cos_coeffs() const { return cos_; }
  const Eigen::VectorXd& sin_coeffs() const { return sin_; }

  /// Sum of |a_k| + |b_k|; an upper bound for max |f|.
  double amplitude_bound() const;

  /// Values f, f', f'' at t, sharing one harmonic recurrence.
  struct Jet {
    double value;
    double d1;
    double d2;
  };
  Jet jet(double t) const;

  FluxProfile derivative() const;

  friend FluxProfile operator+(const FluxProfile& lhs, const FluxProfile& rhs);
  friend FluxProfile operator*(double s, const FluxProfile& p);
  friend bool operator==(const FluxProfile& lhs, const FluxProfile& rhs);

 private:
  void grow(int k);

  Eigen::VectorXd cos_;
  Eigen::VectorXd sin_;
};

/// Coprime positive integers mu, nu with Omega / b = mu / nu.
class ResonancePair {
 public:
  /// Reduces num/den by their gcd.
  static ResonancePair from_ratio(std::int64_t num, std::int64_t den);

  int mu() const { return mu_; }
  int nu() const { return nu_; }
  double lambda() const { return static_cast<double>(mu_) / nu_; }

  friend bool operator==(const ResonancePair&, const ResonancePair&) = default;

 private:
  ResonancePair(int mu, int nu) : mu_(mu), nu_(nu) {}
  int mu_ = 1;
  int nu_ = 1;
};

double eval(const FluxProfile& profile, double t);

/// order must be 1 or 2.
double eval_deriv(const FluxProfile& profile, double t, int order);

/// F[f]_k = (1/2pi) int_0^{2pi} f(t) e^{-ikt} dt, exact from the coefficients.
std::complex<double> fourier_coeff(const FluxProfile& profile, int k);

/// <f>_{Z nu}: keeps only harmonics k divisible by nu.
FluxProfile averaged_profile(const FluxProfile& profile, int nu);

/// supp F[f] meets nu Z \ {0}.
bool is_resonant(const FluxProfile& profile, const ResonancePair& pair);
bool is_resonant(const FluxProfile& profile, int nu);

}  // namespace cyclores
