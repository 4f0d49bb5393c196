#pragma once

#include "cyclores/flux.hpp"
#include "cyclores/model.hpp"

#include <numbers>
#include <random>

namespace test {

inline constexpr double pi = std::numbers::pi;

// f(t) = sin t - cos(2t)/3
inline cyclores::FluxProfile spiral_profile() {
  cyclores::FluxProfile f;
  f.set_sin(1, 1.0);
  f.set_cos(2, -1.0 / 3.0);
  return f;
}

inline double spiral_p_theta() { return 1.617 - 0.5 + 0.35 * (-1.0 / 3.0); }

inline cyclores::ModelParams spiral_params(double epsilon = 0.35) {
  return cyclores::ModelParams::make(1.0, 1.0, epsilon, spiral_p_theta(), spiral_profile(),
                                     cyclores::ResonancePair::from_ratio(1, 1));
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

}  // namespace test
