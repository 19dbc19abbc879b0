#pragma once

#include <cmath>
#include <numbers>

namespace cgbkit {

// Every comparison threshold used by the library lives here.
namespace tol {
inline constexpr double skew = 1e-12;            // skew-symmetry of two-form matrices
inline constexpr double coefficient_floor = 1e-300;  // underflow hygiene only
inline constexpr double metric_symmetry = 1e-12;
inline constexpr double frame_orthonormal = 1e-10;
inline constexpr double nullity_relative = 1e-8;
inline constexpr double vanishing_tensor = 1e-12;  // absolute; all singular values below -> R == 0
inline constexpr double normal_unit = 1e-10;
inline constexpr double normal_orthogonal = 1e-8;
inline constexpr double shape_symmetry = 1e-5;
inline constexpr double convexity = 1e-6;
inline constexpr double pointwise_slack = 1e-8;
inline constexpr double integral_relative = 1e-2;
inline constexpr double fit_zero = 1e-12;  // |correction| below this is treated as zero
inline constexpr double frame_match = 1e-6;
}  // namespace tol

// Volumes of the unit sphere S^m and unit ball B^m.
struct SpaceConstants {
  int m;
  double sphere_volume;
  double ball_volume;

  static SpaceConstants of(int m) {
    const double pi = std::numbers::pi;
    return {m, 2.0 * std::pow(pi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1)),
            std::pow(pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0)};
  }
};

inline double sphere_volume(int m) { return SpaceConstants::of(m).sphere_volume; }
inline double ball_volume(int m) { return SpaceConstants::of(m).ball_volume; }

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace cgbkit
