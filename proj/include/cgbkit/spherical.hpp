#pragma once

#include <cmath>
#include <span>

#include "cgbkit/tensor.hpp"

namespace cgbkit {

// Hyperspherical angles (phi_0..phi_{m-1}) -> unit vector in R^{m+1}:
//   u_0 = cos phi_0, u_1 = sin phi_0 cos phi_1, ..., u_m = sin phi_0 ... sin phi_{m-1}.
// phi_0..phi_{m-2} are colatitudes in (0, pi); phi_{m-1} is the periodic azimuth.
template <class T>
Vec<T> sphere_direction(std::span<const T> angles) {
  using std::cos;
  using std::sin;
  const std::size_t m = angles.size();
  Vec<T> u(m + 1, T(0.0));
  T prefix(1.0);
  for (std::size_t j = 0; j < m; ++j) {
    u[j] = prefix * cos(angles[j]);
    prefix = prefix * sin(angles[j]);
  }
  u[m] = prefix;
  return u;
}

// Volume density of the unit round metric in hyperspherical angles.
inline double sphere_jacobian(std::span<const double> angles) {
  const std::size_t m = angles.size();
  double j = 1.0;
  for (std::size_t a = 0; a + 1 < m; ++a) j *= std::pow(std::sin(angles[a]), static_cast<double>(m - 1 - a));
  return j;
}

// Diagonal of the unit round metric: 1, sin^2 phi_0, sin^2 phi_0 sin^2 phi_1, ...
template <class T>
Vec<T> round_metric_diagonal(std::span<const T> angles) {
  using std::sin;
  Vec<T> d(angles.size(), T(1.0));
  T prefix(1.0);
  for (std::size_t j = 1; j < angles.size(); ++j) {
    T s = sin(angles[j - 1]);
    prefix = prefix * s * s;
    d[j] = prefix;
  }
  return d;
}

}  // namespace cgbkit
