#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "cgbkit/cgbkit.hpp"

namespace cgbkit::testing {

inline AlternatingForm random_form(int dimension, int grade, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<AlternatingForm::Term> terms;
  const MultiIndex all = MultiIndex{1} << dimension;
  for (MultiIndex m = 0; m < all; ++m)
    if (std::popcount(m) == grade) terms.push_back({m, g(rng)});
  return AlternatingForm::from_terms(dimension, grade, std::move(terms));
}

inline TwoFormMatrix random_skew(int k, int dimension, std::mt19937_64& rng) {
  TwoFormMatrix omega(k, dimension);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) omega.set(i, j, random_form(dimension, 2, rng));
  return omega;
}

// Coefficients on the grid j/64, |j| <= 128: every product and sum in a Pfaffian
// of size <= 8 is exact in double precision.
inline TwoFormMatrix random_dyadic_skew(int k, int dimension, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> grid(-128, 128);
  TwoFormMatrix omega(k, dimension);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      std::vector<AlternatingForm::Term> terms;
      for (MultiIndex m = 0; m < (MultiIndex{1} << dimension); ++m)
        if (std::popcount(m) == 2) terms.push_back({m, grid(rng) / 64.0});
      omega.set(i, j, AlternatingForm::from_terms(dimension, 2, std::move(terms)));
    }
  return omega;
}

// Haar-ish rotation: QR of a Gaussian matrix with the signs fixed, det forced to +1.
inline Eigen::MatrixXd random_rotation(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < k; ++i)
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

inline double form_distance(const AlternatingForm& a, const AlternatingForm& b) { return (a - b).max_abs_coefficient(); }

}  // namespace cgbkit::testing
