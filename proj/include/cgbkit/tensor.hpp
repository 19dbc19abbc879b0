#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "cgbkit/dual.hpp"

namespace cgbkit {

template <class T>
using Vec = std::vector<T>;

// Scalar type carried by a std::span argument of a generic lambda.
template <class Span>
using span_scalar_t = std::remove_cv_t<typename Span::element_type>;

// Row-major n x n matrix over any scalar (double or nested duals).
template <class T>
struct SquareMatrix {
  int n = 0;
  std::vector<T> a;

  SquareMatrix() = default;
  explicit SquareMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, T(0.0)) {}

  T& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

template <class T>
Eigen::MatrixXd to_eigen_values(const SquareMatrix<T>& m) {
  Eigen::MatrixXd out(m.n, m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) out(i, j) = value_of(m(i, j));
  return out;
}

// Dense rank-4 array indexed (i, j, k, l).
struct Tensor4 {
  int n = 0;
  std::vector<double> a;

  Tensor4() = default;
  explicit Tensor4(int size) : n(size), a(static_cast<std::size_t>(size) * size * size * size, 0.0) {}

  double& operator()(int i, int j, int k, int l) { return a[offset(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return a[offset(i, j, k, l)]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  std::size_t offset(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * n + j) * n + k) * n + l;
  }
};

// T'(a,b,c,d) = sum T(i,j,k,l) E(i,a) E(j,b) E(k,c) E(l,d); columns of E are the new basis.
// One index at a time, each step a matrix product on a row-major reshaping.
inline Tensor4 change_basis(const Tensor4& t, const Eigen::MatrixXd& e) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int n = t.n;
  const int m = static_cast<int>(e.cols());
  const Eigen::MatrixXd et = e.transpose();
  // (a | j k l)
  RowMat s1 = et * Eigen::Map<const RowMat>(t.a.data(), n, n * n * n);
  // (a b | k l)
  RowMat s2(m * m, n * n);
  for (int a = 0; a < m; ++a)
    s2.middleRows(a * m, m) = et * Eigen::Map<const RowMat>(s1.row(a).data(), n, n * n);
  Tensor4 out(m);
  for (int ab = 0; ab < m * m; ++ab) {
    Eigen::Map<RowMat>(out.a.data() + static_cast<std::size_t>(ab) * m * m, m, m) =
        et * Eigen::Map<const RowMat>(s2.row(ab).data(), n, n) * e;
  }
  return out;
}

}  // namespace cgbkit
