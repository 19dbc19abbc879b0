#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cgbkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected input: arity, dimension or parity mismatch, malformed data.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Point outside the chart domain, or a geodesic leaving it.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Metric failed the symmetric positive-definite check.
class SingularMetric : public Error {
 public:
  using Error::Error;
};

// Hypersurface parametrization is not an immersion at some parameter point.
class DegenerateParametrization : public Error {
 public:
  using Error::Error;
};

// Intrinsic and extrinsic principal frames could not be matched.
class FrameMismatch : public Error {
 public:
  using Error::Error;
};

class ConvexityViolation : public Error {
 public:
  ConvexityViolation(std::vector<double> where, double min_kappa)
      : Error("convexity violated: min principal curvature " + std::to_string(min_kappa)),
        point(std::move(where)),
        min_principal_curvature(min_kappa) {}

  std::vector<double> point;
  double min_principal_curvature;
};

// Integrand produced NaN or infinity at a quadrature node.
class NonFiniteValue : public Error {
 public:
  explicit NonFiniteValue(std::vector<double> where)
      : Error("non-finite integrand value at quadrature node"), node(std::move(where)) {}

  std::vector<double> node;
};

}  // namespace cgbkit
