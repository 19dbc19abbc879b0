#pragma once

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include "cgbkit/constants.hpp"
#include "cgbkit/errors.hpp"
#include "cgbkit/spherical.hpp"

namespace cgbkit {

struct GaussLegendreRule {
  std::vector<double> nodes;  // ascending in (-1, 1)
  std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(int order) {
  if (order < 1) throw InvalidArgument("Gauss-Legendre order must be positive");
  std::vector<double> zeros = boost::math::legendre_p_zeros<double>(order);  // nonnegative half
  GaussLegendreRule rule;
  auto weight = [order](double x) {
    double dp = boost::math::legendre_p_prime(order, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it == 0.0) continue;
    rule.nodes.push_back(-*it);
    rule.weights.push_back(weight(*it));
  }
  if (order % 2 == 1) {
    rule.nodes.push_back(0.0);
    rule.weights.push_back(weight(0.0));
  }
  for (double z : zeros) {
    if (z == 0.0) continue;
    rule.nodes.push_back(z);
    rule.weights.push_back(weight(z));
  }
  return rule;
}

// Deterministic pairwise summation; the tree depends only on the length.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

// Evaluates f at every index into a vector, optionally across threads.
// Output order (and hence any later reduction) is independent of thread count.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, F&& f, unsigned threads = 0) {
  std::vector<R> out(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) out[i] = f(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Product rule on S^m in hyperspherical angles: Gauss-Legendre in each
// colatitude, equispaced trapezoid in the azimuth. Weights carry the
// hyperspherical Jacobian, so they integrate against the round volume.
struct QuadratureGrid {
  int m = 0;
  int order = 0;
  std::vector<Vec<double>> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

inline constexpr int kMaxSphereGridDimension = 6;

inline QuadratureGrid sphere_grid(int m, int order) {
  if (m < 1 || m > kMaxSphereGridDimension)
    throw InvalidArgument("sphere grid dimension must be in [1, 6], got " + std::to_string(m));
  if (order < 4) throw InvalidArgument("sphere grid order must be >= 4, got " + std::to_string(order));
  const double pi = std::numbers::pi;
  GaussLegendreRule gl = gauss_legendre(order);
  QuadratureGrid grid;
  grid.m = m;
  grid.order = order;
  std::size_t total = 1;
  for (int j = 0; j < m; ++j) total *= static_cast<std::size_t>(order);
  grid.nodes.reserve(total);
  grid.weights.reserve(total);
  std::vector<int> digit(static_cast<std::size_t>(m), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vec<double> angles(static_cast<std::size_t>(m));
    double w = 1.0;
    for (int j = 0; j < m; ++j) {
      const int i = digit[static_cast<std::size_t>(j)];
      if (j + 1 < m) {
        angles[j] = 0.5 * pi * (gl.nodes[i] + 1.0);
        w *= 0.5 * pi * gl.weights[i] * std::pow(std::sin(angles[j]), m - 1 - j);
      } else {
        angles[j] = 2.0 * pi * i / order;
        w *= 2.0 * pi / order;
      }
    }
    grid.nodes.push_back(std::move(angles));
    grid.weights.push_back(w);
    for (int j = m - 1; j >= 0; --j) {
      if (++digit[static_cast<std::size_t>(j)] < order) break;
      digit[static_cast<std::size_t>(j)] = 0;
    }
  }
  return grid;
}

// Sum of weight * value in the fixed pairwise order.
inline double weighted_sum(const QuadratureGrid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw InvalidArgument("value count does not match grid size");
  std::vector<double> terms(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw NonFiniteValue(grid.nodes[i]);
    terms[i] = grid.weights[i] * values[i];
  }
  return pairwise_sum(terms);
}

struct Integral {
  double value = 0.0;
  double error_estimate = 0.0;
};

using NodeFunction = std::function<double(std::span<const double>)>;

inline double integrate_on(const NodeFunction& f, const QuadratureGrid& grid, unsigned threads = 0) {
  std::vector<double> v = parallel_map<double>(grid.size(), [&](std::size_t i) { return f(grid.nodes[i]); }, threads);
  return weighted_sum(grid, v);
}

// Value from the finer grid; error estimate |fine - coarse|.
inline Integral integrate(const NodeFunction& f, const QuadratureGrid& grid, const QuadratureGrid& grid_doubled,
                          unsigned threads = 0) {
  double coarse = integrate_on(f, grid, threads);
  double fine = integrate_on(f, grid_doubled, threads);
  return {fine, std::abs(fine - coarse)};
}

// Gauss-Legendre on (0, R).
inline double radial_integrate(const std::function<double(double)>& g, double radius, int order) {
  if (!(radius > 0.0)) throw InvalidArgument("radial integration needs a positive radius");
  GaussLegendreRule gl = gauss_legendre(order);
  std::vector<double> terms(gl.nodes.size());
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    double r = 0.5 * radius * (gl.nodes[i] + 1.0);
    double v = g(r);
    if (!std::isfinite(v)) throw NonFiniteValue({r});
    terms[i] = 0.5 * radius * gl.weights[i] * v;
  }
  return pairwise_sum(terms);
}

}  // namespace cgbkit
