#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cgbkit/manifold.hpp"
#include "cgbkit/spherical.hpp"

namespace cgbkit::models {

inline ManifoldChart euclidean(int n) {
  auto metric = [n](auto x) {
    using T = span_scalar_t<decltype(x)>;
    SquareMatrix<T> g(n);
    for (int i = 0; i < n; ++i) g(i, i) = T(1.0);
    return g;
  };
  auto exp = [](std::span<const double> p, auto v) {
    using T = span_scalar_t<decltype(v)>;
    Vec<T> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] + p[i];
    return out;
  };
  ManifoldChart chart(n, MetricField::from(metric), ModelTag::euclidean, "R" + std::to_string(n));
  chart.set_closed_exp(ExpField::from(exp)).set_curvature_scale(0.0).set_factor_dimensions({n});
  chart.set_sampler([n](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec<double> x(static_cast<std::size_t>(n));
    for (auto& c : x) c = u(rng);
    return x;
  });
  return chart;
}

namespace detail {

// Mobius addition on the Poincare ball of curvature -c.
template <class T>
Vec<T> mobius_add(std::span<const double> x, const Vec<T>& y, double c) {
  T xy(0.0);
  T yy(0.0);
  double xx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy = xy + y[i] * x[i];
    yy = yy + y[i] * y[i];
    xx += x[i] * x[i];
  }
  T num_x = 1.0 + 2.0 * c * xy + c * yy;
  double num_y = 1.0 - c * xx;
  T den = 1.0 + 2.0 * c * xy + (c * c * xx) * yy;
  Vec<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (num_x * x[i] + num_y * y[i]) / den;
  return out;
}

}  // namespace detail

// Poincare ball model of curvature -c (c > 0): g = (2 / (1 - c|x|^2))^2 |dx|^2 on
// |x| < 1/sqrt(c). Smooth and global, with closed-form exp at every point.
inline ManifoldChart hyperbolic_ball(int n, double curvature = -1.0) {
  if (!(curvature < 0.0)) throw InvalidArgument("hyperbolic curvature must be negative");
  const double c = -curvature;
  auto metric = [n, c](auto x) {
    using T = span_scalar_t<decltype(x)>;
    T r2(0.0);
    for (const auto& xi : x) r2 = r2 + xi * xi;
    T lambda = 2.0 / (1.0 - c * r2);
    T w = lambda * lambda;
    SquareMatrix<T> g(n);
    for (int i = 0; i < n; ++i) g(i, i) = w;
    return g;
  };
  auto exp = [c](std::span<const double> p, auto v) {
    using T = span_scalar_t<decltype(v)>;
    using std::sqrt;
    using std::tanh;
    double pp = 0.0;
    for (double pi : p) pp += pi * pi;
    const double lambda = 2.0 / (1.0 - c * pp);
    T vv(0.0);
    for (const auto& vi : v) vv = vv + vi * vi;
    Vec<T> y(v.size());
    if (value_of(vv) == 0.0) {
      for (std::size_t i = 0; i < v.size(); ++i) y[i] = v[i] * (0.5 * lambda);
    } else {
      T norm = sqrt(vv);
      T scale = tanh(std::sqrt(c) * lambda * norm * 0.5) / (std::sqrt(c) * norm);
      for (std::size_t i = 0; i < v.size(); ++i) y[i] = scale * v[i];
    }
    return detail::mobius_add(p, y, c);
  };
  ManifoldChart chart(n, MetricField::from(metric), ModelTag::hyperbolic, "H" + std::to_string(n));
  chart.set_closed_exp(ExpField::from(exp)).set_curvature_scale(curvature).set_factor_dimensions({n});
  chart.set_domain([c](std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return c * r2 < 1.0;
  });
  chart.set_sampler([n, c](std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 0.7);
    Vec<double> x(static_cast<std::size_t>(n));
    double norm = 0.0;
    for (auto& xi : x) {
      xi = g(rng);
      norm += xi * xi;
    }
    double r = u(rng) / std::sqrt(c) / std::sqrt(norm);
    for (auto& xi : x) xi *= r;
    return x;
  });
  return chart;
}

// Upper half-space model: g = |dx|^2 / (c y^2), y = last coordinate > 0.
inline ManifoldChart hyperbolic_halfspace(int n, double curvature = -1.0) {
  if (!(curvature < 0.0)) throw InvalidArgument("hyperbolic curvature must be negative");
  const double c = -curvature;
  auto metric = [n, c](auto x) {
    using T = span_scalar_t<decltype(x)>;
    T y = x[static_cast<std::size_t>(n - 1)];
    T w = 1.0 / (c * y * y);
    SquareMatrix<T> g(n);
    for (int i = 0; i < n; ++i) g(i, i) = w;
    return g;
  };
  ManifoldChart chart(n, MetricField::from(metric), ModelTag::hyperbolic_halfspace, "H" + std::to_string(n) + "_halfspace");
  chart.set_curvature_scale(curvature).set_factor_dimensions({n});
  chart.set_domain([n](std::span<const double> x) { return x[static_cast<std::size_t>(n - 1)] > 0.0; });
  chart.set_sampler([n](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> h(0.5, 2.0);
    Vec<double> x(static_cast<std::size_t>(n));
    for (auto& c : x) c = u(rng);
    x.back() = h(rng);
    return x;
  });
  return chart;
}

namespace detail {

inline bool angles_in_range(std::span<const double> angles) {
  for (std::size_t j = 0; j + 1 < angles.size(); ++j)
    if (!(angles[j] > 0.0 && angles[j] < std::numbers::pi)) return false;
  return true;
}

inline Vec<double> sample_angles(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> colat(0.2, std::numbers::pi - 0.2);
  std::uniform_real_distribution<double> azimuth(0.0, 2.0 * std::numbers::pi);
  Vec<double> a(m);
  for (std::size_t j = 0; j < m; ++j) a[j] = (j + 1 == m) ? azimuth(rng) : colat(rng);
  return a;
}

}  // namespace detail

// Geodesic polar coordinates (r, phi) about a basepoint of H^n:
// g = dr^2 + (sinh(sqrt(c) r) / sqrt(c))^2 dsigma^2.
inline ManifoldChart hyperbolic_polar(int n, double curvature = -1.0) {
  if (n < 2) throw InvalidArgument("polar chart needs dimension >= 2");
  if (!(curvature < 0.0)) throw InvalidArgument("hyperbolic curvature must be negative");
  const double c = -curvature;
  auto metric = [n, c](auto x) {
    using T = span_scalar_t<decltype(x)>;
    using std::sinh;
    T s = sinh(std::sqrt(c) * x[0]) / std::sqrt(c);
    Vec<T> d = round_metric_diagonal<T>(x.subspan(1));
    SquareMatrix<T> g(n);
    g(0, 0) = T(1.0);
    for (int i = 1; i < n; ++i) g(i, i) = s * s * d[static_cast<std::size_t>(i - 1)];
    return g;
  };
  ManifoldChart chart(n, MetricField::from(metric), ModelTag::hyperbolic_polar, "H" + std::to_string(n) + "_polar");
  chart.set_curvature_scale(curvature).set_factor_dimensions({n});
  chart.set_domain([](std::span<const double> x) { return x[0] > 0.0 && detail::angles_in_range(x.subspan(1)); });
  chart.set_sampler([n](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> r(0.3, 2.0);
    Vec<double> x{r(rng)};
    Vec<double> a = detail::sample_angles(static_cast<std::size_t>(n - 1), rng);
    x.insert(x.end(), a.begin(), a.end());
    return x;
  });
  return chart;
}

// Round sphere of the given radius in hyperspherical angles.
inline ManifoldChart round_sphere(int m, double radius = 1.0) {
  if (m < 1) throw InvalidArgument("sphere dimension must be positive");
  if (!(radius > 0.0)) throw InvalidArgument("sphere radius must be positive");
  auto metric = [m, radius](auto x) {
    using T = span_scalar_t<decltype(x)>;
    Vec<T> d = round_metric_diagonal<T>(x);
    SquareMatrix<T> g(m);
    for (int i = 0; i < m; ++i) g(i, i) = (radius * radius) * d[static_cast<std::size_t>(i)];
    return g;
  };
  ManifoldChart chart(m, MetricField::from(metric), ModelTag::sphere, "S" + std::to_string(m));
  chart.set_curvature_scale(1.0 / (radius * radius)).set_factor_dimensions({m});
  chart.set_domain([](std::span<const double> x) { return detail::angles_in_range(x); });
  chart.set_sampler([m](std::mt19937_64& rng) { return detail::sample_angles(static_cast<std::size_t>(m), rng); });
  return chart;
}

// Riemannian product with block-diagonal metric; coordinates concatenated in factor order.
inline ManifoldChart product(std::vector<ManifoldChart> factors) {
  if (factors.empty()) throw InvalidArgument("product needs at least one factor");
  std::vector<int> dims;
  std::string name;
  int n = 0;
  bool closed = true;
  for (const auto& f : factors) {
    dims.push_back(f.dimension());
    n += f.dimension();
    name += (name.empty() ? "" : "x") + f.name();
    closed = closed && f.has_closed_exp();
  }
  auto metric = [factors, n](auto x) {
    using T = span_scalar_t<decltype(x)>;
    SquareMatrix<T> g(n);
    std::size_t off = 0;
    for (const auto& f : factors) {
      const int d = f.dimension();
      SquareMatrix<T> block = f.template metric<T>(x.subspan(off, static_cast<std::size_t>(d)));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(static_cast<int>(off) + i, static_cast<int>(off) + j) = block(i, j);
      off += static_cast<std::size_t>(d);
    }
    return g;
  };
  ManifoldChart chart(n, MetricField::from(metric), ModelTag::product, name);
  chart.set_factor_dimensions(dims);
  if (closed) {
    auto exp = [factors](std::span<const double> p, auto v) {
      using T = span_scalar_t<decltype(v)>;
      Vec<T> out;
      std::size_t off = 0;
      for (const auto& f : factors) {
        const auto d = static_cast<std::size_t>(f.dimension());
        Vec<T> part = f.template closed_exp<T>(p.subspan(off, d), v.subspan(off, d));
        out.insert(out.end(), part.begin(), part.end());
        off += d;
      }
      return out;
    };
    chart.set_closed_exp(ExpField::from(exp));
  }
  chart.set_domain([factors](std::span<const double> x) {
    std::size_t off = 0;
    for (const auto& f : factors) {
      const auto d = static_cast<std::size_t>(f.dimension());
      if (!f.contains(x.subspan(off, d))) return false;
      off += d;
    }
    return true;
  });
  chart.set_sampler([factors](std::mt19937_64& rng) {
    Vec<double> x;
    for (const auto& f : factors) {
      Vec<double> part = f.sample_point(rng);
      x.insert(x.end(), part.begin(), part.end());
    }
    return x;
  });
  return chart;
}

// H^3 x R^{n-3}, the basic model with nullity index n - 3.
inline ManifoldChart h3_times_flat(int n, double curvature = -1.0) {
  if (n < 3) throw InvalidArgument("H3 x R^(n-3) needs n >= 3");
  if (n == 3) return hyperbolic_ball(3, curvature);
  return product({hyperbolic_ball(3, curvature), euclidean(n - 3)});
}

}  // namespace cgbkit::models
