#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "cgbkit/gaussbonnet.hpp"
#include "cgbkit/models.hpp"

using namespace cgbkit;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int order : {1, 2, 5, 8, 16}) {
    GaussLegendreRule r = gauss_legendre(order);
    ASSERT_EQ(static_cast<int>(r.nodes.size()), order);
    EXPECT_TRUE(std::is_sorted(r.nodes.begin(), r.nodes.end()));
    for (int deg = 0; deg < 2 * order; ++deg) {
      double s = 0.0;
      for (int i = 0; i < order; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
      double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(s, exact, 1e-13) << "order " << order << " degree " << deg;
    }
  }
  EXPECT_THROW(gauss_legendre(0), InvalidArgument);
}

TEST(SphereGrid, CircleIsEquispacedTrapezoid) {
  QuadratureGrid g = sphere_grid(1, 16);
  ASSERT_EQ(g.size(), 16u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(g.nodes[i][0], 2.0 * pi * static_cast<double>(i) / 16.0, 1e-15);
    EXPECT_NEAR(g.weights[i], 2.0 * pi / 16.0, 1e-15);
  }
}

TEST(SphereGrid, WeightsSumToSphereVolume) {
  QuadratureGrid g2 = sphere_grid(2, 16);
  EXPECT_NEAR(std::accumulate(g2.weights.begin(), g2.weights.end(), 0.0), 4.0 * pi, 1e-12);
  QuadratureGrid g3 = sphere_grid(3, 16);
  EXPECT_NEAR(std::accumulate(g3.weights.begin(), g3.weights.end(), 0.0), 2.0 * pi * pi, 1e-12);
  for (int m = 1; m <= 4; ++m) {
    QuadratureGrid g = sphere_grid(m, 16);
    double sum = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
    EXPECT_NEAR(sum / sphere_volume(m), 1.0, 1e-10) << "m=" << m;
  }
}

TEST(SphereGrid, PositiveWeightsAndNoPoles) {
  for (int m = 1; m <= 4; ++m) {
    QuadratureGrid g = sphere_grid(m, 8);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_GT(g.weights[i], 0.0);
      for (int j = 0; j + 1 < m; ++j) {
        EXPECT_GT(g.nodes[i][j], 0.0);
        EXPECT_LT(g.nodes[i][j], pi);
      }
    }
  }
}

TEST(SphereGrid, RejectsOutOfRange) {
  EXPECT_THROW(sphere_grid(0, 8), InvalidArgument);
  EXPECT_THROW(sphere_grid(7, 8), InvalidArgument);
  EXPECT_THROW(sphere_grid(2, 3), InvalidArgument);
}

TEST(SphereGrid, IntegratesLowDegreeMonomials) {
  // Mean of u_0^2 over S^m is 1 / (m + 1).
  for (int m = 1; m <= 4; ++m) {
    QuadratureGrid g = sphere_grid(m, 16);
    double v = integrate_on([](std::span<const double> a) { return std::pow(std::cos(a[0]), 2); }, g);
    EXPECT_NEAR(v / sphere_volume(m), 1.0 / (m + 1), 1e-10) << "m=" << m;
  }
}

TEST(Integrate, ConstantOnThreeSphere) {
  Integral r = integrate([](std::span<const double>) { return 1.0; }, sphere_grid(3, 12), sphere_grid(3, 24));
  EXPECT_NEAR(r.value, 2.0 * pi * pi, 1e-12);
  EXPECT_LE(r.error_estimate, 1e-9);
}

TEST(Integrate, GaussKroneckerOfUnitSphere) {
  HypersurfaceEmbedding s = geodesic_sphere(models::euclidean(3), {0.0, 0.0, 0.0}, 1.0);
  auto f = [&](std::span<const double> u) { return shape_at(s, u).gauss_kronecker * area_element(s, u) / sphere_jacobian(u); };
  Integral r = integrate(f, sphere_grid(2, 12), sphere_grid(2, 24));
  EXPECT_NEAR(r.value, 4.0 * pi, 1e-10);
}

TEST(Integrate, GaussKroneckerOfHyperbolicSphere) {
  HypersurfaceEmbedding s = geodesic_sphere(models::hyperbolic_ball(4), {0.0, 0.0, 0.0, 0.0}, 1.0);
  auto f = [&](std::span<const double> u) { return shape_at(s, u).gauss_kronecker * area_element(s, u) / sphere_jacobian(u); };
  Integral r = integrate(f, sphere_grid(3, 6), sphere_grid(3, 12));
  const double exact = std::pow(std::cosh(1.0), 3) * 2.0 * pi * pi;
  EXPECT_NEAR(r.value, exact, std::max(3.0 * r.error_estimate, 1e-9 * exact));
}

TEST(Integrate, ThreadCountDoesNotChangeBits) {
  QuadratureGrid g = sphere_grid(3, 10);
  auto f = [](std::span<const double> a) { return std::sin(a[0]) * std::cos(3.0 * a[2]) + std::exp(std::cos(a[1])); };
  EXPECT_EQ(integrate_on(f, g, 1), integrate_on(f, g, 4));
}

TEST(Integrate, NonFiniteIntegrandIsReported) {
  auto f = [](std::span<const double> a) { return a[0] > 1.0 ? std::nan("") : 1.0; };
  EXPECT_THROW(integrate_on(f, sphere_grid(2, 8)), NonFiniteValue);
}

TEST(RadialIntegrate, BallVolumes) {
  EXPECT_NEAR(radial_integrate([](double r) { return 4.0 * pi * r * r; }, 1.0, 8), 4.0 * pi / 3.0, 1e-13);
  EXPECT_NEAR(radial_integrate([](double r) { return 2.0 * pi * pi * r * r * r; }, 1.0, 8), pi * pi / 2.0, 1e-13);
  EXPECT_NEAR(ball_volume(3), 4.0 * pi / 3.0, 1e-14);
  EXPECT_NEAR(ball_volume(4), pi * pi / 2.0, 1e-14);
}

TEST(RadialIntegrate, HyperbolicFourBallVolume) {
  // |S^3| * int_0^1 sinh^3 = |S^3| (cosh^3/3 - cosh) from 0 to 1.
  ManifoldChart h4 = models::hyperbolic_ball(4);
  HypersurfaceEmbedding ball = geodesic_sphere(h4, {0.0, 0.0, 0.0, 0.0}, 1.0);
  QuadratureGrid g = sphere_grid(3, 12);
  double v = radial_integrate([&](double r) { return sphere_area(ball.with_profile(RadiusProfile::sphere(r)), g); }, 1.0, 16);
  const double c = std::cosh(1.0);
  const double exact = 2.0 * pi * pi * ((c * c * c / 3.0 - c) - (1.0 / 3.0 - 1.0));
  EXPECT_NEAR(v, exact, 1e-8);
}

TEST(RadialIntegrate, RejectsNonPositiveRadius) {
  EXPECT_THROW(radial_integrate([](double) { return 1.0; }, 0.0, 4), InvalidArgument);
}

TEST(SpaceConstantsTest, LowDimensionalValues) {
  EXPECT_NEAR(sphere_volume(1), 2.0 * pi, 1e-14);
  EXPECT_NEAR(sphere_volume(2), 4.0 * pi, 1e-14);
  EXPECT_NEAR(sphere_volume(3), 2.0 * pi * pi, 1e-13);
  EXPECT_NEAR(sphere_volume(4), 8.0 * pi * pi / 3.0, 1e-13);
  for (int m = 1; m <= 7; ++m) EXPECT_NEAR(sphere_volume(m - 1), m * ball_volume(m), 1e-12);
}
