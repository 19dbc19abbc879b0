#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cgbkit/gaussbonnet.hpp"
#include "cgbkit/models.hpp"

using namespace cgbkit;

namespace {

constexpr double pi = std::numbers::pi;

Vec<double> origin(int n) { return Vec<double>(static_cast<std::size_t>(n), 0.0); }

Vec<double> random_param(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> colat(0.15, pi - 0.15);
  std::uniform_real_distribution<double> az(0.0, 2.0 * pi);
  Vec<double> u(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) u[j] = j + 1 < m ? colat(rng) : az(rng);
  return u;
}

void expect_shape_invariants(const ShapeData& s) {
  EXPECT_LE(s.normal_norm_defect, 1e-10);
  EXPECT_LE(s.normal_defect, 1e-8);
  EXPECT_LE(s.symmetry_defect, 1e-5);
  double prod = 1.0;
  for (int i = 0; i < s.principal_curvatures.size(); ++i) prod *= s.principal_curvatures[i];
  EXPECT_NEAR(s.gauss_kronecker, prod, 1e-10 * std::max(1.0, std::abs(prod)));
  for (int i = 0; i + 1 < s.principal_curvatures.size(); ++i)
    EXPECT_GE(s.principal_curvatures[i], s.principal_curvatures[i + 1]);
}

}  // namespace

TEST(GeodesicSphere, EuclideanPrincipalCurvatures) {
  std::mt19937_64 rng(1);
  for (int n : {3, 4, 5}) {
    HypersurfaceEmbedding s = geodesic_sphere(models::euclidean(n), Vec<double>(static_cast<std::size_t>(n), 0.5), 2.0);
    for (int trial = 0; trial < 5; ++trial) {
      ShapeData sh = shape_at(s, random_param(n - 1, rng));
      expect_shape_invariants(sh);
      for (int i = 0; i < n - 1; ++i) EXPECT_NEAR(sh.principal_curvatures[i], 0.5, 1e-10);
      EXPECT_NEAR(sh.gauss_kronecker, std::pow(2.0, -(n - 1)), 1e-10);
      EXPECT_LE((sh.shape_operator - 0.5 * Eigen::MatrixXd::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(GeodesicSphere, HyperbolicPrincipalCurvaturesAreCoth) {
  std::mt19937_64 rng(2);
  for (int n : {3, 4}) {
    for (double r : {0.3, 1.0, 1.7}) {
      HypersurfaceEmbedding s = geodesic_sphere(models::hyperbolic_ball(n), origin(n), r);
      for (int trial = 0; trial < 4; ++trial) {
        ShapeData sh = shape_at(s, random_param(n - 1, rng));
        expect_shape_invariants(sh);
        for (int i = 0; i < n - 1; ++i) EXPECT_NEAR(sh.principal_curvatures[i], 1.0 / std::tanh(r), 1e-9);
        EXPECT_NEAR(sh.gauss_kronecker, std::pow(1.0 / std::tanh(r), n - 1), 1e-8);
      }
    }
  }
}

TEST(GeodesicSphere, OffCenterHyperbolicSphere) {
  Vec<double> c{0.3, -0.2, 0.1};
  HypersurfaceEmbedding s = geodesic_sphere(models::hyperbolic_ball(3), c, 0.8);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    ShapeData sh = shape_at(s, random_param(2, rng));
    expect_shape_invariants(sh);
    EXPECT_NEAR(sh.principal_curvatures[0], 1.0 / std::tanh(0.8), 1e-9);
    EXPECT_NEAR(sh.principal_curvatures[1], 1.0 / std::tanh(0.8), 1e-9);
  }
}

TEST(GeodesicSphere, H3TimesLineAxisAndEquator) {
  // Distance to the center is sqrt(rho^2 + t^2): on the H^3 equator the
  // principal curvatures are (coth r, coth r, 1/r); at the line axis all are 1/r.
  const double r = 1.0;
  HypersurfaceEmbedding s = geodesic_sphere(models::h3_times_flat(4), origin(4), r);
  Vec<double> axis{pi / 2, pi / 2, pi / 2};
  ShapeData a = shape_at(s, axis);
  expect_shape_invariants(a);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.principal_curvatures[i], 1.0 / r, 1e-8);
  EXPECT_NEAR(a.point[3], r, 1e-12);

  Vec<double> equator{pi / 2, pi / 2, 0.0};
  ShapeData e = shape_at(s, equator);
  expect_shape_invariants(e);
  EXPECT_NEAR(e.principal_curvatures[0], 1.0 / std::tanh(r), 1e-8);
  EXPECT_NEAR(e.principal_curvatures[1], 1.0 / std::tanh(r), 1e-8);
  EXPECT_NEAR(e.principal_curvatures[2], 1.0 / r, 1e-8);

  std::mt19937_64 rng(4);
  double lo = 1e9, hi = -1e9;
  for (int trial = 0; trial < 20; ++trial) {
    ShapeData sh = shape_at(s, random_param(3, rng));
    expect_shape_invariants(sh);
    EXPECT_GT(sh.min_principal_curvature(), 0.0);
    lo = std::min(lo, sh.principal_curvatures[0]);
    hi = std::max(hi, sh.principal_curvatures[0]);
  }
  EXPECT_GT(hi - lo, 1e-3);
}

TEST(GeodesicSphere, OutwardNormalAndPeriodicity) {
  HypersurfaceEmbedding s = geodesic_sphere(models::euclidean(3), {1.0, 2.0, 3.0}, 1.5);
  Vec<double> u{1.1, 0.4};
  ShapeData sh = shape_at(s, u);
  double radial = 0.0;
  for (int i = 0; i < 3; ++i) radial += sh.normal[i] * (sh.point[i] - s.center()[i]);
  EXPECT_GT(radial, 0.0);
  Vec<double> u0{0.9, 0.0};
  Vec<double> u1{0.9, 2.0 * pi};
  Vec<double> p0 = s.param<double>(u0);
  Vec<double> p1 = s.param<double>(u1);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p0[i], p1[i], 1e-10);
}

TEST(GeodesicSphere, RejectsUnsupportedInput) {
  EXPECT_THROW(geodesic_sphere(models::hyperbolic_halfspace(3), {0.0, 0.0, 1.0}, 1.0), InvalidArgument);
  EXPECT_THROW(geodesic_sphere(models::euclidean(3), origin(3), 0.0), InvalidArgument);
  EXPECT_THROW(geodesic_sphere(models::euclidean(3), origin(3), -1.0), InvalidArgument);
}

TEST(PerturbedSphere, ZeroAmplitudeIsBase) {
  HypersurfaceEmbedding base = geodesic_sphere(models::hyperbolic_ball(3), origin(3), 1.0);
  HypersurfaceEmbedding same = perturbed_sphere(base, 0.0, 2, sphere_grid(2, 8));
  Vec<double> u{0.7, 1.3};
  ShapeData a = shape_at(base, u), b = shape_at(same, u);
  EXPECT_EQ(a.gauss_kronecker, b.gauss_kronecker);
  EXPECT_EQ(a.point, b.point);
}

TEST(PerturbedSphere, H3TimesLineStaysConvexOnFineGrid) {
  HypersurfaceEmbedding base = geodesic_sphere(models::h3_times_flat(4), origin(4), 1.0);
  QuadratureGrid grid = sphere_grid(3, 50);
  HypersurfaceEmbedding p = perturbed_sphere(base, 0.05, 2, grid);
  EXPECT_GE(check_convexity(p, grid).min_kappa, -1e-6);
}

TEST(PerturbedSphere, LargeAmplitudeIsRejectedWithLocation) {
  HypersurfaceEmbedding base = geodesic_sphere(models::euclidean(3), origin(3), 1.0);
  try {
    perturbed_sphere(base, 0.6, 4, sphere_grid(2, 16));
    FAIL() << "expected a convexity violation";
  } catch (const ConvexityViolation& e) {
    EXPECT_LT(e.min_principal_curvature, -1e-6);
    EXPECT_EQ(e.point.size(), 2u);
  }
  EXPECT_THROW(perturbed_sphere(base, 0.01, 9, sphere_grid(2, 8)), InvalidArgument);
}

TEST(Ellipsoid, ConvexWithPositiveCurvatures) {
  HypersurfaceEmbedding e =
      star_surface(models::euclidean(3), origin(3), RadiusProfile::ellipsoid({1.0, 1.0, 1.2}), sphere_grid(2, 12));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    ShapeData sh = shape_at(e, random_param(2, rng));
    expect_shape_invariants(sh);
    EXPECT_GT(sh.min_principal_curvature(), 0.0);
  }
  // At the tip of the long axis both curvatures are c / a^2.
  Vec<double> tip{pi / 2, pi / 2};
  ShapeData sh = shape_at(e, tip);
  EXPECT_NEAR(sh.principal_curvatures[0], 1.2, 1e-8);
  EXPECT_NEAR(sh.principal_curvatures[1], 1.2, 1e-8);
}

TEST(InducedChart, IntrinsicCurvatureOfSpheres) {
  std::mt19937_64 rng(6);
  HypersurfaceEmbedding unit = geodesic_sphere(models::euclidean(3), origin(3), 1.0);
  ManifoldChart iu = induced_chart(unit);
  for (int trial = 0; trial < 5; ++trial)
    EXPECT_NEAR(orthonormal_frame(iu, random_param(2, rng)).sectional(0, 1), 1.0, 1e-5);

  const double r = 1.7;
  HypersurfaceEmbedding big = geodesic_sphere(models::euclidean(4), origin(4), r);
  OrthonormalFrameData fb = orthonormal_frame(induced_chart(big), random_param(3, rng));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) EXPECT_NEAR(fb.sectional(i, j), 1.0 / (r * r), 1e-5);

  for (int n : {3, 4}) {
    HypersurfaceEmbedding h = geodesic_sphere(models::hyperbolic_ball(n), origin(n), 0.9);
    OrthonormalFrameData fh = orthonormal_frame(induced_chart(h), random_param(n - 1, rng));
    for (int i = 0; i < n - 1; ++i)
      for (int j = 0; j < n - 1; ++j)
        if (i != j) EXPECT_NEAR(fh.sectional(i, j), 1.0 / std::pow(std::sinh(0.9), 2), 1e-5);
  }
}

TEST(AreaElement, ClosedForms) {
  HypersurfaceEmbedding unit = geodesic_sphere(models::euclidean(3), origin(3), 1.0);
  for (double phi : {0.2, 1.0, 2.5}) {
    Vec<double> u{phi, 0.8};
    EXPECT_NEAR(area_element(unit, u), std::sin(phi), 1e-12);
  }
  std::mt19937_64 rng(7);
  for (int n : {3, 4, 5}) {
    const double r = 1.3;
    HypersurfaceEmbedding e = geodesic_sphere(models::euclidean(n), origin(n), r);
    HypersurfaceEmbedding h = geodesic_sphere(models::hyperbolic_ball(n), origin(n), r);
    Vec<double> u = random_param(n - 1, rng);
    EXPECT_NEAR(area_element(e, u), std::pow(r, n - 1) * sphere_jacobian(u), 1e-10);
    EXPECT_NEAR(area_element(h, u) / (std::pow(std::sinh(r), n - 1) * sphere_jacobian(u)), 1.0, 1e-10);
  }
}

TEST(EnclosedVolume, EuclideanAndHyperbolicBalls) {
  HypersurfaceEmbedding e = geodesic_sphere(models::euclidean(3), origin(3), 2.0);
  EXPECT_NEAR(enclosed_volume(e, sphere_grid(2, 12)), 4.0 * pi / 3.0 * 8.0, 1e-10);
  HypersurfaceEmbedding h = geodesic_sphere(models::hyperbolic_ball(3), origin(3), 1.0);
  // |S^2| int_0^1 sinh^2 = 4 pi (sinh 2 / 4 - 1 / 2)
  EXPECT_NEAR(enclosed_volume(h, sphere_grid(2, 12), 24), 4.0 * pi * (std::sinh(2.0) / 4.0 - 0.5), 1e-10);
}

TEST(Convexity, ParallelGridMatchesSerial) {
  HypersurfaceEmbedding base = geodesic_sphere(models::hyperbolic_ball(3), origin(3), 1.0);
  HypersurfaceEmbedding p = perturbed_sphere(base, 0.05, 3, sphere_grid(2, 8));
  QuadratureGrid g = sphere_grid(2, 10);
  ConvexityCheck c = check_convexity(p, g);
  double serial = 1e9;
  for (const auto& u : g.nodes) serial = std::min(serial, shape_at(p, u).min_principal_curvature());
  EXPECT_EQ(c.min_kappa, serial);
}
