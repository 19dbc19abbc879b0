#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cgbkit/constants.hpp"
#include "cgbkit/dual.hpp"
#include "cgbkit/errors.hpp"
#include "cgbkit/forms.hpp"
#include "cgbkit/manifold.hpp"
#include "cgbkit/quadrature.hpp"
#include "cgbkit/spherical.hpp"

namespace cgbkit {

namespace detail {

// Solves g x = b for symmetric positive-definite g (no pivoting needed).
template <class T>
Vec<T> generic_spd_solve(const SquareMatrix<T>& g, Vec<T> b) {
  const int n = g.n;
  SquareMatrix<T> a = g;
  for (int c = 0; c < n; ++c)
    for (int r = c + 1; r < n; ++r) {
      T f = a(r, c) / a(c, c);
      for (int k = c; k < n; ++k) a(r, k) = a(r, k) - f * a(c, k);
      b[r] = b[r] - f * b[c];
    }
  Vec<T> x(static_cast<std::size_t>(n));
  for (int r = n - 1; r >= 0; --r) {
    T s = b[r];
    for (int k = r + 1; k < n; ++k) s = s - a(r, k) * x[k];
    x[r] = s / a(r, r);
  }
  return x;
}

template <class T>
T legendre_poly(int degree, const T& t) {
  T p0(1.0);
  if (degree == 0) return p0;
  T p1 = t;
  for (int l = 2; l <= degree; ++l) {
    T p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / static_cast<double>(l);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace detail

// Radial function rho(u) of a star-shaped hypersurface, u a unit direction
// in the orthonormal frame at the center.
struct RadiusProfile {
  enum class Kind { constant, zonal, ellipsoid };

  Kind kind = Kind::constant;
  double radius = 1.0;
  double amplitude = 0.0;
  int degree = 0;
  std::vector<double> semi_axes;

  static RadiusProfile sphere(double r) { return {Kind::constant, r, 0.0, 0, {}}; }
  // r + amplitude * P_degree(u_0), P the Legendre polynomial.
  static RadiusProfile zonal(double r, double amplitude, int degree) { return {Kind::zonal, r, amplitude, degree, {}}; }
  // Radial function of the ellipsoid sum (u_i a_i^-1)^2 rho^2 = 1.
  static RadiusProfile ellipsoid(std::vector<double> axes) { return {Kind::ellipsoid, 1.0, 0.0, 0, std::move(axes)}; }

  template <class T>
  T operator()(std::span<const T> dir) const {
    using std::sqrt;
    switch (kind) {
      case Kind::constant:
        return T(radius);
      case Kind::zonal:
        return radius + amplitude * detail::legendre_poly(degree, dir[0]);
      case Kind::ellipsoid: {
        T q(0.0);
        for (std::size_t i = 0; i < dir.size(); ++i) q = q + dir[i] * dir[i] / (semi_axes[i] * semi_axes[i]);
        return 1.0 / sqrt(q);
      }
    }
    return T(radius);
  }

  std::string describe() const {
    switch (kind) {
      case Kind::constant: return "sphere r=" + std::to_string(radius);
      case Kind::zonal:
        return "perturbed sphere r=" + std::to_string(radius) + " eps=" + std::to_string(amplitude) +
               " degree=" + std::to_string(degree);
      case Kind::ellipsoid: return "ellipsoid";
    }
    return "";
  }
};

// Star-shaped closed hypersurface Gamma = { exp_c(rho(u) E u) : u in S^{n-1} },
// parametrized by hyperspherical angles, E an orthonormal frame at the center.
class HypersurfaceEmbedding {
 public:
  HypersurfaceEmbedding(ManifoldChart ambient, Vec<double> center, RadiusProfile profile)
      : ambient_(std::make_shared<const ManifoldChart>(std::move(ambient))),
        center_(std::move(center)),
        profile_(std::move(profile)) {
    const int n = ambient_->dimension();
    if (n < 2) throw InvalidArgument("hypersurfaces need ambient dimension >= 2");
    if (!ambient_->has_closed_exp())
      throw InvalidArgument("chart '" + ambient_->name() + "' has no closed-form exponential map for geodesic spheres");
    if (profile_.kind == RadiusProfile::Kind::ellipsoid && static_cast<int>(profile_.semi_axes.size()) != n)
      throw InvalidArgument("ellipsoid needs one semi-axis per ambient dimension");
    center_frame_ = gram_schmidt_frame(ambient_->metric_at(center_));
  }

  const ManifoldChart& ambient() const { return *ambient_; }
  int ambient_dimension() const { return ambient_->dimension(); }
  int dimension() const { return ambient_->dimension() - 1; }
  const Vec<double>& center() const { return center_; }
  const RadiusProfile& profile() const { return profile_; }
  const Eigen::MatrixXd& center_frame() const { return center_frame_; }

  HypersurfaceEmbedding with_profile(RadiusProfile p) const {
    HypersurfaceEmbedding e = *this;
    e.profile_ = std::move(p);
    return e;
  }

  // exp_c(scale * rho(u) * E dir(u)); scale in [0, 1] sweeps the enclosed body.
  template <class T>
  Vec<T> ray(const T& scale, std::span<const T> u) const {
    const int n = ambient_dimension();
    if (static_cast<int>(u.size()) != n - 1) throw InvalidArgument("parameter point has wrong dimension");
    Vec<T> dir = sphere_direction(u);
    T rho = profile_(std::span<const T>(dir)) * scale;
    Vec<T> v(static_cast<std::size_t>(n), T(0.0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (center_frame_(i, j) != 0.0) v[i] = v[i] + center_frame_(i, j) * dir[j];
    for (auto& c : v) c = c * rho;
    return ambient_->closed_exp<T>(center_, v);
  }

  template <class T>
  Vec<T> param(std::span<const T> u) const {
    return ray(T(1.0), u);
  }

 private:
  std::shared_ptr<const ManifoldChart> ambient_;
  Vec<double> center_;
  RadiusProfile profile_;
  Eigen::MatrixXd center_frame_;
};

namespace detail {

// Point and coordinate tangent vectors d_a param at a parameter point, one level up in the dual tower.
template <class T>
std::pair<Vec<T>, std::vector<Vec<T>>> param_with_tangents(const HypersurfaceEmbedding& emb, std::span<const T> u) {
  const std::size_t m = u.size();
  std::vector<Vec<T>> tangents(m);
  Vec<T> point;
  Vec<Dual<T>> ud(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) ud[b] = Dual<T>(u[b], T(a == b ? 1.0 : 0.0));
    Vec<Dual<T>> x = emb.param<Dual<T>>(ud);
    tangents[a].resize(x.size());
    if (a == 0) point.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      tangents[a][i] = x[i].d;
      if (a == 0) point[i] = x[i].v;
    }
  }
  return {point, tangents};
}

// Unit normal oriented so (d_1 param, ..., d_m param, nu) is positively
// oriented in the chart, then multiplied by `orientation`.
template <class T>
Vec<T> unit_normal(const HypersurfaceEmbedding& emb, std::span<const T> u, double orientation) {
  auto [x, t] = param_with_tangents(emb, u);
  const int n = emb.ambient_dimension();
  // minor[mask]: determinant of the rows in `mask` against the first popcount(mask)
  // tangent columns, by expansion along the last of those columns. The cofactor
  // of row i in det[t_1 .. t_{n-1}, e_i] is then minor[full \ {i}].
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<T> minor(full + 1, T(0.0));
  minor[0] = T(1.0);
  for (std::size_t mask = 1; mask < full; ++mask) {
    const int c = std::popcount(mask) - 1;
    T acc(0.0);
    int position = 0;
    for (int r = 0; r < n; ++r) {
      if (!(mask & (std::size_t{1} << r))) continue;
      T term = t[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] * minor[mask & ~(std::size_t{1} << r)];
      acc = ((position + c) % 2 == 0) ? acc + term : acc - term;
      ++position;
    }
    minor[mask] = acc;
  }
  Vec<T> omega(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const T& det = minor[full & ~(std::size_t{1} << i)];
    omega[i] = ((i + n - 1) % 2 == 0) ? det : -det;
  }
  SquareMatrix<T> g = emb.ambient().metric<T>(x);
  Vec<T> nu = generic_spd_solve(g, omega);
  T norm2(0.0);
  for (int i = 0; i < n; ++i) norm2 = norm2 + omega[i] * nu[i];
  if (!(value_of(norm2) > 0.0)) throw DegenerateParametrization("normal covector vanishes; parametrization is not an immersion");
  using std::sqrt;
  T inv = orientation / sqrt(norm2);
  for (auto& c : nu) c = c * inv;
  return nu;
}

}  // namespace detail

struct ShapeData {
  Vec<double> param_point;
  Vec<double> point;
  Eigen::VectorXd normal;              // outward unit normal nu, chart coordinates
  Eigen::MatrixXd tangents;            // n x (n-1): d_a param
  Eigen::MatrixXd induced_metric;      // (n-1) x (n-1)
  Eigen::MatrixXd tangent_frame;       // n x (n-1): orthonormal frame of T Gamma
  Eigen::MatrixXd shape_operator;      // A in tangent_frame, symmetrized
  Eigen::VectorXd principal_curvatures;  // descending
  Eigen::MatrixXd principal_frame;       // n x (n-1), ambient chart coordinates
  Eigen::MatrixXd principal_frame_param; // (n-1) x (n-1), parameter coordinates
  double gauss_kronecker = 0.0;
  std::vector<AlternatingForm> alpha;  // alpha_i = kappa_i theta_i
  double symmetry_defect = 0.0;        // max |h - h^T| of the second fundamental form before symmetrization
  double normal_defect = 0.0;          // max |<nu, T>| over unit tangent frame vectors
  double normal_norm_defect = 0.0;     // | |nu| - 1 |

  double min_principal_curvature() const { return principal_curvatures.minCoeff(); }
  bool convex(double tolerance = tol::convexity) const { return min_principal_curvature() >= -tolerance; }

  // Frame (e_1..e_{n-1}, nu), positively oriented in the ambient chart.
  Eigen::MatrixXd ambient_frame() const {
    Eigen::MatrixXd f(principal_frame.rows(), principal_frame.cols() + 1);
    f << principal_frame, normal;
    return f;
  }
};

// Outward sign: +1 if the chart-oriented normal points along d/ds ray(s, u) at s = 1.
inline double outward_orientation(const HypersurfaceEmbedding& emb, std::span<const double> u) {
  const int n = emb.ambient_dimension();
  Vec<double> nu = detail::unit_normal<double>(emb, u, 1.0);
  Vec<D1> ud(u.begin(), u.end());
  Vec<D1> r = emb.ray<D1>(D1(1.0, 1.0), ud);
  Vec<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[i] = r[i].v;
  Eigen::MatrixXd g = emb.ambient().metric_at(x);
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += nu[i] * g(i, j) * r[j].d;
  return s >= 0.0 ? 1.0 : -1.0;
}

inline ShapeData shape_at(const HypersurfaceEmbedding& emb, std::span<const double> u) {
  const int n = emb.ambient_dimension();
  const int m = n - 1;
  if (static_cast<int>(u.size()) != m) throw InvalidArgument("parameter point has wrong dimension");
  ShapeData s;
  s.param_point.assign(u.begin(), u.end());

  auto [x, t] = detail::param_with_tangents<double>(emb, u);
  emb.ambient().check_point(x);
  s.point = x;
  s.tangents = Eigen::MatrixXd(n, m);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) s.tangents(i, a) = t[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];

  MetricJet jet = metric_jet(emb.ambient(), x, 1);
  const Eigen::MatrixXd& g = jet.g;
  Christoffel gamma = christoffel_from_jet(jet);

  const double orientation = outward_orientation(emb, u);
  Vec<double> nu = detail::unit_normal<double>(emb, u, orientation);
  s.normal = Eigen::Map<const Eigen::VectorXd>(nu.data(), n);

  // w_a = nabla_{d_a} nu = d_a nu + Gamma(d_a param, nu)
  Eigen::MatrixXd w(n, m);
  for (int a = 0; a < m; ++a) {
    Vec<D1> ud(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b) ud[b] = D1(u[b], a == b ? 1.0 : 0.0);
    Vec<D1> nud = detail::unit_normal<D1>(emb, ud, orientation);
    for (int k = 0; k < n; ++k) {
      double acc = nud[k].d;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += gamma(k, i, j) * s.tangents(i, a) * nu[j];
      w(k, a) = acc;
    }
  }

  s.induced_metric = s.tangents.transpose() * g * s.tangents;
  Eigen::MatrixXd h = w.transpose() * g * s.tangents;  // h(a,b) = <nabla_a nu, d_b>
  s.symmetry_defect = (h - h.transpose()).cwiseAbs().maxCoeff();
  Eigen::MatrixXd hs = 0.5 * (h + h.transpose());

  Eigen::LLT<Eigen::MatrixXd> llt(s.induced_metric);
  if (llt.info() != Eigen::Success)
    throw DegenerateParametrization("induced metric is not positive-definite; parametrization is not an immersion");
  Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd l_inv = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m));
  s.tangent_frame = s.tangents * l_inv.transpose();
  s.shape_operator = l_inv * hs * l_inv.transpose();
  s.shape_operator = 0.5 * (s.shape_operator + s.shape_operator.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.shape_operator);
  Eigen::VectorXd evals = eig.eigenvalues();
  Eigen::MatrixXd evecs = eig.eigenvectors();
  s.principal_curvatures = evals.reverse();
  Eigen::MatrixXd v = evecs.rowwise().reverse();
  s.principal_frame = s.tangent_frame * v;
  Eigen::MatrixXd full(n, n);
  full << s.principal_frame, s.normal;
  if (full.determinant() < 0.0) {
    v.col(m - 1) *= -1.0;
    s.principal_frame.col(m - 1) *= -1.0;
  }
  s.principal_frame_param = l_inv.transpose() * v;
  s.gauss_kronecker = s.principal_curvatures.prod();
  for (int i = 0; i < m; ++i) s.alpha.push_back(AlternatingForm::basis(m, {i}, s.principal_curvatures[i]));

  s.normal_norm_defect = std::abs(std::sqrt(s.normal.dot(g * s.normal)) - 1.0);
  s.normal_defect = (s.tangent_frame.transpose() * g * s.normal).cwiseAbs().maxCoeff();
  return s;
}

// sqrt(det) of the pullback metric in hyperspherical parameter coordinates.
inline double area_element(const HypersurfaceEmbedding& emb, std::span<const double> u) {
  auto [x, t] = detail::param_with_tangents<double>(emb, u);
  const int n = emb.ambient_dimension();
  const int m = n - 1;
  Eigen::MatrixXd tan(n, m);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) tan(i, a) = t[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
  Eigen::MatrixXd induced = tan.transpose() * emb.ambient().metric_at(x) * tan;
  double det = induced.determinant();
  if (!(det > 0.0)) throw DegenerateParametrization("induced metric is degenerate");
  return std::sqrt(det);
}

// Gamma as a Riemannian manifold in its own right: the pullback metric in parameter coordinates.
inline ManifoldChart induced_chart(const HypersurfaceEmbedding& emb) {
  const int m = emb.dimension();
  auto metric = [emb, m](auto u) {
    using T = span_scalar_t<decltype(u)>;
    auto [x, t] = detail::param_with_tangents<T>(emb, u);
    SquareMatrix<T> g = emb.ambient().template metric<T>(x);
    const int n = m + 1;
    SquareMatrix<T> h(m);
    for (int a = 0; a < m; ++a) {
      Vec<T> gt(static_cast<std::size_t>(n), T(0.0));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gt[i] = gt[i] + g(i, j) * t[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
      for (int b = a; b < m; ++b) {
        T s(0.0);
        for (int i = 0; i < n; ++i) s = s + t[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] * gt[i];
        h(a, b) = s;
        h(b, a) = s;
      }
    }
    return h;
  };
  ManifoldChart chart(m, MetricField::from(metric), ModelTag::custom, "induced(" + emb.ambient().name() + ")");
  chart.set_domain([](std::span<const double> u) {
    for (std::size_t j = 0; j + 1 < u.size(); ++j)
      if (!(u[j] > 0.0 && u[j] < std::numbers::pi)) return false;
    return true;
  });
  chart.set_sampler([m](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> colat(0.2, std::numbers::pi - 0.2);
    std::uniform_real_distribution<double> az(0.0, 2.0 * std::numbers::pi);
    Vec<double> u(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) u[j] = (j + 1 == m) ? az(rng) : colat(rng);
    return u;
  });
  return chart;
}

// Volume element of (s, u) -> ray(s, u) on (0, 1] x angles.
inline double polar_volume_element(const HypersurfaceEmbedding& emb, double s, std::span<const double> u) {
  const int n = emb.ambient_dimension();
  const int m = n - 1;
  Eigen::MatrixXd jac(n, n);
  Vec<double> x(static_cast<std::size_t>(n));
  {
    Vec<D1> ud(u.begin(), u.end());
    Vec<D1> r = emb.ray<D1>(D1(s, 1.0), ud);
    for (int i = 0; i < n; ++i) {
      x[i] = r[i].v;
      jac(i, 0) = r[i].d;
    }
  }
  for (int a = 0; a < m; ++a) {
    Vec<D1> ud(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b) ud[b] = D1(u[b], a == b ? 1.0 : 0.0);
    Vec<D1> r = emb.ray<D1>(D1(s), ud);
    for (int i = 0; i < n; ++i) jac(i, a + 1) = r[i].d;
  }
  Eigen::MatrixXd g = emb.ambient().metric_at(x);
  return std::sqrt(std::max(0.0, (jac.transpose() * g * jac).determinant()));
}

// Volume of the body C bounded by Gamma, by the polar sweep.
inline double enclosed_volume(const HypersurfaceEmbedding& emb, const QuadratureGrid& grid, int radial_order = 16) {
  if (grid.m != emb.dimension()) throw InvalidArgument("grid dimension does not match hypersurface");
  std::vector<double> inner = parallel_map<double>(grid.size(), [&](std::size_t i) {
    return radial_integrate([&](double s) { return polar_volume_element(emb, s, grid.nodes[i]); }, 1.0, radial_order);
  });
  std::vector<double> terms(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) terms[i] = inner[i];
  // The grid weights carry the round Jacobian, which the polar element already includes.
  for (std::size_t i = 0; i < grid.size(); ++i) terms[i] *= grid.weights[i] / sphere_jacobian(grid.nodes[i]);
  return pairwise_sum(terms);
}

inline HypersurfaceEmbedding geodesic_sphere(const ManifoldChart& ambient, Vec<double> center, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("geodesic sphere radius must be positive");
  return HypersurfaceEmbedding(ambient, std::move(center), RadiusProfile::sphere(radius));
}

struct ConvexityCheck {
  double min_kappa = 0.0;
  Vec<double> where;
};

inline ConvexityCheck check_convexity(const HypersurfaceEmbedding& emb, const QuadratureGrid& grid) {
  std::vector<double> mins = parallel_map<double>(grid.size(), [&](std::size_t i) {
    return shape_at(emb, grid.nodes[i]).min_principal_curvature();
  });
  auto it = std::min_element(mins.begin(), mins.end());
  return {*it, grid.nodes[static_cast<std::size_t>(it - mins.begin())]};
}

// Star surface with the given profile; rejected unless grid-verified convex.
inline HypersurfaceEmbedding star_surface(const ManifoldChart& ambient, Vec<double> center, RadiusProfile profile,
                                          const QuadratureGrid& check_grid, double convexity = tol::convexity) {
  HypersurfaceEmbedding emb(ambient, std::move(center), std::move(profile));
  ConvexityCheck c = check_convexity(emb, check_grid);
  if (c.min_kappa < -convexity) throw ConvexityViolation(c.where, c.min_kappa);
  return emb;
}

// r + eps * P_degree(u_0) over the base geodesic sphere.
inline HypersurfaceEmbedding perturbed_sphere(const HypersurfaceEmbedding& base, double amplitude, int degree,
                                              const QuadratureGrid& check_grid, double convexity = tol::convexity) {
  if (base.profile().kind != RadiusProfile::Kind::constant)
    throw InvalidArgument("perturbed_sphere needs a geodesic sphere as base");
  if (degree < 1 || degree > 6) throw InvalidArgument("perturbation degree must be in [1, 6]");
  if (amplitude == 0.0) return base;
  return star_surface(base.ambient(), base.center(), RadiusProfile::zonal(base.profile().radius, amplitude, degree),
                      check_grid, convexity);
}

}  // namespace cgbkit
