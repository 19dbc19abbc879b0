#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cgbkit/constants.hpp"
#include "cgbkit/dual.hpp"
#include "cgbkit/errors.hpp"
#include "cgbkit/forms.hpp"
#include "cgbkit/tensor.hpp"

namespace cgbkit {

template <class T>
using MetricFn = std::function<SquareMatrix<T>(std::span<const T>)>;

// Metric components g_ij(x) evaluable on plain doubles and on first/second
// order duals, so curvature can be differentiated exactly.
struct MetricField {
  MetricFn<double> f0;
  MetricFn<D1> f1;
  MetricFn<D2> f2;

  template <class F>
  static MetricField from(const F& f) {
    return {MetricFn<double>(f), MetricFn<D1>(f), MetricFn<D2>(f)};
  }

  template <class T>
  SquareMatrix<T> operator()(std::span<const T> x) const {
    if constexpr (std::is_same_v<T, double>) return f0(x);
    else if constexpr (std::is_same_v<T, D1>) return f1(x);
    else {
      static_assert(std::is_same_v<T, D2>, "metric evaluable up to second-order duals");
      return f2(x);
    }
  }
};

template <class T>
using ExpFn = std::function<Vec<T>(std::span<const double>, std::span<const T>)>;

// Closed-form exponential map exp_p(v), differentiable in v up to third order.
struct ExpField {
  ExpFn<double> e0;
  ExpFn<D1> e1;
  ExpFn<D2> e2;
  ExpFn<D3> e3;

  template <class F>
  static ExpField from(const F& f) {
    return {ExpFn<double>(f), ExpFn<D1>(f), ExpFn<D2>(f), ExpFn<D3>(f)};
  }

  template <class T>
  Vec<T> operator()(std::span<const double> p, std::span<const T> v) const {
    if constexpr (std::is_same_v<T, double>) return e0(p, v);
    else if constexpr (std::is_same_v<T, D1>) return e1(p, v);
    else if constexpr (std::is_same_v<T, D2>) return e2(p, v);
    else {
      static_assert(std::is_same_v<T, D3>, "closed exp evaluable up to third-order duals");
      return e3(p, v);
    }
  }
};

enum class ModelTag { euclidean, hyperbolic, hyperbolic_halfspace, hyperbolic_polar, sphere, product, custom };

inline std::string to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::euclidean: return "euclidean";
    case ModelTag::hyperbolic: return "hyperbolic";
    case ModelTag::hyperbolic_halfspace: return "hyperbolic_halfspace";
    case ModelTag::hyperbolic_polar: return "hyperbolic_polar";
    case ModelTag::sphere: return "sphere";
    case ModelTag::product: return "product";
    case ModelTag::custom: return "custom";
  }
  return "custom";
}

enum class DerivativeMode { dual_number, central_difference };

// A single coordinate chart carrying a Riemannian metric. Immutable after
// construction; the setters are only used by the model builders.
class ManifoldChart {
 public:
  using Domain = std::function<bool(std::span<const double>)>;
  using Sampler = std::function<Vec<double>(std::mt19937_64&)>;

  ManifoldChart(int dimension, MetricField metric, ModelTag tag = ModelTag::custom, std::string name = "custom")
      : dimension_(dimension), metric_(std::move(metric)), tag_(tag), name_(std::move(name)) {
    if (dimension < 1) throw InvalidArgument("chart dimension must be positive");
  }

  int dimension() const { return dimension_; }
  ModelTag tag() const { return tag_; }
  const std::string& name() const { return name_; }
  DerivativeMode derivative_mode() const { return mode_; }
  double curvature_scale() const { return curvature_; }
  const std::vector<int>& factor_dimensions() const { return factor_dims_; }

  ManifoldChart& set_domain(Domain d) { domain_ = std::move(d); return *this; }
  ManifoldChart& set_sampler(Sampler s) { sampler_ = std::move(s); return *this; }
  ManifoldChart& set_closed_exp(ExpField e) { closed_exp_ = std::move(e); return *this; }
  ManifoldChart& set_curvature_scale(double k) { curvature_ = k; return *this; }
  ManifoldChart& set_factor_dimensions(std::vector<int> dims) { factor_dims_ = std::move(dims); return *this; }

  ManifoldChart with_derivative_mode(DerivativeMode mode) const {
    ManifoldChart c = *this;
    c.mode_ = mode;
    return c;
  }

  template <class T>
  SquareMatrix<T> metric(std::span<const T> x) const {
    return metric_(x);
  }

  const MetricField& metric_field() const { return metric_; }

  bool contains(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dimension_) return false;
    for (double c : x)
      if (!std::isfinite(c)) return false;
    return !domain_ || domain_(x);
  }

  Vec<double> sample_point(std::mt19937_64& rng) const {
    if (!sampler_) throw InvalidArgument("chart '" + name_ + "' has no point sampler");
    return sampler_(rng);
  }

  bool has_closed_exp() const { return closed_exp_.has_value(); }

  template <class T>
  Vec<T> closed_exp(std::span<const double> p, std::span<const T> v) const {
    if (!closed_exp_) throw InvalidArgument("chart '" + name_ + "' has no closed-form exponential map");
    return (*closed_exp_)(p, v);
  }

  const std::optional<ExpField>& closed_exp_field() const { return closed_exp_; }

  // Metric at p as a checked symmetric positive-definite matrix.
  Eigen::MatrixXd metric_at(std::span<const double> p) const {
    check_point(p);
    Eigen::MatrixXd g = to_eigen_values(metric<double>(p));
    check_metric(g);
    return g;
  }

  void check_point(std::span<const double> p) const {
    if (static_cast<int>(p.size()) != dimension_)
      throw InvalidArgument("point has " + std::to_string(p.size()) + " coordinates, chart dimension is " +
                            std::to_string(dimension_));
    if (!contains(p)) throw DomainError("point outside the domain of chart '" + name_ + "'");
  }

  static void check_metric(const Eigen::MatrixXd& g) {
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > tol::metric_symmetry * scale)
      throw SingularMetric("metric is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success || !g.allFinite()) throw SingularMetric("metric is not positive-definite");
  }

 private:
  int dimension_;
  MetricField metric_;
  ModelTag tag_;
  std::string name_;
  DerivativeMode mode_ = DerivativeMode::dual_number;
  Domain domain_;
  Sampler sampler_;
  std::optional<ExpField> closed_exp_;
  double curvature_ = 0.0;
  std::vector<int> factor_dims_;
};

// Metric with its first and (optionally) second coordinate derivatives at a point.
struct MetricJet {
  Eigen::MatrixXd g;
  Eigen::MatrixXd g_inv;
  std::vector<Eigen::MatrixXd> dg;                // dg[a] = d_a g
  std::vector<std::vector<Eigen::MatrixXd>> ddg;  // ddg[a][b] = d_a d_b g (order 2 only)
};

namespace detail {

inline MetricJet jet_dual(const ManifoldChart& chart, std::span<const double> p, int order) {
  const int n = chart.dimension();
  MetricJet jet;
  jet.dg.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
  if (order == 1) {
    Vec<D1> x(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < n; ++i) x[i] = D1(p[i], i == a ? 1.0 : 0.0);
      SquareMatrix<D1> g = chart.metric<D1>(x);
      if (a == 0) jet.g = to_eigen_values(g);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) jet.dg[a](i, j) = g(i, j).d;
    }
    return jet;
  }
  jet.ddg.assign(static_cast<std::size_t>(n), std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n)));
  Vec<D2> x(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      for (int i = 0; i < n; ++i) x[i] = D2(D1(p[i], i == a ? 1.0 : 0.0), D1(i == b ? 1.0 : 0.0, 0.0));
      SquareMatrix<D2> g = chart.metric<D2>(x);
      if (a == 0 && b == 0) jet.g = to_eigen_values(g);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (a == b) jet.dg[a](i, j) = g(i, j).v.d;
          jet.ddg[a][b](i, j) = g(i, j).d.d;
          jet.ddg[b][a](i, j) = g(i, j).d.d;
        }
    }
  return jet;
}

inline MetricJet jet_central(const ManifoldChart& chart, std::span<const double> p, int order) {
  const int n = chart.dimension();
  const double eps = std::numeric_limits<double>::epsilon();
  auto g_at = [&](const Vec<double>& x) { return to_eigen_values(chart.metric<double>(x)); };
  Vec<double> base(p.begin(), p.end());
  MetricJet jet;
  jet.g = g_at(base);
  jet.dg.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
  auto shifted = [&](int a, double ha, int b, double hb) {
    Vec<double> x = base;
    x[a] += ha;
    if (b >= 0) x[b] += hb;
    return g_at(x);
  };
  for (int a = 0; a < n; ++a) {
    const double h = std::cbrt(eps) * std::max(1.0, std::abs(p[a]));
    auto diff = [&](double s) { return ((shifted(a, s, -1, 0.0) - shifted(a, -s, -1, 0.0)) / (2.0 * s)).eval(); };
    jet.dg[a] = (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
  }
  if (order == 2) {
    jet.ddg.assign(static_cast<std::size_t>(n), std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n)));
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const double h = std::pow(eps, 0.25) * std::max({1.0, std::abs(p[a]), std::abs(p[b])});
        auto diff2 = [&](double s) {
          return ((shifted(a, s, b, s) - shifted(a, s, b, -s) - shifted(a, -s, b, s) + shifted(a, -s, b, -s)) /
                  (4.0 * s * s))
              .eval();
        };
        Eigen::MatrixXd m = (4.0 * diff2(0.5 * h) - diff2(h)) / 3.0;
        jet.ddg[a][b] = m;
        jet.ddg[b][a] = m;
      }
  }
  return jet;
}

}  // namespace detail

inline MetricJet metric_jet(const ManifoldChart& chart, std::span<const double> p, int order = 2) {
  chart.check_point(p);
  MetricJet jet = chart.derivative_mode() == DerivativeMode::dual_number ? detail::jet_dual(chart, p, order)
                                                                         : detail::jet_central(chart, p, order);
  ManifoldChart::check_metric(jet.g);
  jet.g_inv = jet.g.llt().solve(Eigen::MatrixXd::Identity(jet.g.rows(), jet.g.cols()));
  return jet;
}

// Christoffel symbols of the second kind, indexed (k, i, j) for Gamma^k_ij.
struct Christoffel {
  int n = 0;
  std::vector<double> a;

  explicit Christoffel(int size = 0) : n(size), a(static_cast<std::size_t>(size) * size * size, 0.0) {}
  double& operator()(int k, int i, int j) { return a[(static_cast<std::size_t>(k) * n + i) * n + j]; }
  double operator()(int k, int i, int j) const { return a[(static_cast<std::size_t>(k) * n + i) * n + j]; }
  double max_abs() const {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
  }
};

inline Christoffel christoffel_from_jet(const MetricJet& jet) {
  const int n = static_cast<int>(jet.g.rows());
  Christoffel lowered(n);  // (l, i, j) = Gamma_{l,ij}
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lowered(l, i, j) = 0.5 * (jet.dg[i](j, l) + jet.dg[j](i, l) - jet.dg[l](i, j));
  Christoffel out(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += jet.g_inv(k, l) * lowered(l, i, j);
        out(k, i, j) = s;
      }
  return out;
}

inline Christoffel christoffel(const ManifoldChart& chart, std::span<const double> p) {
  return christoffel_from_jet(metric_jet(chart, p, 1));
}

// Lowered Riemann tensor R_ijkl = <R(d_i, d_j) d_l, d_k>, with
// R(X,Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]. In this index
// order R_ijij is the sectional curvature of the (i, j) plane times its area,
// so constant curvature K gives R_ijkl = K (g_ik g_jl - g_il g_jk).
struct CurvatureData {
  Vec<double> point;
  Eigen::MatrixXd metric;
  Tensor4 riemann_lowered;

  int dimension() const { return riemann_lowered.n; }

  // Largest violation of the pair symmetries, relative to max |R| (0 if R == 0).
  double symmetry_defect() const {
    const auto& r = riemann_lowered;
    const double scale = r.max_abs();
    if (scale == 0.0) return 0.0;
    double m = 0.0;
    const int n = r.n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double x = r(i, j, k, l);
            m = std::max({m, std::abs(x + r(j, i, k, l)), std::abs(x + r(i, j, l, k)), std::abs(x - r(k, l, i, j))});
          }
    return m / scale;
  }

  double bianchi_defect() const {
    const auto& r = riemann_lowered;
    const double scale = r.max_abs();
    if (scale == 0.0) return 0.0;
    double m = 0.0;
    const int n = r.n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) m = std::max(m, std::abs(r(i, j, k, l) + r(j, k, i, l) + r(k, i, j, l)));
    return m / scale;
  }
};

inline CurvatureData riemann_from_jet(std::span<const double> p, const MetricJet& jet) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int n = static_cast<int>(jet.g.rows());
  const int nn = n * n;
  // Gamma_{l,ab} as (l | a b) and its derivatives d_m Gamma_{l,ab}.
  RowMat lowered(n, nn);
  std::vector<RowMat> dlowered(static_cast<std::size_t>(n), RowMat(n, nn));
  for (int l = 0; l < n; ++l)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        lowered(l, a * n + b) = 0.5 * (jet.dg[a](b, l) + jet.dg[b](a, l) - jet.dg[l](a, b));
        for (int m = 0; m < n; ++m)
          dlowered[m](l, a * n + b) = 0.5 * (jet.ddg[m][a](b, l) + jet.ddg[m][b](a, l) - jet.ddg[m][l](a, b));
      }
  const RowMat gamma = jet.g_inv * lowered;  // (r | a b) = Gamma^r_ab
  // d_m Gamma^r_ab = (d_m g^-1) Gamma_lowered + g^-1 d_m Gamma_lowered
  std::vector<RowMat> dgamma(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    Eigen::MatrixXd dginv = -jet.g_inv * jet.dg[m] * jet.g_inv;
    dgamma[m] = dginv * lowered + jet.g_inv * dlowered[m];
  }
  // G_mu(r, l) = Gamma^r_{mu l}
  std::vector<Eigen::MatrixXd> g_mu(static_cast<std::size_t>(n), Eigen::MatrixXd(n, n));
  for (int mu = 0; mu < n; ++mu)
    for (int r = 0; r < n; ++r)
      for (int l = 0; l < n; ++l) g_mu[mu](r, l) = gamma(r, mu * n + l);
  CurvatureData out;
  out.point.assign(p.begin(), p.end());
  out.metric = jet.g;
  out.riemann_lowered = Tensor4(n);
  // R^r_{s mu nu} = d_mu Gamma^r_{nu s} - d_nu Gamma^r_{mu s} + (G_mu G_nu - G_nu G_mu)(r, s),
  // then R_ijkl = <R(d_i,d_j) d_l, d_k> = g_{k r} R^r_{l i j}.
  Eigen::MatrixXd up(n, n);
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu) {
      if (mu == nu) continue;
      up.noalias() = g_mu[mu] * g_mu[nu] - g_mu[nu] * g_mu[mu];
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) up(r, s) += dgamma[mu](r, nu * n + s) - dgamma[nu](r, mu * n + s);
      Eigen::Map<RowMat>(out.riemann_lowered.a.data() + (static_cast<std::size_t>(mu) * n + nu) * nn, n, n) = jet.g * up;
    }
  return out;
}

inline CurvatureData riemann(const ManifoldChart& chart, std::span<const double> p) {
  if (chart.tag() == ModelTag::euclidean) {
    // Cartesian coordinates: constant metric, identically zero tensor.
    chart.check_point(p);
    CurvatureData flat;
    flat.point.assign(p.begin(), p.end());
    flat.metric = chart.metric_at(p);
    flat.riemann_lowered = Tensor4(chart.dimension());
    return flat;
  }
  return riemann_from_jet(p, metric_jet(chart, p, 2));
}

// Omega_ij = sum_{a<b} T(a,b,i,j) theta_a ^ theta_b for i, j < k, with the
// forms living over the first k frame directions.
inline TwoFormMatrix curvature_forms(const Tensor4& frame_tensor, int k) {
  TwoFormMatrix omega(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      std::vector<AlternatingForm::Term> terms;
      for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
          double c = frame_tensor(a, b, i, j);
          if (c != 0.0) terms.push_back({(MultiIndex{1} << a) | (MultiIndex{1} << b), c});
        }
      omega.set(i, j, AlternatingForm::from_terms(k, 2, std::move(terms)));
    }
  return omega;
}

inline TwoFormMatrix curvature_forms(const Tensor4& frame_tensor) { return curvature_forms(frame_tensor, frame_tensor.n); }

struct OrthonormalFrameData {
  Vec<double> point;
  Eigen::MatrixXd frame;                 // columns e_i in chart coordinates
  std::vector<AlternatingForm> coframe;  // theta_i, dual to e_i
  TwoFormMatrix omega{1, 1};
  Eigen::MatrixXd sectional;             // K_ij = Omega_ij(e_i, e_j)
  Tensor4 riemann_frame;                 // R(e_a, e_b, e_c, e_d)

  int dimension() const { return static_cast<int>(frame.cols()); }
};

// Assembles frame data from curvature and a metric-orthonormal frame matrix.
inline OrthonormalFrameData frame_data(const CurvatureData& curv, const Eigen::MatrixXd& frame) {
  const int n = curv.dimension();
  if (frame.rows() != n || frame.cols() != n) throw InvalidArgument("frame must be n x n");
  Eigen::MatrixXd gram = frame.transpose() * curv.metric * frame;
  if ((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > tol::frame_orthonormal)
    throw InvalidArgument("frame is not orthonormal");
  OrthonormalFrameData out;
  out.point = curv.point;
  out.frame = frame;
  for (int i = 0; i < n; ++i) out.coframe.push_back(AlternatingForm::basis(n, {i}));
  out.riemann_frame = change_basis(curv.riemann_lowered, frame);
  out.omega = curvature_forms(out.riemann_frame);
  out.sectional = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) out.sectional(i, j) = out.riemann_frame(i, j, i, j);
  return out;
}

// Gram-Schmidt of the coordinate basis under g, processed in `order`
// (identity by default); the last vector is flipped if needed so the frame is
// positively oriented with respect to the coordinate order.
inline Eigen::MatrixXd gram_schmidt_frame(const Eigen::MatrixXd& g, std::span<const int> order = {}) {
  const int n = static_cast<int>(g.rows());
  std::vector<int> ord(static_cast<std::size_t>(n));
  std::iota(ord.begin(), ord.end(), 0);
  if (!order.empty()) {
    if (static_cast<int>(order.size()) != n) throw InvalidArgument("frame order has wrong length");
    ord.assign(order.begin(), order.end());
  }
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, ord[c]);
    for (int pass = 0; pass < 2; ++pass)
      for (int b = 0; b < c; ++b) v -= (e.col(b).dot(g * v)) * e.col(b);
    double norm = std::sqrt(v.dot(g * v));
    if (!(norm > 0.0)) throw SingularMetric("Gram-Schmidt breakdown");
    e.col(c) = v / norm;
  }
  if (e.determinant() < 0.0) e.col(n - 1) *= -1.0;
  return e;
}

inline OrthonormalFrameData orthonormal_frame(const ManifoldChart& chart, std::span<const double> p,
                                              std::span<const int> order = {}) {
  CurvatureData curv = riemann(chart, p);
  return frame_data(curv, gram_schmidt_frame(curv.metric, order));
}

struct NullityResult {
  Vec<double> point;
  int nullity_dim = 0;
  Eigen::MatrixXd nullity_basis;        // columns, chart coordinates, metric-orthonormal
  Eigen::MatrixXd nullity_basis_frame;  // same vectors in the orthonormal frame
  Eigen::MatrixXd frame;
  Vec<double> singular_values;          // descending
  double threshold = 0.0;
  // Smallest singular value above threshold over largest below (inf if either side is empty).
  double gap = std::numeric_limits<double>::infinity();
};

// Nullity of Z -> (R(e_i, e_j) Z)_{i<j}, computed in an orthonormal frame.
inline NullityResult nullity_from_frame(const OrthonormalFrameData& fd, double tol = tol::nullity_relative) {
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidArgument("nullity tolerance must lie in (0, 1)");
  const int n = fd.dimension();
  const auto& t = fd.riemann_frame;
  const int pairs = n * (n - 1) / 2;
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(std::max(1, pairs * n), n);
  int row = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int m = 0; m < n; ++m, ++row)
        for (int z = 0; z < n; ++z) map(row, z) = t(i, j, m, z);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map, Eigen::ComputeFullV);
  Eigen::VectorXd sv = svd.singularValues();
  NullityResult out;
  out.point = fd.point;
  out.frame = fd.frame;
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  out.singular_values.resize(static_cast<std::size_t>(n), 0.0);
  const double largest = out.singular_values.front();
  std::vector<int> null_cols;
  if (largest <= tol::vanishing_tensor) {
    out.threshold = tol::vanishing_tensor;
    for (int c = 0; c < n; ++c) null_cols.push_back(c);
  } else {
    out.threshold = tol * largest;
    double above = std::numeric_limits<double>::infinity();
    double below = 0.0;
    for (int c = 0; c < n; ++c) {
      double s = out.singular_values[static_cast<std::size_t>(c)];
      if (s < out.threshold) {
        null_cols.push_back(c);
        below = std::max(below, s);
      } else {
        above = std::min(above, s);
      }
    }
    if (!null_cols.empty() && below > 0.0) out.gap = above / below;
  }
  out.nullity_dim = static_cast<int>(null_cols.size());
  out.nullity_basis_frame = Eigen::MatrixXd(n, out.nullity_dim);
  for (int c = 0; c < out.nullity_dim; ++c) out.nullity_basis_frame.col(c) = svd.matrixV().col(null_cols[c]);
  out.nullity_basis = fd.frame * out.nullity_basis_frame;
  return out;
}

inline NullityResult nullity_space(const ManifoldChart& chart, std::span<const double> p,
                                   double tol = tol::nullity_relative) {
  return nullity_from_frame(orthonormal_frame(chart, p), tol);
}

// max |R(X,Y,Z,W) - R(pi X, pi Y, pi Z, pi W)| over random frame-coordinate
// quadruples, pi the orthogonal projection onto the complement of the nullity space.
inline double curvature_projection_residual(const ManifoldChart& chart, std::span<const double> p, int samples = 50,
                                            std::uint64_t seed = 1, double tol = tol::nullity_relative) {
  OrthonormalFrameData fd = orthonormal_frame(chart, p);
  NullityResult nr = nullity_from_frame(fd, tol);
  const int n = fd.dimension();
  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - nr.nullity_basis_frame * nr.nullity_basis_frame.transpose();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto contract = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& w) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) s += fd.riemann_frame(i, j, k, l) * x[i] * y[j] * z[k] * w[l];
    return s;
  };
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd v[4];
    for (auto& x : v) {
      x.resize(n);
      for (int i = 0; i < n; ++i) x[i] = normal(rng);
    }
    double full = contract(v[0], v[1], v[2], v[3]);
    double projected = contract(proj * v[0], proj * v[1], proj * v[2], proj * v[3]);
    worst = std::max(worst, std::abs(full - projected));
  }
  return worst;
}

// Fixed-step classical RK4 on x'' = -Gamma(x)(x', x') over t in [0, 1].
inline Vec<double> geodesic_rk4(const ManifoldChart& chart, std::span<const double> p, std::span<const double> v,
                                int steps) {
  const int n = chart.dimension();
  if (steps < 1) throw InvalidArgument("exp_map needs at least one step");
  if (static_cast<int>(v.size()) != n) throw InvalidArgument("tangent vector has wrong dimension");
  for (double c : v)
    if (!std::isfinite(c)) throw InvalidArgument("tangent vector is not finite");
  chart.check_point(p);
  using State = Eigen::VectorXd;
  auto rhs = [&](const State& s) {
    Vec<double> x(s.data(), s.data() + n);
    if (!chart.contains(x)) throw DomainError("geodesic left the domain of chart '" + chart.name() + "'");
    Christoffel gamma = christoffel(chart, x);
    State ds(2 * n);
    for (int k = 0; k < n; ++k) {
      ds[k] = s[n + k];
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += gamma(k, i, j) * s[n + i] * s[n + j];
      ds[n + k] = -acc;
    }
    return ds;
  };
  State s(2 * n);
  for (int i = 0; i < n; ++i) {
    s[i] = p[i];
    s[n + i] = v[i];
  }
  const double h = 1.0 / steps;
  for (int step = 0; step < steps; ++step) {
    State k1 = rhs(s);
    State k2 = rhs(s + 0.5 * h * k1);
    State k3 = rhs(s + 0.5 * h * k2);
    State k4 = rhs(s + h * k3);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  Vec<double> out(s.data(), s.data() + n);
  if (!chart.contains(out)) throw DomainError("geodesic left the domain of chart '" + chart.name() + "'");
  return out;
}

// exp_p(v): closed form where the model provides one, RK4 otherwise.
inline Vec<double> exp_map(const ManifoldChart& chart, std::span<const double> p, std::span<const double> v,
                           int steps = 1000) {
  if (!chart.has_closed_exp()) return geodesic_rk4(chart, p, v, steps);
  chart.check_point(p);
  if (static_cast<int>(v.size()) != chart.dimension()) throw InvalidArgument("tangent vector has wrong dimension");
  Vec<double> out = chart.closed_exp<double>(p, v);
  if (!chart.contains(out)) throw DomainError("exp_map result outside chart domain");
  return out;
}

}  // namespace cgbkit
