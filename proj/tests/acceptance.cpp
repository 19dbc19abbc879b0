// Acceptance gate: one line per criterion, exit status 1 if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cgbkit/cgbkit.hpp"
#include "test_support.hpp"

using namespace cgbkit;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED[" << what << "]";
    }
  }
};

Vec<double> origin(int n) { return Vec<double>(static_cast<std::size_t>(n), 0.0); }

Vec<double> random_angles(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> colat(0.2, pi - 0.2);
  std::uniform_real_distribution<double> az(0.0, 2.0 * pi);
  Vec<double> u(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) u[j] = j + 1 < m ? colat(rng) : az(rng);
  return u;
}

bool verdict_passed(const GaussBonnetReport& r, const std::string& name) {
  for (const auto& v : r.verdicts)
    if (v.name == name) return v.status == VerdictStatus::pass;
  return false;
}

TheoremOptions theorem_order(int order) {
  TheoremOptions opt;
  opt.order = order;
  return opt;
}

// Reports reused by the decomposition-constant criterion.
std::vector<GaussBonnetReport> odd_reports;
std::vector<GaussBonnetReport> even_reports;
std::vector<GaussBonnetReport> three_reports;

void pfaffian_normalization(Outcome& o) {
  std::mt19937_64 rng(101);
  for (int k : {2, 4, 6}) {
    ManifoldChart s = models::round_sphere(k);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) worst = std::max(worst, std::abs(pf_scalar(orthonormal_frame(s, s.sample_point(rng))) - 1.0));
    o.detail << " S" << k << " max|Pf-1|=" << worst;
    o.require(worst < 1e-7, "S" + std::to_string(k));
  }
}

void pfaffian_methods(Outcome& o) {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int k : {2, 4, 6})
    for (int t = 0; t < 200; ++t) {
      TwoFormMatrix omega = cgbkit::testing::random_dyadic_skew(k, k + t % 3, rng);
      AlternatingForm naive = pfaffian_form(omega, PfaffianMethod::naive);
      worst = std::max(worst, cgbkit::testing::form_distance(naive, pfaffian_form(omega, PfaffianMethod::matching)));
      worst = std::max(worst, cgbkit::testing::form_distance(naive, pfaffian_form(omega, PfaffianMethod::subset_dp)));
    }
  o.detail << " max coefficient difference=" << worst;
  o.require(worst <= 1e-12, "method agreement");
  double slowest = 0.0;
  double agree = 0.0;
  for (int t = 0; t < 5; ++t) {
    TwoFormMatrix omega = cgbkit::testing::random_dyadic_skew(8, 8, rng);
    auto start = std::chrono::steady_clock::now();
    AlternatingForm dp = pfaffian_form(omega, PfaffianMethod::subset_dp);
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    agree = std::max(agree, cgbkit::testing::form_distance(dp, pfaffian_form(omega, PfaffianMethod::matching)));
  }
  o.detail << "; k=8 subset_dp slowest " << slowest << " s, vs matching " << agree;
  o.require(slowest < 1.0, "k=8 timing");
  o.require(agree <= 1e-12, "k=8 agreement");
}

void closed_cgb(Outcome& o) {
  for (int k : {2, 4}) {
    ManifoldChart s = models::round_sphere(k);
    const int order = k == 2 ? 12 : 6;
    Integral i = integrate([&](std::span<const double> u) { return pf_scalar(orthonormal_frame(s, u)); }, sphere_grid(k, order),
                           sphere_grid(k, 2 * order));
    const double chi = 2.0 * i.value / sphere_volume(k);
    o.detail << " S" << k << " chi=" << chi;
    o.require(std::abs(chi - 2.0) <= 1e-3, "S" + std::to_string(k));
  }
}

void boundary_cgb_flat(Outcome& o) {
  for (int k : {2, 4, 6}) {
    const int m = k - 1;
    HypersurfaceEmbedding ball = geodesic_sphere(models::euclidean(k), origin(k), 1.0);
    ManifoldChart induced = induced_chart(ball);
    const int order = m <= 2 ? 16 : (m == 3 ? 8 : 7);
    double max_diff = 0.0;
    auto tpf_integral = [&](const QuadratureGrid& grid) {
      auto pts = parallel_map<SurfacePoint>(grid.size(),
                                            [&](std::size_t i) { return evaluate_surface_point(ball, induced, grid.nodes[i]); });
      std::vector<double> f(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        f[i] = pts[i].integrand * pts[i].area;
        max_diff = std::max(max_diff, std::abs(pts[i].integrand - pts[i].gk));
      }
      return weighted_sum(grid, f);
    };
    const double coarse = tpf_integral(sphere_grid(m, order));
    const double fine = tpf_integral(sphere_grid(m, 2 * order));
    const double ratio = fine / sphere_volume(m);
    const double err = std::abs(fine - coarse) / sphere_volume(m);
    o.detail << " dB" << k << " ratio=" << ratio << " |TPf-GK|=" << max_diff;
    o.require(std::abs(ratio - 1.0) <= std::max(1e-4, 3.0 * err) && err <= 1e-4, "dB" + std::to_string(k) + " integral");
    o.require(max_diff <= 1e-9, "dB" + std::to_string(k) + " pointwise");
  }
  for (int k : {3, 4}) {
    const int m = k - 1;
    std::vector<double> axes(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) axes[i] = 1.0 + 0.5 * i / (k - 1);
    ManifoldChart flat = models::euclidean(k);
    HypersurfaceEmbedding ell = star_surface(flat, origin(k), RadiusProfile::ellipsoid(axes), sphere_grid(m, 12));
    const int order = m <= 2 ? 32 : 16;
    Integral g = integrate(
        [&](std::span<const double> u) {
          ShapeData s = shape_at(ell, u);
          return s.gauss_kronecker * std::sqrt(s.induced_metric.determinant()) / sphere_jacobian(u);
        },
        sphere_grid(m, order), sphere_grid(m, 2 * order));
    const double ratio = g.value / sphere_volume(m);
    o.detail << " ellipsoid" << k << " ratio=" << ratio;
    o.require(std::abs(ratio - 1.0) <= 1e-3, "ellipsoid" + std::to_string(k));
  }
}

void wedge_identity(Outcome& o) {
  std::mt19937_64 rng(105);
  for (int n : {4, 5, 6}) {
    ManifoldChart chart = models::h3_times_flat(n);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) worst = std::max(worst, lemma31_residual(orthonormal_frame(chart, chart.sample_point(rng))));
    o.detail << " n=" << n << " max=" << worst;
    o.require(worst <= 1e-9, "n=" + std::to_string(n));
  }
  ManifoldChart h4 = models::hyperbolic_ball(4);
  double least = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) least = std::min(least, lemma31_residual(orthonormal_frame(h4, h4.sample_point(rng))));
  o.detail << " H4 control min=" << least;
  o.require(least >= 0.9, "H4 control");
}

void nullity_index(Outcome& o) {
  std::mt19937_64 rng(106);
  auto check = [&](const std::string& label, const ManifoldChart& chart, int expected) {
    int lo = chart.dimension(), hi = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      NullityResult r = nullity_space(chart, chart.sample_point(rng));
      lo = std::min(lo, r.nullity_dim);
      hi = std::max(hi, r.nullity_dim);
      gap = std::min(gap, r.gap);
    }
    o.detail << " " << label << "=" << lo << (lo == hi ? "" : "..") << (lo == hi ? "" : std::to_string(hi));
    o.require(lo == expected && hi == expected, label + " dimension");
    o.require(gap >= 1e3, label + " gap");
  };
  for (int n : {3, 4, 5, 6}) check("R" + std::to_string(n), models::euclidean(n), n);
  for (int n : {4, 5, 6}) check("H3xR" + std::to_string(n - 3), models::h3_times_flat(n), n - 3);
  check("H4", models::hyperbolic_ball(4), 0);
}

void gauss_equation(Outcome& o) {
  std::mt19937_64 rng(107);
  auto check = [&](const std::string& label, const HypersurfaceEmbedding& emb) {
    ManifoldChart induced = induced_chart(emb);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) worst = std::max(worst, gauss_form_residual(emb, induced, random_angles(emb.dimension(), rng)).residual);
    o.detail << " " << label << "=" << worst;
    o.require(worst <= 1e-4, label);
  };
  for (int n : {3, 4}) {
    check("R" + std::to_string(n), geodesic_sphere(models::euclidean(n), origin(n), 1.0));
    check("H" + std::to_string(n), geodesic_sphere(models::hyperbolic_ball(n), origin(n), 1.0));
  }
  for (double r : {0.5, 1.0}) {
    std::ostringstream label;
    label << "H3xR(r=" << r << ")";
    check(label.str(), geodesic_sphere(models::h3_times_flat(4), origin(4), r));
  }
}

void theorem_odd(Outcome& o) {
  const double s4 = 8.0 * pi * pi / 3.0;
  for (double r : {0.25, 0.5, 1.0}) {
    GaussBonnetReport rep = verify_theorem(geodesic_sphere(models::h3_times_flat(5), origin(5), r), theorem_order(6));
    odd_reports.push_back(rep);
    o.detail << " r=" << r << " intPf/|S4|=" << rep.boundary_integral / s4 << " G/|S4|=" << rep.total_curvature / s4;
    o.require(verdict_passed(rep, "integral_pf_gamma"), "integral r=" + std::to_string(r));
    o.require(rep.min_gk_minus_integrand >= -1e-8, "pointwise r=" + std::to_string(r));
    o.require(verdict_passed(rep, "total_curvature_bound"), "bound r=" + std::to_string(r));
  }
  for (double r : {0.5, 1.0}) {
    GaussBonnetReport rep = verify_theorem(geodesic_sphere(models::hyperbolic_ball(3), origin(3), r), theorem_order(12));
    three_reports.push_back(rep);
    const double closed = std::pow(std::cosh(r), 2) * 4.0 * pi;
    o.detail << " H3 r=" << r << " G/closed=" << rep.total_curvature / closed;
    o.require(verdict_passed(rep, "integral_pf_gamma"), "H3 integral");
    o.require(rep.min_gk_minus_integrand >= -1e-8, "H3 pointwise");
    o.require(rep.total_curvature >= rep.boundary_integral - 1e-8, "H3 chain");
    o.require(std::abs(rep.total_curvature / closed - 1.0) <= 5e-3, "H3 closed form");
  }
}

void theorem_even(Outcome& o) {
  const double s3 = 2.0 * pi * pi;
  ManifoldChart amb = models::h3_times_flat(4);
  std::vector<std::pair<std::string, HypersurfaceEmbedding>> surfaces;
  for (double r : {0.25, 0.5, 1.0}) surfaces.emplace_back("r=" + std::to_string(r).substr(0, 4), geodesic_sphere(amb, origin(4), r));
  surfaces.emplace_back("perturbed", perturbed_sphere(geodesic_sphere(amb, origin(4), 1.0), 0.05, 2, sphere_grid(3, 16)));
  for (const auto& [label, emb] : surfaces) {
    GaussBonnetReport rep = verify_theorem(emb, theorem_order(8));
    even_reports.push_back(rep);
    o.detail << " " << label << " max|PfC|=" << rep.max_abs_pf_interior << " intTPf/|S3|=" << rep.boundary_integral / s3;
    o.require(rep.max_abs_pf_interior <= 1e-9, label + " interior");
    o.require(verdict_passed(rep, "integral_tpf"), label + " integral");
    o.require(rep.min_gk_minus_integrand >= -1e-8, label + " pointwise");
    o.require(verdict_passed(rep, "total_curvature_bound"), label + " bound");
  }
}

void two_dimensional(Outcome& o) {
  for (double r : {0.5, 1.0}) {
    TheoremOptions opt = theorem_order(16);
    GaussBonnetReport rep = verify_theorem(geodesic_sphere(models::hyperbolic_ball(2), origin(2), r), opt);
    const double area_term = -2.0 * pi * (std::cosh(r) - 1.0);
    const double boundary_term = (1.0 / std::tanh(r)) * 2.0 * pi * std::sinh(r);
    const double sum = rep.interior_integral + rep.total_curvature;
    o.detail << " r=" << r << " sum-2pi=" << sum - 2.0 * pi;
    o.require(std::abs(sum - 2.0 * pi) <= 1e-6, "balance");
    o.require(std::abs(rep.interior_integral - area_term) <= 1e-6, "area term");
    o.require(std::abs(rep.total_curvature - boundary_term) <= 1e-6, "boundary term");
    o.require(std::abs(area_term + boundary_term - 2.0 * pi) <= 1e-12, "closed forms");
  }
}

void decomposition_constants(Outcome& o) {
  auto check = [&](const std::string& label, const std::vector<GaussBonnetReport>& reps) {
    for (const auto& r : reps) {
      o.detail << " " << label << " c=" << r.fit.c << " spread=" << r.fit.spread;
      o.require(r.fit.defined && r.fit.c > 0.0, label + " positive");
      o.require(r.fit.spread <= 1e-3, label + " spread");
    }
  };
  check("n3", three_reports);
  check("n4", even_reports);
  check("n5", odd_reports);
  for (const auto& r : three_reports) o.require(std::abs(r.fit.c - 1.0) <= 1e-6, "n3 oracle");
}

void isoperimetric(Outcome& o) {
  IsoperimetricOptions opt;
  opt.order = 8;
  for (int n : {2, 3, 4}) {
    IsoperimetricReport e = verify_isoperimetric(models::euclidean(n), origin(n), 1.0, opt);
    o.detail << " R" << n << " deficit=" << e.deficit;
    o.require(std::abs(e.deficit) <= 1e-8, "R" + std::to_string(n));
  }
  auto family = [&](const std::string& label, const ManifoldChart& chart) {
    double previous = std::numeric_limits<double>::infinity();
    for (double r : {1.0, 0.5, 0.25, 0.125}) {
      IsoperimetricReport rep = verify_isoperimetric(chart, origin(chart.dimension()), r, opt);
      o.detail << " " << label << "(" << r << ")=" << rep.deficit;
      o.require(rep.verdict.status == VerdictStatus::pass && rep.deficit > 0.0, label + " ratio");
      o.require(rep.deficit < previous, label + " monotone");
      previous = rep.deficit;
    }
  };
  family("H4", models::hyperbolic_ball(4));
  family("H3xR", models::h3_times_flat(4));
}

void frame_independence(Outcome& o) {
  std::mt19937_64 rng(113);
  ManifoldChart mixed = models::product({models::round_sphere(2), models::hyperbolic_ball(2)});
  Vec<double> p = mixed.sample_point(rng);
  CurvatureData curv = riemann(mixed, p);
  Eigen::MatrixXd frame = orthonormal_frame(mixed, p).frame;
  const double pf0 = pf_scalar(frame_data(curv, frame));
  double pf_spread = 0.0;
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd g = cgbkit::testing::random_rotation(4, rng);
    pf_spread = std::max(pf_spread, std::abs(pf_scalar(frame_data(curv, frame * g)) - pf0));
  }
  o.detail << " Pf=" << pf0 << " spread=" << pf_spread;
  o.require(pf_spread <= 1e-8, "Pf");

  HypersurfaceEmbedding emb =
      perturbed_sphere(geodesic_sphere(models::h3_times_flat(4), origin(4), 1.0), 0.05, 2, sphere_grid(3, 12));
  ShapeData shape = shape_at(emb, random_angles(3, rng));
  CurvatureData amb = riemann(emb.ambient(), shape.point);
  const double tpf0 = tpf_scalar(shape, ambient_frame_on_surface(emb, shape));
  Eigen::MatrixXd base = shape.ambient_frame();
  Eigen::MatrixXd a = shape.principal_curvatures.asDiagonal();
  double tpf_spread = 0.0;
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(4, 4);
    g.topLeftCorner(3, 3) = cgbkit::testing::random_rotation(3, rng);
    OrthonormalFrameData fd = frame_data(amb, base * g);
    Eigen::MatrixXd rotated = g.topLeftCorner(3, 3).transpose() * a * g.topLeftCorner(3, 3);
    tpf_spread = std::max(tpf_spread, std::abs(tpf_scalar(rotated, curvature_forms(fd.riemann_frame, 3)) - tpf0));
  }
  o.detail << " TPf=" << tpf0 << " spread=" << tpf_spread;
  o.require(tpf_spread <= 1e-8, "TPf");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"pfaffian normalization", pfaffian_normalization},
      {"pfaffian method equivalence", pfaffian_methods},
      {"closed Chern-Gauss-Bonnet", closed_cgb},
      {"boundary Chern-Gauss-Bonnet, flat", boundary_cgb_flat},
      {"curvature wedge identity", wedge_identity},
      {"nullity index", nullity_index},
      {"Gauss equation", gauss_equation},
      {"total curvature, odd n", theorem_odd},
      {"total curvature, even n", theorem_even},
      {"two-dimensional case", two_dimensional},
      {"decomposition constants", decomposition_constants},
      {"isoperimetric", isoperimetric},
      {"frame independence", frame_independence},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("[%s] %2zu %s (%.1f s):%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
