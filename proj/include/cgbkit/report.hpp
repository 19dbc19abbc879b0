#pragma once

// Batch runner behind the cgbkit command-line tool: YAML run configs, suite
// execution and the report.jsonl / summary.csv writers. Needs yaml-cpp and
// nlohmann/json on top of the core headers.

#include <yaml-cpp/yaml.h>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cgbkit/cgbkit.hpp"

namespace cgbkit::report {

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"normalization", "cgb_closed",  "cgb_boundary",  "lemma31",
                                              "gauss_equation", "theorem",    "isoperimetric", "nullity"};
  return names;
}

inline constexpr int kMaxAmbientDimension = 7;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }

  std::string diagnostic(const std::string& source) const {
    std::ostringstream os;
    os << source;
    if (line_ > 0) os << ':' << line_;
    os << ": ";
    if (!field_.empty()) os << "field '" << field_ << "': ";
    os << what();
    return os.str();
  }

 private:
  std::string field_;
  int line_;
};

struct ChartSpec {
  std::string model;
  int dimension = 0;
  double curvature = -1.0;
  double radius = 1.0;
  std::vector<ChartSpec> factors;
  int line = 0;
};

struct SurfaceSpec {
  std::string type;
  double radius = 1.0;
  double amplitude = 0.0;
  int degree = 2;
  std::vector<double> semi_axes;
  std::vector<double> center;
  int line = 0;

  std::string label() const {
    std::ostringstream os;
    os << type;
    if (type == "ellipsoid") {
      os << '(';
      for (std::size_t i = 0; i < semi_axes.size(); ++i) os << (i ? "," : "") << semi_axes[i];
      os << ')';
    } else {
      os << "(r=" << radius;
      if (type == "perturbed_sphere") os << ",eps=" << amplitude << ",l=" << degree;
      os << ')';
    }
    return os.str();
  }
};

struct Tolerances {
  double integral_relative = tol::integral_relative;
  double pointwise_slack = tol::pointwise_slack;
  double convexity = tol::convexity;
  double normalization = 1e-7;
  double cgb_closed = 1e-3;
  double cgb_boundary = 1e-4;
  double tpf_gk = 1e-9;
  double ellipsoid = 1e-3;
  double lemma31 = 1e-9;
  double gauss_equation = 1e-4;
  double interior_pf = 1e-9;
  double fit_spread = 1e-3;
  double nullity_relative = tol::nullity_relative;
  double nullity_gap = 1e3;
  double isoperimetric = 1e-8;
};

struct RunConfig {
  std::string source = "<config>";
  std::uint64_t config_hash = 0;
  std::optional<ChartSpec> ambient;
  std::vector<SurfaceSpec> surfaces;
  std::vector<std::string> suites;
  Tolerances tolerances;
  int order = 0;  // 0: per-suite default
  int radial_order = 16;
  int points = 20;
  std::uint64_t seed = 1;
  std::string out_dir = "cgbkit-out";
  std::string format = "both";
  std::vector<int> normalization_dimensions{2, 4, 6};
  std::vector<int> closed_dimensions{2, 4};
  std::vector<int> boundary_dimensions{2, 4, 6};
  std::optional<int> expected_nullity;
};

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

namespace detail {

inline int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

inline void check_keys(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!map.IsMap()) throw ConfigError(path, line_of(map), "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(path.empty() ? key : path + "." + key, line_of(kv.first), "unknown field");
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError(field, line_of(node), "expected a scalar value");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>)
      throw ConfigError(field, line_of(node), "expected an integer, got '" + node.Scalar() + "'");
    else if constexpr (std::is_floating_point_v<T>)
      throw ConfigError(field, line_of(node), "expected a number, got '" + node.Scalar() + "'");
    else
      throw ConfigError(field, line_of(node), "invalid value '" + node.Scalar() + "'");
  }
}

template <class T>
std::vector<T> sequence(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ConfigError(field, line_of(node), "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(scalar<T>(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

template <class T>
void optional_scalar(const YAML::Node& map, const char* key, const std::string& path, T& target) {
  if (const YAML::Node n = map[key]) target = scalar<T>(n, path.empty() ? key : path + "." + key);
}

inline void check_dimension(int dim, const std::string& field, int line) {
  if (dim > kMaxAmbientDimension)
    throw ConfigError(field, line,
                      "dimension exceeds desk-scale guard (n <= " + std::to_string(kMaxAmbientDimension) + ", got " +
                          std::to_string(dim) + ")");
  if (dim < 1) throw ConfigError(field, line, "dimension must be positive");
}

inline const std::vector<std::string>& chart_models() {
  static const std::vector<std::string> m{"euclidean",   "hyperbolic", "hyperbolic_halfspace", "hyperbolic_polar",
                                          "sphere",      "product",    "h3_times_flat"};
  return m;
}

inline ChartSpec parse_chart(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"model", "dimension", "curvature", "radius", "factors"});
  ChartSpec spec;
  spec.line = line_of(node);
  if (!node["model"]) throw ConfigError(path + ".model", spec.line, "missing required field");
  spec.model = scalar<std::string>(node["model"], path + ".model");
  const auto& models = chart_models();
  if (std::find(models.begin(), models.end(), spec.model) == models.end())
    throw ConfigError(path + ".model", line_of(node["model"]), "unknown model '" + spec.model + "'");
  optional_scalar(node, "curvature", path, spec.curvature);
  optional_scalar(node, "radius", path, spec.radius);
  if (spec.model == "product") {
    if (!node["factors"]) throw ConfigError(path + ".factors", spec.line, "product model needs factors");
    const YAML::Node f = node["factors"];
    if (!f.IsSequence() || f.size() == 0) throw ConfigError(path + ".factors", line_of(f), "expected a non-empty list");
    int total = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      spec.factors.push_back(parse_chart(f[i], path + ".factors[" + std::to_string(i) + "]"));
      total += spec.factors.back().dimension;
    }
    if (node["dimension"]) {
      spec.dimension = scalar<int>(node["dimension"], path + ".dimension");
      check_dimension(spec.dimension, path + ".dimension", line_of(node["dimension"]));
      if (spec.dimension != total)
        throw ConfigError(path + ".dimension", line_of(node["dimension"]),
                          "product dimension " + std::to_string(spec.dimension) + " does not match factor total " +
                              std::to_string(total));
    }
    spec.dimension = total;
    check_dimension(spec.dimension, path + ".factors", spec.line);
  } else {
    if (node["factors"]) throw ConfigError(path + ".factors", line_of(node["factors"]), "only product models take factors");
    if (!node["dimension"]) throw ConfigError(path + ".dimension", spec.line, "missing required field");
    spec.dimension = scalar<int>(node["dimension"], path + ".dimension");
    check_dimension(spec.dimension, path + ".dimension", line_of(node["dimension"]));
  }
  const bool hyperbolic = spec.model.rfind("hyperbolic", 0) == 0 || spec.model == "h3_times_flat";
  if (hyperbolic && !(spec.curvature < 0.0))
    throw ConfigError(path + ".curvature", spec.line, "hyperbolic curvature must be negative");
  if (spec.model == "sphere" && !(spec.radius > 0.0))
    throw ConfigError(path + ".radius", spec.line, "sphere radius must be positive");
  if (spec.model == "h3_times_flat" && spec.dimension < 3)
    throw ConfigError(path + ".dimension", spec.line, "h3_times_flat needs dimension >= 3");
  if (spec.model == "hyperbolic_polar" && spec.dimension < 2)
    throw ConfigError(path + ".dimension", spec.line, "polar chart needs dimension >= 2");
  return spec;
}

inline SurfaceSpec parse_surface(const YAML::Node& node, const std::string& path, int n) {
  check_keys(node, path, {"type", "radius", "amplitude", "degree", "semi_axes", "center"});
  SurfaceSpec s;
  s.line = line_of(node);
  if (!node["type"]) throw ConfigError(path + ".type", s.line, "missing required field");
  s.type = scalar<std::string>(node["type"], path + ".type");
  if (s.type != "geodesic_sphere" && s.type != "perturbed_sphere" && s.type != "ellipsoid")
    throw ConfigError(path + ".type", line_of(node["type"]), "unknown surface type '" + s.type + "'");
  optional_scalar(node, "radius", path, s.radius);
  optional_scalar(node, "amplitude", path, s.amplitude);
  optional_scalar(node, "degree", path, s.degree);
  if (node["semi_axes"]) s.semi_axes = sequence<double>(node["semi_axes"], path + ".semi_axes");
  if (node["center"]) s.center = sequence<double>(node["center"], path + ".center");
  if (!(s.radius > 0.0)) throw ConfigError(path + ".radius", s.line, "radius must be positive");
  if (s.type == "perturbed_sphere" && (s.degree < 1 || s.degree > 6))
    throw ConfigError(path + ".degree", s.line, "perturbation degree must be in [1, 6]");
  if (s.type == "ellipsoid") {
    if (static_cast<int>(s.semi_axes.size()) != n)
      throw ConfigError(path + ".semi_axes", s.line, "ellipsoid needs one semi-axis per ambient dimension");
    for (double a : s.semi_axes)
      if (!(a > 0.0)) throw ConfigError(path + ".semi_axes", s.line, "semi-axes must be positive");
  }
  if (!s.center.empty() && static_cast<int>(s.center.size()) != n)
    throw ConfigError(path + ".center", s.line, "center dimension does not match the ambient dimension");
  return s;
}

inline void positive(double v, const std::string& field, int line) {
  if (!(v > 0.0)) throw ConfigError(field, line, "tolerance values must be positive");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, "YAML syntax error: " + e.msg);
  }
  RunConfig cfg;
  cfg.source = source;
  cfg.config_hash = fnv1a(text);
  if (!root || root.IsNull()) throw ConfigError("", 0, "empty config");
  check_keys(root, "", {"ambient", "surfaces", "suites", "tolerances", "grid", "sampling", "seed", "output", "dimensions",
                        "nullity"});
  if (root["ambient"]) cfg.ambient = parse_chart(root["ambient"], "ambient");
  if (const YAML::Node s = root["surfaces"]) {
    if (!cfg.ambient) throw ConfigError("surfaces", line_of(s), "surfaces need an ambient chart");
    if (!s.IsSequence()) throw ConfigError("surfaces", line_of(s), "expected a list");
    for (std::size_t i = 0; i < s.size(); ++i)
      cfg.surfaces.push_back(parse_surface(s[i], "surfaces[" + std::to_string(i) + "]", cfg.ambient->dimension));
  }
  if (const YAML::Node s = root["suites"]) {
    cfg.suites = sequence<std::string>(s, "suites");
    for (std::size_t i = 0; i < cfg.suites.size(); ++i) {
      const auto& names = suite_names();
      if (std::find(names.begin(), names.end(), cfg.suites[i]) == names.end())
        throw ConfigError("suites[" + std::to_string(i) + "]", line_of(s[i]), "unknown suite '" + cfg.suites[i] + "'");
    }
  }
  if (const YAML::Node t = root["tolerances"]) {
    check_keys(t, "tolerances",
               {"integral_relative", "pointwise_slack", "convexity", "normalization", "cgb_closed", "cgb_boundary",
                "tpf_gk", "ellipsoid", "lemma31", "gauss_equation", "interior_pf", "fit_spread", "nullity_relative",
                "nullity_gap", "isoperimetric"});
    auto& tl = cfg.tolerances;
    const std::pair<const char*, double*> fields[] = {
        {"integral_relative", &tl.integral_relative}, {"pointwise_slack", &tl.pointwise_slack},
        {"convexity", &tl.convexity},                 {"normalization", &tl.normalization},
        {"cgb_closed", &tl.cgb_closed},               {"cgb_boundary", &tl.cgb_boundary},
        {"tpf_gk", &tl.tpf_gk},                       {"ellipsoid", &tl.ellipsoid},
        {"lemma31", &tl.lemma31},                     {"gauss_equation", &tl.gauss_equation},
        {"interior_pf", &tl.interior_pf},             {"fit_spread", &tl.fit_spread},
        {"nullity_relative", &tl.nullity_relative},   {"nullity_gap", &tl.nullity_gap},
        {"isoperimetric", &tl.isoperimetric}};
    for (const auto& [key, ptr] : fields)
      if (const YAML::Node v = t[key]) {
        *ptr = scalar<double>(v, std::string("tolerances.") + key);
        positive(*ptr, std::string("tolerances.") + key, line_of(v));
      }
    if (tl.nullity_relative >= 1.0)
      throw ConfigError("tolerances.nullity_relative", line_of(t), "relative nullity tolerance must be below 1");
  }
  if (const YAML::Node g = root["grid"]) {
    check_keys(g, "grid", {"order", "radial_order"});
    optional_scalar(g, "order", "grid", cfg.order);
    optional_scalar(g, "radial_order", "grid", cfg.radial_order);
    if (cfg.order != 0 && cfg.order < 4) throw ConfigError("grid.order", line_of(g), "order must be >= 4 (or 0 for defaults)");
    if (cfg.radial_order < 2) throw ConfigError("grid.radial_order", line_of(g), "radial order must be >= 2");
  }
  if (const YAML::Node s = root["sampling"]) {
    check_keys(s, "sampling", {"points"});
    optional_scalar(s, "points", "sampling", cfg.points);
    if (cfg.points < 1) throw ConfigError("sampling.points", line_of(s), "points must be positive");
  }
  if (const YAML::Node s = root["seed"]) cfg.seed = scalar<std::uint64_t>(s, "seed");
  if (const YAML::Node o = root["output"]) {
    check_keys(o, "output", {"dir", "format"});
    optional_scalar(o, "dir", "output", cfg.out_dir);
    optional_scalar(o, "format", "output", cfg.format);
    if (cfg.format != "both" && cfg.format != "jsonl" && cfg.format != "csv")
      throw ConfigError("output.format", line_of(o), "format must be one of both, jsonl, csv");
  }
  if (const YAML::Node d = root["dimensions"]) {
    check_keys(d, "dimensions", {"normalization", "cgb_closed", "cgb_boundary"});
    auto read = [&](const char* key, std::vector<int>& target, int lo, int hi) {
      if (const YAML::Node v = d[key]) {
        target = sequence<int>(v, std::string("dimensions.") + key);
        for (int k : target)
          if (k < lo || k > hi || k % 2 != 0)
            throw ConfigError(std::string("dimensions.") + key, line_of(v),
                              "dimensions must be even and in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
    };
    read("normalization", cfg.normalization_dimensions, 2, 6);
    read("cgb_closed", cfg.closed_dimensions, 2, 6);
    read("cgb_boundary", cfg.boundary_dimensions, 2, kMaxAmbientDimension);
  }
  if (const YAML::Node nl = root["nullity"]) {
    check_keys(nl, "nullity", {"expected"});
    if (nl["expected"]) cfg.expected_nullity = scalar<int>(nl["expected"], "nullity.expected");
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

inline ManifoldChart build_chart(const ChartSpec& spec) {
  if (spec.model == "euclidean") return models::euclidean(spec.dimension);
  if (spec.model == "hyperbolic") return models::hyperbolic_ball(spec.dimension, spec.curvature);
  if (spec.model == "hyperbolic_halfspace") return models::hyperbolic_halfspace(spec.dimension, spec.curvature);
  if (spec.model == "hyperbolic_polar") return models::hyperbolic_polar(spec.dimension, spec.curvature);
  if (spec.model == "sphere") return models::round_sphere(spec.dimension, spec.radius);
  if (spec.model == "h3_times_flat") return models::h3_times_flat(spec.dimension, spec.curvature);
  std::vector<ManifoldChart> factors;
  for (const auto& f : spec.factors) factors.push_back(build_chart(f));
  return models::product(std::move(factors));
}

inline Vec<double> default_center(const ManifoldChart& chart) {
  Vec<double> c(static_cast<std::size_t>(chart.dimension()), 0.0);
  if (chart.tag() == ModelTag::hyperbolic_halfspace) c.back() = 1.0;
  return c;
}

inline HypersurfaceEmbedding build_surface(const ManifoldChart& chart, const SurfaceSpec& spec, double convexity) {
  Vec<double> center = spec.center.empty() ? default_center(chart) : Vec<double>(spec.center);
  const int m = chart.dimension() - 1;
  QuadratureGrid check = sphere_grid(std::max(1, m), m <= 2 ? 24 : (m == 3 ? 12 : 6));
  if (spec.type == "geodesic_sphere") return geodesic_sphere(chart, center, spec.radius);
  if (spec.type == "perturbed_sphere")
    return perturbed_sphere(geodesic_sphere(chart, center, spec.radius), spec.amplitude, spec.degree, check, convexity);
  return star_surface(chart, center, RadiusProfile::ellipsoid(spec.semi_axes), check, convexity);
}

// ---------------------------------------------------------------------------
// Records

struct Quantity {
  std::string name;
  double value;
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;
};

struct VerdictRecord {
  std::string suite;
  std::string subject;
  std::vector<Quantity> quantities;
  std::vector<Verdict> checks;
  std::vector<std::string> notes;
  std::string error;
  Provenance provenance;

  void add(std::string name, double value) { quantities.push_back({std::move(name), value}); }

  VerdictStatus verdict() const {
    if (!error.empty()) return VerdictStatus::fail;
    bool inconclusive = false;
    for (const auto& c : checks) {
      if (c.status == VerdictStatus::fail) return VerdictStatus::fail;
      inconclusive = inconclusive || c.status == VerdictStatus::inconclusive;
    }
    return inconclusive ? VerdictStatus::inconclusive : VerdictStatus::pass;
  }
  double tolerance() const {
    double t = 0.0;
    for (const auto& c : checks) t = std::max(t, c.margin);
    return t;
  }
  double error_estimate() const {
    double e = 0.0;
    for (const auto& c : checks) e = std::max(e, c.error_estimate);
    return e;
  }
};

inline nlohmann::ordered_json to_json(const VerdictRecord& r, bool include_timestamp = true) {
  nlohmann::ordered_json j;
  j["suite"] = r.suite;
  j["subject"] = r.subject;
  j["verdict"] = to_string(r.verdict());
  j["tolerance"] = r.tolerance();
  j["error_estimate"] = r.error_estimate();
  nlohmann::ordered_json q = nlohmann::ordered_json::object();
  for (const auto& x : r.quantities) q[x.name] = x.value;
  j["quantities"] = q;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["status"] = to_string(c.status);
    cj["value"] = c.value;
    cj["target"] = c.target;
    cj["margin"] = c.margin;
    cj["error_estimate"] = c.error_estimate;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["notes"] = r.notes;
  if (!r.error.empty()) j["error"] = r.error;
  nlohmann::ordered_json p;
  p["config_hash"] = r.provenance.config_hash;
  p["seed"] = r.provenance.seed;
  if (include_timestamp) p["timestamp"] = r.provenance.timestamp;
  j["provenance"] = p;
  return j;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline constexpr const char* kCsvHeader = "suite,subject,check,status,value,target,margin,error_estimate";

inline void write_csv(std::ostream& os, const std::vector<VerdictRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    if (r.checks.empty())
      os << csv_field(r.suite) << ',' << csv_field(r.subject) << ",error," << to_string(r.verdict()) << ",,,,\n";
    for (const auto& c : r.checks)
      os << csv_field(r.suite) << ',' << csv_field(r.subject) << ',' << csv_field(c.name) << ',' << to_string(c.status)
         << ',' << format_double(c.value) << ',' << format_double(c.target) << ',' << format_double(c.margin) << ','
         << format_double(c.error_estimate) << '\n';
  }
}

inline void write_jsonl(std::ostream& os, const std::vector<VerdictRecord>& records) {
  for (const auto& r : records) os << to_json(r).dump() << '\n';
}

inline void print_table(std::ostream& os, const std::vector<VerdictRecord>& records) {
  for (const auto& r : records) {
    os << "[" << to_string(r.verdict()) << "] " << r.suite << " / " << r.subject << '\n';
    for (const auto& c : r.checks)
      os << "    " << std::left << std::setw(28) << c.name << std::setw(13) << to_string(c.status) << " value "
         << std::setprecision(10) << c.value << "  target " << c.target << "  margin " << std::setprecision(3) << c.margin
         << '\n';
    for (const auto& n : r.notes) os << "    note: " << n << '\n';
    if (!r.error.empty()) os << "    error: " << r.error << '\n';
  }
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteContext {
  const RunConfig& config;
  std::optional<ManifoldChart> chart;
  std::uint64_t seed;
};

namespace detail {

inline std::string point_text(std::span<const double> p) {
  std::ostringstream os;
  os << '(' << std::setprecision(17);
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

// Runs `body`; any library error marks the record failed with its diagnostic.
template <class F>
void guarded(VerdictRecord& rec, F&& body) {
  try {
    body();
  } catch (const ConvexityViolation& e) {
    rec.error = std::string(e.what()) + " at parameter point " + point_text(e.point);
    rec.add("min_principal_curvature", e.min_principal_curvature);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
}

inline int suite_order(const RunConfig& cfg, int fallback) { return cfg.order > 0 ? cfg.order : fallback; }

inline Vec<double> random_angles(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> colat(0.2, std::numbers::pi - 0.2);
  std::uniform_real_distribution<double> azimuth(0.0, 2.0 * std::numbers::pi);
  Vec<double> a(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) a[j] = (j + 1 == m) ? azimuth(rng) : colat(rng);
  return a;
}

}  // namespace detail

inline std::vector<VerdictRecord> suite_normalization(const SuiteContext& ctx) {
  std::vector<VerdictRecord> out;
  std::mt19937_64 rng(ctx.seed);
  for (int k : ctx.config.normalization_dimensions) {
    VerdictRecord rec{"normalization", "S" + std::to_string(k)};
    detail::guarded(rec, [&] {
      ManifoldChart sphere = models::round_sphere(k);
      double worst = 0.0;
      for (int i = 0; i < ctx.config.points; ++i) {
        Vec<double> p = sphere.sample_point(rng);
        worst = std::max(worst, std::abs(pf_scalar(orthonormal_frame(sphere, p)) - 1.0));
      }
      rec.add("points", ctx.config.points);
      rec.add("max_abs_pf_minus_one", worst);
      rec.checks.push_back(upper_bound_verdict("pf_equals_one", worst, 0.0, ctx.config.tolerances.normalization));
    });
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<VerdictRecord> suite_cgb_closed(const SuiteContext& ctx) {
  std::vector<VerdictRecord> out;
  for (int k : ctx.config.closed_dimensions) {
    VerdictRecord rec{"cgb_closed", "S" + std::to_string(k)};
    detail::guarded(rec, [&] {
      ManifoldChart sphere = models::round_sphere(k);
      const int order = detail::suite_order(ctx.config, k <= 2 ? 12 : 6);
      NodeFunction pf = [&](std::span<const double> u) { return pf_scalar(orthonormal_frame(sphere, u)); };
      Integral i = integrate(pf, sphere_grid(k, order), sphere_grid(k, 2 * order));
      const double scale = 2.0 / sphere_volume(k);
      rec.add("order", order);
      rec.add("integral_pf", i.value);
      rec.add("integral_pf_error", i.error_estimate);
      rec.add("euler_estimate", scale * i.value);
      rec.checks.push_back(
          integral_verdict("euler_characteristic", scale * i.value, 2.0, scale * i.error_estimate, ctx.config.tolerances.cgb_closed));
    });
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<VerdictRecord> suite_cgb_boundary(const SuiteContext& ctx) {
  std::vector<VerdictRecord> out;
  const auto& tl = ctx.config.tolerances;
  for (int k : ctx.config.boundary_dimensions) {
    VerdictRecord rec{"cgb_boundary", "dB" + std::to_string(k)};
    detail::guarded(rec, [&] {
      const int m = k - 1;
      ManifoldChart flat = models::euclidean(k);
      HypersurfaceEmbedding ball = geodesic_sphere(flat, Vec<double>(static_cast<std::size_t>(k), 0.0), 1.0);
      const int order = detail::suite_order(ctx.config, m <= 2 ? 16 : (m == 3 ? 8 : 7));
      QuadratureGrid coarse = sphere_grid(m, order);
      QuadratureGrid fine = sphere_grid(m, 2 * order);
      ManifoldChart induced = induced_chart(ball);
      double max_diff = 0.0;
      auto tpf_integral = [&](const QuadratureGrid& grid) {
        std::vector<SurfacePoint> pts = parallel_map<SurfacePoint>(
            grid.size(), [&](std::size_t i) { return evaluate_surface_point(ball, induced, grid.nodes[i]); });
        std::vector<double> f(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
          f[i] = pts[i].integrand * pts[i].area;
          max_diff = std::max(max_diff, std::abs(pts[i].integrand - pts[i].gk));
        }
        return weighted_sum(grid, f);
      };
      const double c = tpf_integral(coarse);
      const double f = tpf_integral(fine);
      const double vol = sphere_volume(m);
      rec.add("order", order);
      rec.add("integral_tpf", f);
      rec.add("integral_tpf_error", std::abs(f - c));
      rec.add("euler_estimate", f / vol);
      rec.add("max_abs_tpf_minus_gk", max_diff);
      rec.checks.push_back(integral_verdict("euler_characteristic", f / vol, 1.0, std::abs(f - c) / vol, tl.cgb_boundary));
      rec.checks.push_back(upper_bound_verdict("tpf_equals_gk", max_diff, 0.0, tl.tpf_gk));
      if (k <= 4) {
        std::vector<double> axes(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) axes[i] = 1.0 + 0.5 * i / std::max(1, k - 1);
        HypersurfaceEmbedding ell = star_surface(flat, Vec<double>(static_cast<std::size_t>(k), 0.0),
                                                 RadiusProfile::ellipsoid(axes), sphere_grid(m, 12), tl.convexity);
        const int eo = detail::suite_order(ctx.config, m <= 2 ? 32 : 16);
        NodeFunction gk = [&](std::span<const double> u) {
          ShapeData s = shape_at(ell, u);
          return s.gauss_kronecker * std::sqrt(s.induced_metric.determinant()) / sphere_jacobian(u);
        };
        Integral g = integrate(gk, sphere_grid(m, eo), sphere_grid(m, 2 * eo));
        rec.add("ellipsoid_order", eo);
        rec.add("ellipsoid_total_curvature", g.value);
        rec.add("ellipsoid_total_curvature_error", g.error_estimate);
        rec.checks.push_back(
            integral_verdict("ellipsoid_gauss_map_degree", g.value / vol, 1.0, g.error_estimate / vol, tl.ellipsoid));
      }
    });
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<VerdictRecord> suite_lemma31(const SuiteContext& ctx) {
  VerdictRecord rec{"lemma31", ctx.chart->name()};
  detail::guarded(rec, [&] {
    const ManifoldChart& chart = *ctx.chart;
    const int n = chart.dimension();
    if (n < 4) throw InvalidArgument("wedge identity check needs ambient dimension >= 4");
    std::mt19937_64 rng(ctx.seed);
    double worst = 0.0;
    int min_nullity = n;
    for (int i = 0; i < ctx.config.points; ++i) {
      Vec<double> p = chart.sample_point(rng);
      OrthonormalFrameData fd = orthonormal_frame(chart, p);
      worst = std::max(worst, lemma31_residual(fd));
      min_nullity = std::min(min_nullity, nullity_from_frame(fd, ctx.config.tolerances.nullity_relative).nullity_dim);
    }
    rec.add("points", ctx.config.points);
    rec.add("max_wedge_residual", worst);
    rec.add("min_nullity", min_nullity);
    if (min_nullity >= n - 3) {
      rec.checks.push_back(upper_bound_verdict("wedge_residual", worst, 0.0, ctx.config.tolerances.lemma31));
    } else {
      Verdict v{"wedge_residual", VerdictStatus::inconclusive, worst, 0.0, ctx.config.tolerances.lemma31, 0.0};
      rec.checks.push_back(v);
      rec.notes.push_back("sampled nullity below n-3; the wedge identity is not implied here");
    }
  });
  return {rec};
}

inline std::vector<VerdictRecord> suite_nullity(const SuiteContext& ctx) {
  VerdictRecord rec{"nullity", ctx.chart->name()};
  detail::guarded(rec, [&] {
    const ManifoldChart& chart = *ctx.chart;
    std::mt19937_64 rng(ctx.seed);
    int lo = chart.dimension();
    int hi = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ctx.config.points; ++i) {
      Vec<double> p = chart.sample_point(rng);
      NullityResult r = nullity_space(chart, p, ctx.config.tolerances.nullity_relative);
      lo = std::min(lo, r.nullity_dim);
      hi = std::max(hi, r.nullity_dim);
      min_gap = std::min(min_gap, r.gap);
    }
    rec.add("points", ctx.config.points);
    rec.add("nullity_index", lo);
    rec.add("max_nullity_dim", hi);
    rec.add("min_singular_value_gap", min_gap);
    rec.notes.push_back("nullity index is the minimum over sampled points");
    rec.checks.push_back(lower_bound_verdict("singular_value_gap", min_gap, ctx.config.tolerances.nullity_gap, 0.0));
    if (ctx.config.expected_nullity) {
      Verdict v{"nullity_matches_expected", lo == hi && lo == *ctx.config.expected_nullity ? VerdictStatus::pass
                                                                                           : VerdictStatus::fail,
                static_cast<double>(lo), static_cast<double>(*ctx.config.expected_nullity), 0.0, 0.0};
      rec.checks.push_back(v);
    }
  });
  return {rec};
}

inline std::vector<VerdictRecord> suite_gauss_equation(const SuiteContext& ctx) {
  std::vector<VerdictRecord> out;
  for (const auto& spec : ctx.config.surfaces) {
    VerdictRecord rec{"gauss_equation", ctx.chart->name() + ":" + spec.label()};
    detail::guarded(rec, [&] {
      HypersurfaceEmbedding emb = build_surface(*ctx.chart, spec, ctx.config.tolerances.convexity);
      const int m = emb.dimension();
      if (m < 2) throw InvalidArgument("Gauss equation needs ambient dimension >= 3");
      ManifoldChart induced = induced_chart(emb);
      std::mt19937_64 rng(ctx.seed);
      double worst = 0.0;
      for (int i = 0; i < ctx.config.points; ++i) {
        Vec<double> u = detail::random_angles(m, rng);
        worst = std::max(worst, gauss_form_residual(emb, induced, u).residual);
      }
      rec.add("points", ctx.config.points);
      rec.add("max_form_residual", worst);
      rec.checks.push_back(upper_bound_verdict("gauss_form_residual", worst, 0.0, ctx.config.tolerances.gauss_equation));
    });
    out.push_back(std::move(rec));
  }
  return out;
}

inline TheoremOptions theorem_options(const RunConfig& cfg) {
  TheoremOptions opt;
  opt.order = cfg.order;
  opt.radial_order = cfg.radial_order;
  opt.integral_relative = cfg.tolerances.integral_relative;
  opt.pointwise_slack = cfg.tolerances.pointwise_slack;
  opt.convexity = cfg.tolerances.convexity;
  opt.interior_pf_tolerance = cfg.tolerances.interior_pf;
  return opt;
}

inline void fill_theorem_record(VerdictRecord& rec, const GaussBonnetReport& r, const Tolerances& tl) {
  rec.add("n", r.n);
  rec.add("order", r.order);
  rec.add("sphere_volume", r.sphere_volume);
  const char* integrand = r.parity == CaseParity::odd_n ? "integral_pf_gamma" : "integral_tpf";
  rec.add(integrand, r.boundary_integral);
  rec.add(std::string(integrand) + "_error", r.boundary_integral_error);
  rec.add("total_curvature", r.total_curvature);
  rec.add("total_curvature_error", r.total_curvature_error);
  if (r.parity != CaseParity::odd_n) {
    rec.add("integral_pf_interior", r.interior_integral);
    rec.add("integral_pf_interior_error", r.interior_integral_error);
  }
  if (r.parity == CaseParity::even_n) rec.add("max_abs_pf_interior", r.max_abs_pf_interior);
  rec.add("euler_estimate", r.euler_estimate);
  rec.add("min_gk_minus_integrand", r.min_gk_minus_integrand);
  rec.add("max_gk_minus_integrand", r.max_gk_minus_integrand);
  rec.add("min_correction", r.min_correction);
  rec.add("max_correction", r.max_correction);
  rec.add("min_principal_curvature", r.min_kappa);
  rec.add("max_shape_symmetry_defect", r.max_symmetry_defect);
  rec.checks = r.verdicts;
  rec.notes.push_back("case: " + to_string(r.parity));
  rec.notes.push_back("convexity: grid-verified");
  if (r.n >= 3) {
    if (r.fit.defined) {
      rec.add("fitted_constant", r.fit.c);
      rec.add("fit_spread", r.fit.spread);
      rec.add("fit_samples", r.fit.samples_used);
      rec.checks.push_back(Verdict{"fitted_constant_positive", r.fit.c > 0.0 ? VerdictStatus::pass : VerdictStatus::fail,
                                   r.fit.c, 0.0, 0.0, 0.0});
      rec.checks.push_back(upper_bound_verdict("fit_spread", r.fit.spread, 0.0, tl.fit_spread));
    } else {
      rec.notes.push_back("decomposition trivially consistent (correction term vanishes)");
    }
  }
  const auto& tc = r.verdicts.back();  // total_curvature_bound
  if (std::abs(r.total_curvature - r.sphere_volume) <= std::max(tl.integral_relative * r.sphere_volume, 3.0 * tc.error_estimate))
    rec.notes.push_back("equality: total curvature matches |S^(n-1)|");
}

inline std::vector<VerdictRecord> suite_theorem(const SuiteContext& ctx) {
  std::vector<VerdictRecord> out;
  for (const auto& spec : ctx.config.surfaces) {
    VerdictRecord rec{"theorem", ctx.chart->name() + ":" + spec.label()};
    detail::guarded(rec, [&] {
      HypersurfaceEmbedding emb = build_surface(*ctx.chart, spec, ctx.config.tolerances.convexity);
      GaussBonnetReport r = verify_theorem(emb, theorem_options(ctx.config));
      fill_theorem_record(rec, r, ctx.config.tolerances);
    });
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<VerdictRecord> suite_isoperimetric(const SuiteContext& ctx) {
  std::vector<VerdictRecord> out;
  for (const auto& spec : ctx.config.surfaces) {
    if (spec.type != "geodesic_sphere") continue;
    VerdictRecord rec{"isoperimetric", ctx.chart->name() + ":ball(r=" + format_double(spec.radius) + ")"};
    detail::guarded(rec, [&] {
      IsoperimetricOptions opt;
      opt.order = ctx.config.order > 0 ? ctx.config.order : std::min(12, default_grid_order(ctx.chart->dimension() - 1));
      opt.radial_order = ctx.config.radial_order;
      opt.slack = ctx.config.tolerances.isoperimetric;
      Vec<double> center = spec.center.empty() ? default_center(*ctx.chart) : Vec<double>(spec.center);
      IsoperimetricReport r = verify_isoperimetric(*ctx.chart, center, spec.radius, opt);
      rec.add("radius", r.radius);
      rec.add("boundary_area", r.boundary_area);
      rec.add("boundary_area_error", r.boundary_area_error);
      rec.add("volume", r.volume);
      rec.add("ratio", r.ratio);
      rec.add("euclidean_constant", r.euclidean_constant);
      rec.add("deficit", r.deficit);
      rec.checks.push_back(r.verdict);
      if (std::abs(r.deficit) <= opt.slack) rec.notes.push_back("equality: Euclidean isoperimetric constant attained");
    });
    out.push_back(std::move(rec));
  }
  if (out.empty()) {
    VerdictRecord rec{"isoperimetric", ctx.chart->name()};
    rec.notes.push_back("no geodesic_sphere surfaces configured");
    out.push_back(rec);
  }
  return out;
}

inline bool suite_needs_ambient(const std::string& suite) {
  return suite != "normalization" && suite != "cgb_closed" && suite != "cgb_boundary";
}

inline std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Runs the configured suites in order. Library errors become failed records.
inline std::vector<VerdictRecord> run(const RunConfig& cfg, std::string timestamp = utc_timestamp()) {
  std::optional<ManifoldChart> chart;
  if (cfg.ambient) chart = build_chart(*cfg.ambient);
  std::vector<std::string> suites = cfg.suites.empty() ? suite_names() : cfg.suites;
  std::vector<VerdictRecord> records;
  for (const auto& suite : suites) {
    SuiteContext ctx{cfg, chart, cfg.seed ^ fnv1a(suite)};
    std::vector<VerdictRecord> part;
    if (suite_needs_ambient(suite) && !chart) {
      VerdictRecord rec{suite, "-"};
      rec.error = "suite needs an ambient chart";
      part.push_back(rec);
    } else if (suite == "normalization") part = suite_normalization(ctx);
    else if (suite == "cgb_closed") part = suite_cgb_closed(ctx);
    else if (suite == "cgb_boundary") part = suite_cgb_boundary(ctx);
    else if (suite == "lemma31") part = suite_lemma31(ctx);
    else if (suite == "nullity") part = suite_nullity(ctx);
    else if (suite == "gauss_equation") part = suite_gauss_equation(ctx);
    else if (suite == "theorem") part = suite_theorem(ctx);
    else if (suite == "isoperimetric") part = suite_isoperimetric(ctx);
    for (auto& r : part) {
      r.provenance = {hex64(cfg.config_hash), cfg.seed, timestamp};
      records.push_back(std::move(r));
    }
  }
  return records;
}

inline bool any_failed(const std::vector<VerdictRecord>& records) {
  return std::any_of(records.begin(), records.end(), [](const VerdictRecord& r) { return r.verdict() == VerdictStatus::fail; });
}

inline void write_reports(const RunConfig& cfg, const std::vector<VerdictRecord>& records, const std::string& dir) {
  std::filesystem::create_directories(dir);
  if (cfg.format != "csv") {
    std::ofstream j(std::filesystem::path(dir) / "report.jsonl");
    write_jsonl(j, records);
  }
  if (cfg.format != "jsonl") {
    std::ofstream c(std::filesystem::path(dir) / "summary.csv");
    write_csv(c, records);
  }
}

inline std::string list_models() {
  std::ostringstream os;
  os << "Ambient charts (ambient.model):\n"
     << "  euclidean             flat R^n, closed-form exp\n"
     << "  hyperbolic            Poincare ball of curvature ambient.curvature (default -1), closed-form exp\n"
     << "  hyperbolic_halfspace  upper half-space model (no closed exp; surfaces unsupported)\n"
     << "  hyperbolic_polar      geodesic polar coordinates about a basepoint (no closed exp)\n"
     << "  sphere                round S^n of radius ambient.radius in hyperspherical angles\n"
     << "  product               Riemannian product of ambient.factors (block metric)\n"
     << "  h3_times_flat         H^3 x R^(n-3), nullity index n-3\n"
     << "  dimension guard: n <= " << kMaxAmbientDimension << "\n\n"
     << "Surface families (surfaces[].type):\n"
     << "  geodesic_sphere       radius\n"
     << "  perturbed_sphere      radius, amplitude, degree (zonal Legendre mode 1..6)\n"
     << "  ellipsoid             semi_axes (one per ambient dimension)\n\n"
     << "Suites (suites, or --suite NAME):\n"
     << "  normalization         Pf = 1 on unit spheres (dimensions.normalization, default 2 4 6)\n"
     << "  cgb_closed            (2/|S^k|) int Pf = 2 (dimensions.cgb_closed, default 2 4)\n"
     << "  cgb_boundary          flat balls: int TPf = |S^(k-1)|, TPf = GK, ellipsoid degree (default 2 4 6)\n"
     << "  lemma31               Omega_ij ^ Omega_kl = 0 at sampled points (ambient nullity >= n-3)\n"
     << "  gauss_equation        intrinsic vs extrinsic curvature forms on each surface\n"
     << "  theorem               total curvature inequality with Pf / TPf integrals\n"
     << "  isoperimetric         |dB|^n / |B|^(n-1) against the Euclidean constant on geodesic balls\n"
     << "  nullity               nullity dimension and singular-value gap at sampled points\n\n"
     << "Defaults:\n"
     << "  grid.order 0 (24 points per angle for m <= 3, 16 for m in 4..5, 12 for m = 6), grid.radial_order 16\n"
     << "  sampling.points 20, seed 1, output.dir cgbkit-out, output.format both\n"
     << "  tolerances: integral_relative 1e-2, pointwise_slack 1e-8, convexity 1e-6, normalization 1e-7,\n"
     << "              cgb_closed 1e-3, cgb_boundary 1e-4, tpf_gk 1e-9, ellipsoid 1e-3, lemma31 1e-9,\n"
     << "              gauss_equation 1e-4, interior_pf 1e-9, fit_spread 1e-3, nullity_relative 1e-8,\n"
     << "              nullity_gap 1e3, isoperimetric 1e-8\n";
  return os.str();
}

}  // namespace cgbkit::report
