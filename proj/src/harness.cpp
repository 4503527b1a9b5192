#include "sbp/harness.hpp"

#include "sbp/error.hpp"
#include "sbp/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace sbp {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// JSON helpers

Json vec_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::argument, what + " must be a 3-vector");
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number()) fail(ErrorCode::argument, what + " must hold numbers");
    v[k] = j[static_cast<std::size_t>(k)].get<double>();
  }
  return v;
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::argument, where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) fail(ErrorCode::argument, "unknown key '" + item.key() + "' in " + where);
  }
}

double number(const Json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(ErrorCode::argument, "'" + key + "' must be a number");
  return j.at(key).get<double>();
}

int integer(const Json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) fail(ErrorCode::argument, "'" + key + "' must be an integer");
  return j.at(key).get<int>();
}

std::pair<double, double> range(const Json& j, const std::string& key, std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const Json& r = j.at(key);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
    fail(ErrorCode::argument, "'" + key + "' must be [min, max]");
  }
  return {r[0].get<double>(), r[1].get<double>()};
}

Json curve_to_json(const CurveSpec& curve) {
  return std::visit(
      [](const auto& c) -> Json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, StraightCurve>) {
          return Json{{"family", "straight"}};
        } else if constexpr (std::is_same_v<T, ArcCurve>) {
          return Json{{"family", "arc"}, {"angle", c.angle}};
        } else {
          Json pts = Json::array();
          for (const auto& p : c.points) pts.push_back(vec_to_json(p));
          return Json{{"family", "spline"}, {"points", pts}};
        }
      },
      curve);
}

CurveSpec curve_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    fail(ErrorCode::argument, "curve needs a 'family' string");
  }
  const std::string family = j.at("family").get<std::string>();
  if (family == "straight") {
    check_keys(j, {"family"}, "curve");
    return StraightCurve{};
  }
  if (family == "arc") {
    check_keys(j, {"family", "angle"}, "curve");
    return ArcCurve{number(j, "angle", 1.0)};
  }
  if (family == "spline") {
    check_keys(j, {"family", "points"}, "curve");
    if (!j.contains("points") || !j.at("points").is_array()) fail(ErrorCode::argument, "spline curve needs 'points'");
    SplineCurve c;
    for (const auto& p : j.at("points")) c.points.push_back(vec_from_json(p, "spline point"));
    return c;
  }
  fail(ErrorCode::argument, "unknown curve family '" + family + "'");
}

Json radius_to_json(const RadiusSpec& r) {
  switch (r.family) {
    case RadiusFamily::spheroidal:
      return Json{{"family", "spheroidal"}};
    case RadiusFamily::constant:
      return Json{{"family", "constant"}, {"value", r.value}};
    case RadiusFamily::modulated:
      return Json{{"family", "modulated"}, {"amplitude", r.amplitude}, {"delta", r.delta}};
  }
  return Json{};
}

RadiusSpec radius_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    fail(ErrorCode::argument, "radius needs a 'family' string");
  }
  const std::string family = j.at("family").get<std::string>();
  RadiusSpec r;
  if (family == "spheroidal") {
    check_keys(j, {"family"}, "radius");
    r.family = RadiusFamily::spheroidal;
  } else if (family == "constant") {
    check_keys(j, {"family", "value"}, "radius");
    r.family = RadiusFamily::constant;
    r.value = number(j, "value", 1.0);
  } else if (family == "modulated") {
    check_keys(j, {"family", "amplitude", "delta"}, "radius");
    r.family = RadiusFamily::modulated;
    r.amplitude = number(j, "amplitude", r.amplitude);
    r.delta = number(j, "delta", r.delta);
  } else {
    fail(ErrorCode::argument, "unknown radius family '" + family + "'");
  }
  return r;
}

Json slice_to_json(const SliceSpec& s) {
  return Json{{"origin", vec_to_json(s.origin)},
              {"u", vec_to_json(s.u)},
              {"v", vec_to_json(s.v)},
              {"u_range", {s.u_min, s.u_max}},
              {"v_range", {s.v_min, s.v_max}},
              {"resolution", {s.nu, s.nv}},
              {"clearance_factor", s.clearance_factor}};
}

SliceSpec slice_from_json(const Json& j) {
  check_keys(j, {"origin", "u", "v", "u_range", "v_range", "resolution", "clearance_factor"}, "slice");
  SliceSpec s;
  if (j.contains("origin")) s.origin = vec_from_json(j.at("origin"), "slice origin");
  if (j.contains("u")) s.u = vec_from_json(j.at("u"), "slice u");
  if (j.contains("v")) s.v = vec_from_json(j.at("v"), "slice v");
  std::tie(s.u_min, s.u_max) = range(j, "u_range", {s.u_min, s.u_max});
  std::tie(s.v_min, s.v_max) = range(j, "v_range", {s.v_min, s.v_max});
  if (j.contains("resolution")) {
    const Json& r = j.at("resolution");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
      fail(ErrorCode::argument, "'resolution' must be [nu, nv]");
    }
    s.nu = r[0].get<int>();
    s.nv = r[1].get<int>();
  }
  s.clearance_factor = number(j, "clearance_factor", s.clearance_factor);
  return s;
}

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Output bookkeeping: every file goes through here so a failed run can remove
// what it wrote.

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  ~Outputs() {
    if (!committed_) {
      std::error_code ec;
      for (const auto& f : files_) fs::remove(f, ec);
    }
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& body) {
    const fs::path p = path(name);
    files_.push_back(p);
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + p.string());
    out << body;
    if (!out) fail(ErrorCode::io, "write failed for " + p.string());
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  void commit() { committed_ = true; }
  const std::vector<fs::path>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << "\n";
  }
  template <class... T>
  void row(const T&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double x) { return fmt(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }
  std::ostringstream out_;
};

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

// ---------------------------------------------------------------------------
// Built-in scenes. The straight and near-loop centerlines are the two vessels
// of the eps-scaling study; the three 3D splines and the planar funstuff2
// curve are shape-similar stand-ins (no control points are published).

SplineCurve near_loop_curve() {
  return SplineCurve{{{0.0, 0.0, 0.0},
                      {0.0, 0.0, 0.25},
                      {0.05, 0.0, 0.4},
                      {0.2, 0.0, 0.45},
                      {0.3, 0.0, 0.35},
                      {0.25, 0.0, 0.2},
                      {0.1, 0.0, 0.15},
                      {0.03, 0.0, 0.17}}};
}

constexpr double kTestLength = 4.7426;

}  // namespace

// ---------------------------------------------------------------------------

Json scene_to_json(const Scene& scene) {
  Json j{{"name", scene.name},
         {"curve", curve_to_json(scene.curve)},
         {"radius", radius_to_json(scene.radius)},
         {"length", scene.length},
         {"eps", scene.eps},
         {"eta", scene.eta},
         {"omega", scene.omega},
         {"p0", scene.p0},
         {"mesh", {{"nodes", scene.nodes}, {"gamma", scene.gamma}}},
         {"theta_order", scene.theta_order},
         {"geometry_samples", scene.geometry_samples},
         {"e1_initial", vec_to_json(scene.e1_initial)},
         {"panel_ratio", scene.panel_ratio}};
  if (scene.slice) j["slice"] = slice_to_json(*scene.slice);
  if (!scene.output_dir.empty()) j["output_dir"] = scene.output_dir;
  return j;
}

Scene scene_from_json(const Json& j) {
  check_keys(j,
             {"name", "curve", "radius", "length", "eps", "eta", "omega", "p0", "mesh", "theta_order",
              "geometry_samples", "e1_initial", "panel_ratio", "slice", "output_dir"},
             "scene");
  Scene s;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) fail(ErrorCode::argument, "'name' must be a string");
    s.name = j.at("name").get<std::string>();
  }
  if (j.contains("curve")) s.curve = curve_from_json(j.at("curve"));
  if (j.contains("radius")) s.radius = radius_from_json(j.at("radius"));
  s.length = number(j, "length", s.length);
  s.eps = number(j, "eps", s.eps);
  s.eta = number(j, "eta", s.eta);
  s.omega = number(j, "omega", s.omega);
  s.p0 = number(j, "p0", s.p0);
  if (j.contains("mesh")) {
    const Json& m = j.at("mesh");
    check_keys(m, {"nodes", "gamma"}, "mesh");
    s.nodes = integer(m, "nodes", s.nodes);
    s.gamma = number(m, "gamma", s.gamma);
  }
  s.theta_order = integer(j, "theta_order", s.theta_order);
  s.geometry_samples = integer(j, "geometry_samples", s.geometry_samples);
  if (j.contains("e1_initial")) s.e1_initial = vec_from_json(j.at("e1_initial"), "e1_initial");
  s.panel_ratio = number(j, "panel_ratio", s.panel_ratio);
  if (j.contains("slice")) s.slice = slice_from_json(j.at("slice"));
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) fail(ErrorCode::argument, "'output_dir' must be a string");
    s.output_dir = j.at("output_dir").get<std::string>();
  }
  return s;
}

Scene load_scene(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open scene file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::argument, "scene file " + path.string() + " is not valid JSON: " + e.what());
  }
  return scene_from_json(j);
}

Scene resolve_scene(const std::string& ref) {
  const std::string prefix = "builtin:";
  if (ref.rfind(prefix, 0) == 0) return builtin_scene(ref.substr(prefix.size()));
  if (fs::exists(ref)) return load_scene(ref);
  const auto names = builtin_scene_names();
  if (std::find(names.begin(), names.end(), ref) != names.end()) return builtin_scene(ref);
  fail(ErrorCode::io, "scene '" + ref + "' is neither a file nor a built-in scene");
}

std::vector<std::string> builtin_scene_names() {
  return {"straight", "near_loop", "funstuff1_a", "funstuff1_b", "funstuff1_c", "funstuff2"};
}

Scene builtin_scene(const std::string& name) {
  Scene s;
  s.name = name;
  s.radius = RadiusSpec{};
  s.p0 = 1.0;
  if (name == "straight") {
    s.curve = StraightCurve{};
    s.length = kTestLength;
    s.eps = 0.02;
    s.eta = 0.05;
    s.omega = 10.0;
  } else if (name == "near_loop") {
    s.curve = near_loop_curve();
    s.length = kTestLength;
    s.eps = 0.02;
    s.eta = 0.05;
    s.omega = 10.0;
  } else if (name == "funstuff1_a") {
    s.curve = SplineCurve{{{0, 0, 0}, {0, 0, 0.3}, {0.15, 0.1, 0.55}, {0.3, 0.3, 0.7}, {0.25, 0.55, 0.85}, {0.05, 0.6, 1.0}}};
    s.length = 6.4708;
    s.eps = 0.01;
    s.eta = 0.05;
    s.omega = 10.0;
  } else if (name == "funstuff1_b") {
    s.curve = SplineCurve{{{0, 0, 0}, {0, 0, 0.4}, {0.1, -0.1, 0.7}, {0.35, -0.2, 0.85}, {0.6, 0, 0.9}, {0.7, 0.25, 1.1}}};
    s.length = 7.1502;
    s.eps = 0.01;
    s.eta = 0.05;
    s.omega = 10.0;
  } else if (name == "funstuff1_c") {
    s.curve = SplineCurve{{{0, 0, 0},
                           {0, 0, 0.3},
                           {0.2, 0.1, 0.5},
                           {0.4, 0, 0.7},
                           {0.5, -0.25, 0.6},
                           {0.35, -0.45, 0.45},
                           {0.1, -0.4, 0.5},
                           {0, -0.2, 0.75},
                           {0.1, 0.05, 0.95}}};
    s.length = 11.6179;
    s.eps = 0.01;
    s.eta = 0.05;
    s.omega = 10.0;
  } else if (name == "funstuff2") {
    s.curve = SplineCurve{{{0, 0, 0}, {0, 0, 0.3}, {0.15, 0, 0.55}, {0.4, 0, 0.65}, {0.6, 0, 0.55}}};
    s.length = 4.5213;
    s.eps = 0.01;
    s.eta = 0.05;
    s.omega = 10.0;
  } else {
    fail(ErrorCode::argument, "unknown built-in scene '" + name + "'");
  }
  return s;
}

std::string scene_hash(const Scene& scene) {
  Json j{{"curve", curve_to_json(scene.curve)},
         {"radius", radius_to_json(scene.radius)},
         {"length", scene.length},
         {"eps", scene.eps},
         {"eta", scene.eta},
         {"omega", scene.omega},
         {"geometry_samples", scene.geometry_samples},
         {"e1_initial", vec_to_json(scene.e1_initial)}};
  return fnv1a(j.dump());
}

std::string config_hash(const Scene& scene) {
  Json j = scene_to_json(scene);
  j.erase("output_dir");
  j.erase("name");
  return fnv1a(j.dump());
}

void check_scene_parameters(const Scene& s) {
  auto bad = [](const std::string& what) { fail(ErrorCode::validation, "invalid scene parameter: " + what); };
  if (!(s.eps > 0.0 && s.eps <= 0.1)) bad("eps must lie in (0, 0.1]");
  if (!(s.length > 0.0) || !std::isfinite(s.length)) bad("length must be positive");
  if (!(s.eta > 0.0) || !std::isfinite(s.eta)) bad("eta must be positive");
  if (!(s.omega >= 0.0) || !std::isfinite(s.omega)) bad("omega must be nonnegative");
  if (!std::isfinite(s.p0)) bad("p0 must be finite");
  if (s.nodes < 16 || s.nodes > 2000) bad("mesh nodes must lie in [16, 2000]");
  if (!(s.gamma >= 1.0 && s.gamma <= 8.0)) bad("mesh gamma must lie in [1, 8]");
  if (s.theta_order < 8 || s.theta_order > 4096 || (s.theta_order & (s.theta_order - 1)) != 0) {
    bad("theta_order must be a power of two in [8, 4096]");
  }
  if (s.geometry_samples < 64) bad("geometry_samples must be at least 64");
  if (!(s.panel_ratio > 0.05 && s.panel_ratio <= 2.0)) bad("panel_ratio must lie in (0.05, 2]");
  if (s.e1_initial.norm() == 0.0) bad("e1_initial must be nonzero");
}

namespace {

std::shared_ptr<const Centerline> build_centerline(const Scene& scene) {
  CenterlineOptions opts;
  opts.samples = scene.geometry_samples;
  opts.e1_initial = scene.e1_initial;
  return std::make_shared<const Centerline>(Centerline::build(scene.curve, opts));
}

Json validation_to_json(const ValidationReport& rep) {
  Json diags = Json::array();
  for (const auto& d : rep.diagnostics) {
    diags.push_back({{"name", d.name}, {"passed", d.passed}, {"value", d.value}, {"message", d.message}});
  }
  return Json{{"accepted", rep.accepted()},
              {"c_gamma", rep.c_gamma},
              {"kappa_star", rep.kappa_star},
              {"a_star", rep.a_star},
              {"a_starstar", rep.a_starstar},
              {"spheroidal_ratio", rep.spheroidal_ratio},
              {"curvature_margin", rep.curvature_margin},
              {"diagnostics", diags}};
}

}  // namespace

ValidationReport validate_scene(const Scene& scene) {
  check_scene_parameters(scene);
  VesselGeometry geom(build_centerline(scene), RadiusProfile{scene.radius}, scene.eps);
  return validate_geometry(geom);
}

FieldContext Problem::field_context() const {
  FieldContext ctx;
  ctx.geometry = geometry.get();
  ctx.eta = eta_unit;
  ctx.omega = omega_unit;
  ctx.mesh = &mesh;
  ctx.solution = &solution;
  ctx.panel_ratio = scene.panel_ratio;
  return ctx;
}

std::unique_ptr<Problem> solve_scene(const Scene& scene) {
  check_scene_parameters(scene);
  auto prob = std::make_unique<Problem>();
  prob->scene = scene;
  auto t0 = std::chrono::steady_clock::now();
  prob->centerline = build_centerline(scene);
  prob->geometry = std::make_unique<VesselGeometry>(prob->centerline, RadiusProfile{scene.radius}, scene.eps);
  prob->validation = validate_geometry(*prob->geometry);
  if (!prob->validation.accepted()) {
    fail(ErrorCode::validation, "scene '" + scene.name + "' rejected: " + prob->validation.failures());
  }
  prob->geometry_seconds = seconds_since(t0);

  // Unit-length rescaling: s -> s/L, a -> a/L, x -> x/L; the Poiseuille flux
  // carries L^3 and the Robin exchange L, so eta -> eta L^2, omega -> omega L.
  prob->eta_unit = scene.eta * scene.length * scene.length;
  prob->omega_unit = scene.omega * scene.length;
  t0 = std::chrono::steady_clock::now();
  prob->mesh = build_mesh(scene.nodes, scene.gamma, prob->geometry->radius(),
                          2.0 * std::numbers::pi * prob->omega_unit / prob->eta_unit);
  KernelOptions kopts;
  kopts.theta.min_order = scene.theta_order;
  kopts.panel_ratio = scene.panel_ratio;
  const KernelEvaluator kernel(*prob->geometry, prob->eta_unit, kopts);
  prob->kernel = assemble_kernel_matrix(kernel, prob->mesh);
  prob->assembly_seconds = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  prob->solution = solve_psb(prob->mesh, prob->kernel, scene.p0);
  prob->solve_seconds = seconds_since(t0);
  return prob;
}

SolutionTable solution_table(const Problem& prob) {
  const double L = prob.scene.length;
  const Solution& sol = prob.solution;
  const std::size_t n = sol.s.size();
  SolutionTable t;
  t.s.resize(n);
  t.a.resize(n);
  t.p = sol.p;
  t.a4ps.resize(n);
  t.a4ps_s.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.s[i] = L * sol.s[i];
    t.a[i] = L * sol.a[i];
    // Nodal flux: average of the adjacent midpoint fluxes; zero at the tip.
    double flux = 0.0;
    if (i == 0) {
      flux = sol.flux[0];
    } else if (i + 1 < n) {
      flux = 0.5 * (sol.flux[i - 1] + sol.flux[i]);
    }
    t.a4ps[i] = L * L * L * flux;
    t.a4ps_s[i] = L * L * sol.g[i];
  }
  return t;
}

// ---------------------------------------------------------------------------

RunMode parse_run_mode(const std::string& name) {
  if (name == "solve") return RunMode::solve;
  if (name == "sweep-eps") return RunMode::sweep_eps;
  if (name == "sweep-mesh") return RunMode::sweep_mesh;
  if (name == "slice") return RunMode::slice;
  if (name == "residuals") return RunMode::residuals;
  if (name == "figures") return RunMode::figures;
  fail(ErrorCode::argument, "unknown run mode '" + name + "'");
}

std::string run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::solve: return "solve";
    case RunMode::sweep_eps: return "sweep-eps";
    case RunMode::sweep_mesh: return "sweep-mesh";
    case RunMode::slice: return "slice";
    case RunMode::residuals: return "residuals";
    case RunMode::figures: return "figures";
  }
  return "";
}

std::vector<double> default_sweep_eps() { return {0.04, 0.02, 0.01}; }
std::vector<double> figure_eps() { return {0.02, 0.01, 0.005, 0.0025, 0.00125}; }
std::vector<int> default_sweep_nodes() { return {100, 200, 400, 800}; }

std::vector<std::string> figure_manifest_files() {
  return {"funstuff1_a.csv",    "funstuff1_b.csv",          "funstuff1_c.csv",
          "funstuff2_a.csv",    "funstuff2_b.csv",          "test_geoms.csv",
          "the_tests_straight.csv", "the_tests_near_loop.csv", "figures_manifest.json"};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::argument, "slope needs at least two points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    mx += std::log(x[k]) / n;
    my += std::log(y[k]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

Json norms_to_json(const NormReport& n) {
  return Json{{"p_l2", n.p_l2},
              {"a2_ps_l2", n.a2_ps_l2},
              {"p_ha", n.ha},
              {"a_inv_half_g_l2", n.a_inv_half_g_l2},
              {"a_ps_inf", n.a_ps_inf},
              {"a_inv_g_inf", n.a_inv_g_inf},
              {"a32_gs_l2_difference_quotient", n.a32_gs_l2},
              {"a_gs_inf_difference_quotient", n.a_gs_inf},
              {"p_inf", n.p_inf},
              {"tip_flux", n.tip_flux},
              {"tip_flux_ratio", n.tip_flux_ratio}};
}

Json defaults_ledger(const Problem& prob) {
  const Scene& s = prob.scene;
  return Json{{"ell_rule", "ell(eps) = 1 - sqrt(1 - eps^2)"},
              {"ell", prob.geometry->stretch().ell},
              {"e1_initial", vec_to_json(s.e1_initial)},
              {"gamma", s.gamma},
              {"nodes", s.nodes},
              {"theta_order", s.theta_order},
              {"theta_order_used", prob.kernel.theta_order},
              {"geometry_samples", s.geometry_samples},
              {"panel_ratio", s.panel_ratio},
              {"residual_theta_points", 64},
              {"slice_clearance_factor", 2.0},
              {"workers", worker_count()}};
}

const char* kScaling =
    "unit-length rescaling: s' = s/L, a' = a/L, x' = x/L, eta' = eta L^2, omega' = omega L; "
    "CSV columns s, a, a4ps, a4ps_s are converted back to physical units; residuals are in the "
    "unit-length scaling";

Json solve_summary(const Problem& prob, std::uint64_t seed) {
  const Solution& sol = prob.solution;
  const CoercivityReport coer = coercivity_diagnostic(prob.mesh, prob.kernel, 32, seed);
  const bool monotone = std::adjacent_find(sol.p.begin(), sol.p.end(), std::less<double>()) == sol.p.end();
  return Json{{"norms", norms_to_json(sol.norms)},
              {"solver",
               {{"condition_estimate", sol.condition_estimate},
                {"condition_warning", sol.condition_warning},
                {"refinement_correction", sol.refinement_correction},
                {"relative_residual", sol.residual},
                {"kernel_self_check", prob.kernel.self_check},
                {"kernel_evaluations", prob.kernel.kernel_evaluations}}},
              {"coercivity", {{"min_ratio", coer.min_ratio}, {"max_ratio", coer.max_ratio}, {"samples", coer.samples}, {"seed", seed}}},
              {"p_tip", sol.p.back()},
              {"p_min", *std::min_element(sol.p.begin(), sol.p.end())},
              {"p_monotone_nonincreasing", monotone}};
}

Json base_report(const Problem& prob, RunMode mode) {
  return Json{{"mode", run_mode_name(mode)},
              {"scene_hash", scene_hash(prob.scene)},
              {"config_hash", config_hash(prob.scene)},
              {"scene", scene_to_json(prob.scene)},
              {"scaling", kScaling},
              {"defaults", defaults_ledger(prob)},
              {"validation", validation_to_json(prob.validation)}};
}

Json timing(const Problem& prob) {
  return Json{{"geometry_seconds", prob.geometry_seconds},
              {"assembly_seconds", prob.assembly_seconds},
              {"solve_seconds", prob.solve_seconds}};
}

std::string solution_csv(const Problem& prob) {
  const SolutionTable t = solution_table(prob);
  Csv csv({"s", "a", "p", "a4ps", "a4ps_s"});
  for (std::size_t i = 0; i < t.s.size(); ++i) csv.row(t.s[i], t.a[i], t.p[i], t.a4ps[i], t.a4ps_s[i]);
  return csv.str();
}

// Residual summary restricted to nodes before the flagged tip band.
Json residual_summary(const ResidualReport& r) {
  double sup_outside_band = 0.0;
  int band_nodes = 0;
  double alt_gap = 0.0;
  for (std::size_t i = 0; i < r.rbar.size(); ++i) {
    if (r.s[i] < r.tip_band_start) {
      sup_outside_band = std::max(sup_outside_band, std::abs(r.rbar[i]));
    } else {
      ++band_nodes;
    }
    alt_gap = std::max(alt_gap, std::abs(r.rbar[i] - r.rbar_alt[i]));
  }
  return Json{{"eps", r.eps},
              {"theta_points", r.theta_points},
              {"surface_nodes", r.s.size()},
              {"rbar_sup", r.rbar_sup},
              {"rbar_l2", r.rbar_l2},
              {"r_sup", r.r_sup},
              {"r_l2", r.r_l2},
              {"r_weighted_sup", r.r_weighted_sup},
              {"tip_band_start", r.tip_band_start},
              {"tip_band_nodes", band_nodes},
              {"rbar_sup_before_tip_band", sup_outside_band},
              {"rbar_two_way_max_difference", alt_gap}};
}

std::string residual_csv(const Problem& prob, const ResidualReport& r) {
  Csv csv({"s", "rbar", "rbar_alt", "in_tip_band"});
  for (std::size_t i = 0; i < r.s.size(); ++i) {
    csv.row(prob.scene.length * r.s[i], r.rbar[i], r.rbar_alt[i], r.s[i] >= r.tip_band_start ? 1 : 0);
  }
  return csv.str();
}

std::string residual_grid_csv(const Problem& prob, const ResidualReport& r) {
  Csv csv({"s", "theta", "r", "dqdn", "q"});
  const int nt = r.theta_points;
  for (std::size_t i = 0; i < r.s.size(); ++i) {
    for (int j = 0; j < nt; ++j) {
      const std::size_t k = i * static_cast<std::size_t>(nt) + static_cast<std::size_t>(j);
      csv.row(prob.scene.length * r.s[i], 2.0 * std::numbers::pi * j / nt, r.r[k], r.dqdn[k], r.q_surface[k]);
    }
  }
  return csv.str();
}

// Default slice: the plane y = const offset from the centerline by 3.5 eps L,
// spanning x and z over the centerline's bounding box with a margin.
SliceSpec default_slice(const Problem& prob) {
  const Centerline& cl = *prob.centerline;
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int k = 0; k < cl.samples(); ++k) {
    const Vec3 x = cl.sample(k).X * prob.scene.length;
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const double margin = 0.15 * std::max((hi - lo).maxCoeff(), 1e-3 * prob.scene.length);
  SliceSpec s;
  s.origin = Vec3(0.0, hi.y() + 3.5 * prob.scene.eps * prob.scene.length, 0.0);
  s.u = Vec3::UnitX();
  s.v = Vec3::UnitZ();
  s.u_min = lo.x() - margin;
  s.u_max = hi.x() + margin;
  s.v_min = 0.0;
  s.v_max = hi.z() + margin;
  return s;
}

FieldSlice compute_slice(const Problem& prob, const SliceSpec& spec) {
  const double L = prob.scene.length;
  PlaneSpec plane;
  plane.origin = spec.origin / L;
  plane.u = spec.u;
  plane.v = spec.v;
  plane.u_min = spec.u_min / L;
  plane.u_max = spec.u_max / L;
  plane.v_min = spec.v_min / L;
  plane.v_max = spec.v_max / L;
  plane.nu = spec.nu;
  plane.nv = spec.nv;
  plane.clearance_factor = spec.clearance_factor;
  return slice_grid(prob.field_context(), plane);
}

std::string slice_csv(const Problem& prob, const FieldSlice& slice) {
  Csv csv({"x", "y", "z", "q", "mask"});
  for (std::size_t k = 0; k < slice.points.size(); ++k) {
    const Vec3 x = prob.to_physical(slice.points[k]);
    csv.row(x.x(), x.y(), x.z(), slice.values[k], slice.masked[k] ? 1 : 0);
  }
  return csv.str();
}

Json slice_metadata(const Problem& prob, const SliceSpec& spec, const FieldSlice& slice) {
  double qmax = 0.0;
  for (std::size_t k = 0; k < slice.values.size(); ++k) {
    if (!slice.masked[k]) qmax = std::max(qmax, std::abs(slice.values[k]));
  }
  return Json{{"plane", slice_to_json(spec)},
              {"units", "physical coordinates; q is a pressure (same units as p0)"},
              {"points", slice.points.size()},
              {"unmasked", slice.unmasked},
              {"q_abs_max", qmax},
              {"scene_hash", scene_hash(prob.scene)}};
}

Scene apply_overrides(Scene scene, const RunConfig& cfg, std::optional<double> eps, std::optional<int> nodes) {
  if (eps) scene.eps = *eps;
  if (nodes) scene.nodes = *nodes;
  if (cfg.theta_order) scene.theta_order = *cfg.theta_order;
  return scene;
}

void check_config(const RunConfig& cfg) {
  for (double e : cfg.eps) {
    if (!(e > 0.0 && e <= 0.1)) fail(ErrorCode::argument, "eps overrides must lie in (0, 0.1]");
  }
  for (int n : cfg.nodes) {
    if (n < 16 || n > 2000) fail(ErrorCode::argument, "node overrides must lie in [16, 2000]");
  }
  const bool single = cfg.mode == RunMode::solve || cfg.mode == RunMode::slice || cfg.mode == RunMode::residuals;
  if (single && cfg.eps.size() > 1) fail(ErrorCode::argument, run_mode_name(cfg.mode) + " takes a single eps");
  if (cfg.mode != RunMode::sweep_mesh && cfg.nodes.size() > 1) {
    fail(ErrorCode::argument, run_mode_name(cfg.mode) + " takes a single node count");
  }
  if (cfg.mode != RunMode::figures && cfg.scene.empty()) fail(ErrorCode::argument, "a scene is required");
}

fs::path prepare_out_dir(const RunConfig& cfg, const Scene* scene) {
  fs::path dir = cfg.out_dir;
  if (dir.empty() && scene && !scene->output_dir.empty()) dir = scene->output_dir;
  if (dir.empty()) dir = "out";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) fail(ErrorCode::io, "output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
  return dir;
}

std::optional<double> single_eps(const RunConfig& cfg) {
  if (cfg.eps.empty()) return std::nullopt;
  return cfg.eps.front();
}
std::optional<int> single_nodes(const RunConfig& cfg) {
  if (cfg.nodes.empty()) return std::nullopt;
  return cfg.nodes.front();
}

// --------------------------------------------------------------------------
// Modes

Json run_solve(const Scene& scene, const RunConfig& cfg, Outputs& out) {
  const auto prob = solve_scene(scene);
  Json rep = base_report(*prob, RunMode::solve);
  rep["result"] = solve_summary(*prob, cfg.seed);
  rep["s"] = prob->solution.s;
  rep["p"] = prob->solution.p;
  rep["timing"] = timing(*prob);
  out.write(scene.name + "_solution.csv", solution_csv(*prob));
  return rep;
}

Json run_residuals(const Scene& scene, const RunConfig& cfg, Outputs& out) {
  const auto prob = solve_scene(scene);
  Json rep = base_report(*prob, RunMode::residuals);
  rep["result"] = solve_summary(*prob, cfg.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const ResidualReport r = boundary_residuals(prob->field_context());
  rep["residuals"] = residual_summary(r);
  rep["theta_variation_mid"] = theta_variation(prob->field_context(), 0.5);
  Json t = timing(*prob);
  t["residual_seconds"] = seconds_since(t0);
  rep["timing"] = t;
  out.write(scene.name + "_solution.csv", solution_csv(*prob));
  out.write(scene.name + "_residuals.csv", residual_csv(*prob, r));
  out.write(scene.name + "_residual_grid.csv", residual_grid_csv(*prob, r));
  return rep;
}

Json run_slice(const Scene& scene, const RunConfig& cfg, Outputs& out) {
  const auto prob = solve_scene(scene);
  Json rep = base_report(*prob, RunMode::slice);
  rep["result"] = solve_summary(*prob, cfg.seed);
  const SliceSpec spec = scene.slice ? *scene.slice : default_slice(*prob);
  const auto t0 = std::chrono::steady_clock::now();
  const FieldSlice slice = compute_slice(*prob, spec);
  rep["slice"] = slice_metadata(*prob, spec, slice);
  Json t = timing(*prob);
  t["slice_seconds"] = seconds_since(t0);
  rep["timing"] = t;
  out.write(scene.name + "_solution.csv", solution_csv(*prob));
  out.write(scene.name + "_slice.csv", slice_csv(*prob, slice));
  out.write_json(scene.name + "_slice.json", rep["slice"]);
  return rep;
}

Json run_sweep_eps(const Scene& base, const RunConfig& cfg, Outputs& out) {
  const std::vector<double> eps_list = cfg.eps.empty() ? default_sweep_eps() : cfg.eps;
  Csv table({"eps", "p_ha", "a_ps_inf", "a_inv_g_inf", "p_inf", "p_tip", "rbar_sup", "rbar_sup_before_tip_band",
             "rbar_l2", "r_weighted_sup", "theta_variation_mid", "condition_estimate"});
  Json members = Json::array();
  std::vector<double> ha, aps, ag, pinf, rsup, rsup_band, rw, tv;
  Json rep;
  for (double eps : eps_list) {
    const Scene scene = apply_overrides(base, cfg, eps, single_nodes(cfg));
    const auto prob = solve_scene(scene);
    if (rep.is_null()) rep = base_report(*prob, RunMode::sweep_eps);
    const auto t0 = std::chrono::steady_clock::now();
    const ResidualReport r = boundary_residuals(prob->field_context());
    const Json rs = residual_summary(r);
    const double variation = theta_variation(prob->field_context(), 0.5);
    const NormReport& n = prob->solution.norms;
    table.row(eps, n.ha, n.a_ps_inf, n.a_inv_g_inf, n.p_inf, prob->solution.p.back(), r.rbar_sup,
              rs["rbar_sup_before_tip_band"].get<double>(), r.rbar_l2, r.r_weighted_sup, variation,
              prob->solution.condition_estimate);
    ha.push_back(n.ha);
    aps.push_back(n.a_ps_inf);
    ag.push_back(n.a_inv_g_inf);
    pinf.push_back(n.p_inf);
    rsup.push_back(r.rbar_sup);
    rsup_band.push_back(rs["rbar_sup_before_tip_band"].get<double>());
    rw.push_back(r.r_weighted_sup);
    tv.push_back(variation);
    Json m{{"eps", eps},
           {"scene_hash", scene_hash(scene)},
           {"defaults", defaults_ledger(*prob)},
           {"result", solve_summary(*prob, cfg.seed)},
           {"residuals", rs},
           {"theta_variation_mid", variation},
           {"timing", timing(*prob)}};
    m["timing"]["residual_seconds"] = seconds_since(t0);
    members.push_back(m);
    out.write(scene.name + "_eps" + eps_tag(eps) + "_solution.csv", solution_csv(*prob));
  }
  out.write(base.name + "_sweep_eps.csv", table.str());
  const double ha_ratio = *std::max_element(ha.begin(), ha.end()) / *std::min_element(ha.begin(), ha.end());
  rep["members"] = members;
  rep["trends"] = Json{
      {"eps", eps_list},
      {"p_ha_max_over_min", ha_ratio},
      {"slope_a_ps_inf", loglog_slope(eps_list, aps)},
      {"slope_a_inv_g_inf", loglog_slope(eps_list, ag)},
      {"slope_p_inf", loglog_slope(eps_list, pinf)},
      {"slope_rbar_sup", loglog_slope(eps_list, rsup)},
      {"slope_rbar_sup_before_tip_band", loglog_slope(eps_list, rsup_band)},
      {"r_weighted_sup_max", *std::max_element(rw.begin(), rw.end())},
      {"slope_theta_variation_mid", loglog_slope(eps_list, tv)}};
  return rep;
}

// Linear interpolation of nodal values onto new points.
std::vector<double> interpolate(const std::vector<double>& nodes, const std::vector<double>& values,
                                const std::vector<double>& at) {
  std::vector<double> out(at.size());
  for (std::size_t k = 0; k < at.size(); ++k) {
    const HatLocation loc = locate(nodes, at[k]);
    const auto l = static_cast<std::size_t>(loc.left);
    out[k] = (1.0 - loc.right_weight) * values[l] + loc.right_weight * values[l + 1];
  }
  return out;
}

Json run_sweep_mesh(const Scene& base, const RunConfig& cfg, Outputs& out) {
  std::vector<int> nodes = cfg.nodes.empty() ? default_sweep_nodes() : cfg.nodes;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  if (nodes.size() < 2) fail(ErrorCode::argument, "sweep-mesh needs at least two node counts");
  std::vector<std::unique_ptr<Problem>> probs;
  for (int n : nodes) probs.push_back(solve_scene(apply_overrides(base, cfg, single_eps(cfg), n)));
  const Problem& finest = *probs.back();
  Csv table({"nodes", "p_tip", "p_ha", "max_diff_vs_finest", "max_diff_vs_next"});
  Json rows = Json::array();
  std::vector<double> diffs;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const Solution& sol = probs[k]->solution;
    const auto fine = interpolate(finest.solution.s, finest.solution.p, sol.s);
    double d = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) d = std::max(d, std::abs(fine[i] - sol.p[i]));
    double dn = std::numeric_limits<double>::quiet_NaN();
    if (k + 1 < probs.size()) {
      const auto next = interpolate(probs[k + 1]->solution.s, probs[k + 1]->solution.p, sol.s);
      dn = 0.0;
      for (std::size_t i = 0; i < next.size(); ++i) dn = std::max(dn, std::abs(next[i] - sol.p[i]));
      diffs.push_back(dn);
    }
    table.row(nodes[k], sol.p.back(), sol.norms.ha, d, dn);
    rows.push_back({{"nodes", nodes[k]},
                    {"p_tip", sol.p.back()},
                    {"p_ha", sol.norms.ha},
                    {"max_diff_vs_finest", d},
                    {"max_diff_vs_next", dn},
                    {"timing", timing(*probs[k])}});
    out.write(base.name + "_N" + std::to_string(nodes[k]) + "_solution.csv", solution_csv(*probs[k]));
  }
  out.write(base.name + "_sweep_mesh.csv", table.str());
  Json rep = base_report(finest, RunMode::sweep_mesh);
  rep["members"] = rows;
  Json orders = Json::array();
  for (std::size_t k = 0; k + 1 < diffs.size(); ++k) {
    orders.push_back(std::log(diffs[k] / diffs[k + 1]) /
                     std::log(static_cast<double>(nodes[k + 1]) / nodes[k]));
  }
  rep["observed_orders"] = orders;
  return rep;
}

// ---------------------------------------------------------------------------
// Figure regeneration

Json run_figures(const RunConfig& cfg, Outputs& out) {
  const std::vector<double> eps_list = cfg.eps.empty() ? figure_eps() : cfg.eps;
  Json manifest{{"mode", "figures"}, {"files", Json::array()}};
  auto add = [&](const std::string& name, const std::string& body, Json meta) {
    out.write(name, body);
    meta["file"] = name;
    manifest["files"].push_back(meta);
  };
  auto scene_for = [&](const std::string& name) {
    return apply_overrides(builtin_scene(name), cfg, std::nullopt, single_nodes(cfg));
  };

  // Interior pressure along three 3D vessels (eps = 0.01, eta = 0.05, omega = 10).
  for (const char* name : {"funstuff1_a", "funstuff1_b", "funstuff1_c"}) {
    const auto prob = solve_scene(scene_for(name));
    Csv csv({"s", "s_over_L", "x", "y", "z", "a", "p"});
    const double L = prob->scene.length;
    for (std::size_t i = 0; i < prob->solution.s.size(); ++i) {
      const double s = prob->solution.s[i];
      const Vec3 x = L * prob->centerline->position(s);
      csv.row(L * s, s, x.x(), x.y(), x.z(), L * prob->solution.a[i], prob->solution.p[i]);
    }
    add(std::string(name) + ".csv", csv.str(),
        Json{{"figure", "funstuff1"}, {"scene", scene_to_json(prob->scene)}, {"scene_hash", scene_hash(prob->scene)}});
  }

  // Exterior pressure slices for two parameter sets on the planar vessel.
  const std::pair<const char*, std::pair<double, double>> f2sets[] = {{"funstuff2_a.csv", {1.0, 1.0}},
                                                                       {"funstuff2_b.csv", {0.05, 10.0}}};
  for (const auto& [file, params] : f2sets) {
    Scene scene = scene_for("funstuff2");
    scene.eta = params.first;
    scene.omega = params.second;
    const auto prob = solve_scene(scene);
    const SliceSpec spec = scene.slice ? *scene.slice : default_slice(*prob);
    const FieldSlice slice = compute_slice(*prob, spec);
    Json meta = slice_metadata(*prob, spec, slice);
    meta["figure"] = "funstuff2";
    meta["scene"] = scene_to_json(prob->scene);
    add(file, slice_csv(*prob, slice), meta);
  }

  // The eps-scaling study: two geometries x two parameter sets x the eps list.
  // test_geoms collects the centerlines (colored by p) and the radius
  // profiles eps a(s) of the permeable runs for every eps.
  const std::pair<double, double> params[] = {{0.05, 10.0}, {1.0, 1.0}};
  Csv geoms({"geometry", "eps", "s", "x", "y", "z", "eps_a", "p"});
  for (const char* geometry : {"straight", "near_loop"}) {
    Csv tests({"eta", "omega", "eps", "s", "a", "p"});
    Json runs = Json::array();
    for (const auto& [eta, omega] : params) {
      for (double eps : eps_list) {
        Scene scene = scene_for(geometry);
        scene.eta = eta;
        scene.omega = omega;
        scene.eps = eps;
        const auto prob = solve_scene(scene);
        const double L = scene.length;
        const Solution& sol = prob->solution;
        for (std::size_t i = 0; i < sol.s.size(); ++i) {
          tests.row(eta, omega, eps, L * sol.s[i], L * sol.a[i], sol.p[i]);
        }
        runs.push_back({{"eta", eta}, {"omega", omega}, {"eps", eps}, {"scene_hash", scene_hash(scene)}});
        if (eta != 0.05) continue;
        for (std::size_t i = 0; i < sol.s.size(); ++i) {
          const Vec3 x = L * prob->centerline->position(sol.s[i]);
          geoms.row(std::string(geometry), eps, L * sol.s[i], x.x(), x.y(), x.z(), eps * L * sol.a[i], sol.p[i]);
        }
      }
    }
    add(std::string("the_tests_") + geometry + ".csv", tests.str(),
        Json{{"figure", "the_tests"}, {"geometry", geometry}, {"runs", runs}});
  }
  add("test_geoms.csv", geoms.str(),
      Json{{"figure", "test_geoms"},
           {"layout", "centerline (x, y, z), radius eps a(s) and p for eta = 0.05, omega = 10; one block per geometry and eps"},
           {"eps", eps_list}});

  manifest["eps"] = eps_list;
  manifest["scaling"] = kScaling;
  manifest["defaults"] = Json{{"ell_rule", "ell(eps) = 1 - sqrt(1 - eps^2)"},
                              {"e1_initial", vec_to_json(Vec3::UnitX())},
                              {"workers", worker_count()}};
  out.write_json("figures_manifest.json", manifest);
  return manifest;
}

}  // namespace

RunReport run(const RunConfig& cfg) {
  check_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Scene> scene;
  if (cfg.mode != RunMode::figures) {
    scene = apply_overrides(resolve_scene(cfg.scene), cfg, single_eps(cfg), single_nodes(cfg));
  }
  const fs::path dir = prepare_out_dir(cfg, scene ? &*scene : nullptr);
  Outputs out(dir);
  Json rep;
  switch (cfg.mode) {
    case RunMode::solve: rep = run_solve(*scene, cfg, out); break;
    case RunMode::residuals: rep = run_residuals(*scene, cfg, out); break;
    case RunMode::slice: rep = run_slice(*scene, cfg, out); break;
    case RunMode::sweep_eps: rep = run_sweep_eps(*scene, cfg, out); break;
    case RunMode::sweep_mesh: rep = run_sweep_mesh(*scene, cfg, out); break;
    case RunMode::figures: rep = run_figures(cfg, out); break;
  }
  rep["seed"] = cfg.seed;
  rep["total_seconds"] = seconds_since(t0);
  if (cfg.mode != RunMode::figures) {
    out.write_json(scene->name + "_" + run_mode_name(cfg.mode) + "_report.json", rep);
  }
  out.commit();
  RunReport result;
  result.mode = run_mode_name(cfg.mode);
  result.scene_hash = rep.value("scene_hash", std::string());
  result.json = rep;
  result.files = out.files();
  return result;
}

// ---------------------------------------------------------------------------

Json load_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open report " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::argument, "report " + path.string() + " is not valid JSON: " + e.what());
  }
}

Comparison compare_runs(const Json& a, const Json& b) {
  for (const Json* r : {&a, &b}) {
    if (!r->contains("scene_hash") || !r->contains("s") || !r->contains("p") || !r->contains("result")) {
      fail(ErrorCode::argument, "comparison needs solve reports (scene_hash, s, p, result)");
    }
  }
  if (a.at("scene_hash") != b.at("scene_hash")) {
    fail(ErrorCode::argument, "comparison error: reports describe different scenes (" +
                                  a.at("scene_hash").get<std::string>() + " vs " +
                                  b.at("scene_hash").get<std::string>() + ")");
  }
  const auto sa = a.at("s").get<std::vector<double>>();
  const auto pa = a.at("p").get<std::vector<double>>();
  const auto sb = b.at("s").get<std::vector<double>>();
  const auto pb = b.at("p").get<std::vector<double>>();
  // Compare on the coarser node set, interpolating the finer solution.
  const bool a_coarse = sa.size() <= sb.size();
  const auto& s_c = a_coarse ? sa : sb;
  const auto p_first = a_coarse ? pa : interpolate(sa, pa, s_c);
  const auto p_second = a_coarse ? interpolate(sb, pb, s_c) : pb;
  Comparison c;
  c.common_nodes = static_cast<int>(s_c.size());
  c.p_ratio_min = std::numeric_limits<double>::infinity();
  c.p_ratio_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s_c.size(); ++i) {
    const double d = std::abs(p_second[i] - p_first[i]);
    c.p_max_abs_diff = std::max(c.p_max_abs_diff, d);
    const double scale = std::max(std::abs(p_first[i]), std::abs(p_second[i]));
    if (scale > 0.0) c.p_max_rel_diff = std::max(c.p_max_rel_diff, d / scale);
    if (p_first[i] != 0.0) {
      c.p_ratio_min = std::min(c.p_ratio_min, p_second[i] / p_first[i]);
      c.p_ratio_max = std::max(c.p_ratio_max, p_second[i] / p_first[i]);
    }
  }
  c.norms = Json::object();
  const Json& na = a.at("result").at("norms");
  const Json& nb = b.at("result").at("norms");
  for (const auto& item : na.items()) {
    if (!nb.contains(item.key()) || !item.value().is_number()) continue;
    const double x = item.value().get<double>();
    const double y = nb.at(item.key()).get<double>();
    const double scale = std::max(std::abs(x), std::abs(y));
    c.norms[item.key()] = scale > 0.0 ? std::abs(x - y) / scale : 0.0;
  }
  c.json = Json{{"scene_hash", a.at("scene_hash")},
                {"config_hash_a", a.value("config_hash", std::string())},
                {"config_hash_b", b.value("config_hash", std::string())},
                {"common_nodes", c.common_nodes},
                {"p_max_abs_diff", c.p_max_abs_diff},
                {"p_max_rel_diff", c.p_max_rel_diff},
                {"p_ratio_min", c.p_ratio_min},
                {"p_ratio_max", c.p_ratio_max},
                {"norm_rel_diffs", c.norms}};
  if (a.contains("residuals") && b.contains("residuals")) {
    Json rd = Json::object();
    for (const char* key : {"rbar_sup", "rbar_l2", "r_sup", "r_l2"}) {
      const double x = a.at("residuals").at(key).get<double>();
      const double y = b.at("residuals").at(key).get<double>();
      const double scale = std::max(std::abs(x), std::abs(y));
      rd[key] = scale > 0.0 ? std::abs(x - y) / scale : 0.0;
    }
    c.json["residual_rel_diffs"] = rd;
  }
  return c;
}

}  // namespace sbp
