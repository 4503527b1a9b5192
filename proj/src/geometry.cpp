#include "sbp/geometry.hpp"

#include "sbp/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace sbp {

namespace {

struct ParametricCurve {
  std::function<Vec3(double)> x;
  std::function<Vec3(double)> dx;
  std::function<Vec3(double)> ddx;
};

// Natural/clamped cubic spline of one coordinate over knots u.
class ScalarSpline {
 public:
  ScalarSpline(const std::vector<double>& u, const std::vector<double>& y, double start_slope)
      : u_(u), y_(y), m_(u.size(), 0.0) {
    const std::size_t n = u.size() - 1;
    std::vector<double> lower(n + 1, 0.0), diag(n + 1, 0.0), upper(n + 1, 0.0), rhs(n + 1, 0.0);
    const double h0 = u[1] - u[0];
    diag[0] = 2.0 * h0;
    upper[0] = h0;
    rhs[0] = 6.0 * ((y[1] - y[0]) / h0 - start_slope);
    for (std::size_t k = 1; k < n; ++k) {
      const double hl = u[k] - u[k - 1];
      const double hr = u[k + 1] - u[k];
      lower[k] = hl;
      diag[k] = 2.0 * (hl + hr);
      upper[k] = hr;
      rhs[k] = 6.0 * ((y[k + 1] - y[k]) / hr - (y[k] - y[k - 1]) / hl);
    }
    diag[n] = 1.0;  // natural end, M_n = 0
    rhs[n] = 0.0;
    // Thomas algorithm.
    for (std::size_t k = 1; k <= n; ++k) {
      const double w = lower[k] / diag[k - 1];
      diag[k] -= w * upper[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
    m_[n] = rhs[n] / diag[n];
    for (std::size_t k = n; k-- > 0;) m_[k] = (rhs[k] - upper[k] * m_[k + 1]) / diag[k];
  }

  // Returns value, first and second derivative.
  std::array<double, 3> eval(double t) const {
    const std::size_t n = u_.size() - 1;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(u_.begin(), u_.end(), t) - u_.begin());
    k = std::clamp<std::size_t>(k == 0 ? 0 : k - 1, 0, n - 1);
    const double h = u_[k + 1] - u_[k];
    const double A = (u_[k + 1] - t) / h;
    const double B = (t - u_[k]) / h;
    const double v = A * y_[k] + B * y_[k + 1] +
                     ((A * A * A - A) * m_[k] + (B * B * B - B) * m_[k + 1]) * h * h / 6.0;
    const double d = (y_[k + 1] - y_[k]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[k] +
                     (3.0 * B * B - 1.0) / 6.0 * h * m_[k + 1];
    const double dd = A * m_[k] + B * m_[k + 1];
    return {v, d, dd};
  }

 private:
  std::vector<double> u_, y_, m_;
};

ParametricCurve make_parametric(const CurveSpec& spec) {
  if (std::holds_alternative<StraightCurve>(spec)) {
    return {[](double s) { return Vec3(0, 0, s); }, [](double) { return Vec3(0, 0, 1); },
            [](double) { return Vec3(0, 0, 0); }};
  }
  if (const auto* arc = std::get_if<ArcCurve>(&spec)) {
    const double phi = arc->angle;
    if (std::abs(phi) < 1e-14) return make_parametric(StraightCurve{});
    const double r = 1.0 / phi;
    return {[=](double s) { return Vec3(r * (1.0 - std::cos(phi * s)), 0.0, r * std::sin(phi * s)); },
            [=](double s) { return Vec3(std::sin(phi * s), 0.0, std::cos(phi * s)); },
            [=](double s) { return Vec3(phi * std::cos(phi * s), 0.0, -phi * std::sin(phi * s)); }};
  }
  const auto& pts = std::get<SplineCurve>(spec).points;
  if (pts.size() < 2) fail(ErrorCode::argument, "spline centerline needs at least two control points");
  std::vector<double> u(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double chord = (pts[k] - pts[k - 1]).norm();
    if (chord <= 0.0) fail(ErrorCode::argument, "spline control points must be distinct");
    u[k] = u[k - 1] + chord;
  }
  const double chord_total = u.back();
  for (auto& v : u) v /= chord_total;
  std::array<std::shared_ptr<ScalarSpline>, 3> comp;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> y(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) y[k] = pts[k][c];
    comp[c] = std::make_shared<ScalarSpline>(u, y, c == 2 ? chord_total : 0.0);
  }
  auto eval = [comp](double s, int which) {
    Vec3 out;
    for (int c = 0; c < 3; ++c) out[c] = comp[c]->eval(s)[static_cast<std::size_t>(which)];
    return out;
  };
  return {[=](double s) { return eval(s, 0); }, [=](double s) { return eval(s, 1); },
          [=](double s) { return eval(s, 2); }};
}

double simpson_recursive(const std::function<double(double)>& f, double a, double b, double fa,
                         double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recursive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recursive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recursive(f, a, b, fa, fm, fb, whole, tol, 40);
}

Vec3 hermite(const Vec3& p0, const Vec3& d0, const Vec3& p1, const Vec3& d1, double u, double h) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  return h00 * p0 + h10 * h * d0 + h01 * p1 + h11 * h * d1;
}

}  // namespace

std::vector<Vec3> transport_bishop_normal(const std::vector<Vec3>& tangent,
                                          const std::vector<Vec3>& curvature, double h,
                                          const Vec3& e1_start) {
  const std::size_t n = (tangent.size() + 1) / 2;
  std::vector<Vec3> out(n);
  auto project = [&](Vec3 e, std::size_t j) {
    e -= e.dot(tangent[j]) * tangent[j];
    return Vec3(e.normalized());
  };
  auto rhs = [&](std::size_t j, const Vec3& e) -> Vec3 { return -curvature[j].dot(e) * tangent[j]; };
  Vec3 e = project(e1_start, 0);
  out[0] = e;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t j = 2 * k;
    const Vec3 k1 = rhs(j, e);
    const Vec3 k2 = rhs(j + 1, e + 0.5 * h * k1);
    const Vec3 k3 = rhs(j + 1, e + 0.5 * h * k2);
    const Vec3 k4 = rhs(j + 2, e + h * k3);
    e = project(e + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), j + 2);
    out[k + 1] = e;
  }
  return out;
}

Centerline Centerline::build(const CurveSpec& spec, const CenterlineOptions& options) {
  if (options.samples < 16) fail(ErrorCode::argument, "centerline needs at least 16 samples");
  const ParametricCurve curve = make_parametric(spec);
  const std::function<double(double)> speed = [&](double s) { return curve.dx(s).norm(); };

  const double total = adaptive_simpson(speed, 0.0, 1.0, 1e-13);
  if (!(total > 0.0)) fail(ErrorCode::validation, "reparameterization_failure: zero-length centerline");

  const int n = options.samples;
  const int m = 2 * (n - 1);  // half-step grid
  const double step = total / m;
  std::vector<double> sigma(static_cast<std::size_t>(m) + 1, 0.0);
  double worst = 0.0;
  for (int j = 1; j <= m; ++j) {
    const double lo = sigma[static_cast<std::size_t>(j) - 1];
    double x = 1.0;
    if (j < m) {
      x = std::min(1.0, lo + step / std::max(speed(lo), 1e-300));
      for (int it = 0; it < 60; ++it) {
        const double f = adaptive_simpson(speed, lo, x, 1e-15) - step;
        const double xn = std::clamp(x - f / speed(x), lo, 1.0);
        const bool done = std::abs(xn - x) <= 1e-15;
        x = xn;
        if (done) break;
      }
    }
    sigma[static_cast<std::size_t>(j)] = x;
    const double achieved = adaptive_simpson(speed, lo, x, 1e-15);
    worst = std::max(worst, std::abs(achieved - step) / step);
  }
  if (worst > 1e-8) {
    std::ostringstream msg;
    msg << "reparameterization_failure: arclength residual " << worst << " exceeds 1e-8";
    fail(ErrorCode::validation, msg.str());
  }

  std::vector<Vec3> pos(static_cast<std::size_t>(m) + 1), tan(pos.size()), curv(pos.size());
  for (std::size_t j = 0; j < pos.size(); ++j) {
    const Vec3 d1 = curve.dx(sigma[j]);
    const Vec3 d2 = curve.ddx(sigma[j]);
    const double sp = d1.norm();
    const Vec3 t = d1 / sp;
    pos[j] = curve.x(sigma[j]) / total;
    tan[j] = t;
    curv[j] = (d2 - d2.dot(t) * t) / (sp * sp) * total;
  }

  const double h = 1.0 / (n - 1);
  Vec3 e1_start = options.e1_initial;
  if ((e1_start - e1_start.dot(tan[0]) * tan[0]).norm() < 1e-8)
    fail(ErrorCode::argument, "initial normal e1(0) is parallel to the base tangent");
  const std::vector<Vec3> normals = transport_bishop_normal(tan, curv, h, e1_start);

  Centerline c;
  c.h_ = h;
  c.raw_length_ = total;
  c.reparam_residual_ = worst;
  c.e1_initial_ = options.e1_initial;
  c.table_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const std::size_t j = 2 * static_cast<std::size_t>(k);
    FrameSample& f = c.table_[static_cast<std::size_t>(k)];
    f.X = pos[j];
    f.et = tan[j];
    f.e1 = normals[static_cast<std::size_t>(k)];
    f.e2 = f.et.cross(f.e1);
    f.k1 = curv[j].dot(f.e1);
    f.k2 = curv[j].dot(f.e2);
    c.kappa_star_ = std::max(c.kappa_star_, curv[j].norm());
  }

  double min_z = 0.0;
  for (const auto& f : c.table_) min_z = std::min(min_z, f.X.z());
  if (min_z < -1e-9) {
    std::ostringstream msg;
    msg << "wall_contact: centerline reaches z = " << min_z << " below the wall";
    fail(ErrorCode::validation, msg.str());
  }
  double ratio = std::numeric_limits<double>::infinity();
  const int stride = std::max(1, n / 384);
  for (int i = 0; i < n; i += stride)
    for (int j = i + stride; j < n; j += stride)
      ratio = std::min(ratio, (c.table_[static_cast<std::size_t>(i)].X - c.table_[static_cast<std::size_t>(j)].X).norm() /
                                  ((j - i) * h));
  if (ratio < 1e-9) fail(ErrorCode::validation, "self_intersection: centerline intersects itself");
  return c;
}

Vec3 Centerline::position(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  const int n = samples();
  const int k = std::min(static_cast<int>(s / h_), n - 2);
  const double u = (s - k * h_) / h_;
  const FrameSample& a = table_[static_cast<std::size_t>(k)];
  const FrameSample& b = table_[static_cast<std::size_t>(k) + 1];
  return hermite(a.X, a.et, b.X, b.et, u, h_);
}

FrameSample Centerline::frame(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  const int n = samples();
  const int k = std::min(static_cast<int>(s / h_), n - 2);
  const double u = (s - k * h_) / h_;
  const FrameSample& a = table_[static_cast<std::size_t>(k)];
  const FrameSample& b = table_[static_cast<std::size_t>(k) + 1];
  FrameSample f;
  f.X = hermite(a.X, a.et, b.X, b.et, u, h_);
  f.et = hermite(a.et, a.k1 * a.e1 + a.k2 * a.e2, b.et, b.k1 * b.e1 + b.k2 * b.e2, u, h_).normalized();
  Vec3 e1 = hermite(a.e1, -a.k1 * a.et, b.e1, -b.k1 * b.et, u, h_);
  e1 -= e1.dot(f.et) * f.et;
  f.e1 = e1.normalized();
  f.e2 = f.et.cross(f.e1);
  f.k1 = (1.0 - u) * a.k1 + u * b.k1;
  f.k2 = (1.0 - u) * a.k2 + u * b.k2;
  return f;
}

double Centerline::wall_ratio() const {
  double r = std::numeric_limits<double>::infinity();
  for (int k = 1; k < samples(); ++k) r = std::min(r, table_[static_cast<std::size_t>(k)].X.z() / sample_s(k));
  return r;
}

double Centerline::c_gamma(int max_pairs_side) const {
  const int n = samples();
  const int stride = std::max(1, n / std::max(2, max_pairs_side));
  double r = wall_ratio();
  for (int i = 0; i < n; i += stride) {
    for (int j = i + stride; j < n; j += stride) {
      const double d = (table_[static_cast<std::size_t>(i)].X - table_[static_cast<std::size_t>(j)].X).norm();
      r = std::min(r, d / ((j - i) * h_));
    }
  }
  return r;
}

Vec3 ReflectedCurve::tangent(double t) const {
  if (t >= 0.0) return centerline_->frame(t).et;
  return -reflect_across_wall(centerline_->frame(-t).et);
}

// ---------------------------------------------------------------------------

namespace {

// Interior neck of the modulated profile: g(s) = 1 - A sin^4(pi s / (1 - delta)).
struct Neck {
  double amp, len;
  double g(double s) const {
    if (s >= len) return 1.0;
    const double x = std::sin(std::numbers::pi * s / len);
    return 1.0 - amp * x * x * x * x;
  }
  double dg(double s) const {
    if (s >= len) return 0.0;
    const double w = std::numbers::pi / len;
    const double x = std::sin(w * s);
    return -amp * 4.0 * x * x * x * std::cos(w * s) * w;
  }
  double ddg(double s) const {
    if (s >= len) return 0.0;
    const double w = std::numbers::pi / len;
    const double x = std::sin(w * s);
    const double c = std::cos(w * s);
    return -amp * 4.0 * w * w * (3.0 * x * x * c * c - x * x * x * x);
  }
};

}  // namespace

RadiusProfile::RadiusProfile(RadiusSpec spec) : spec_(spec) {
  switch (spec_.family) {
    case RadiusFamily::spheroidal:
      delta_ = 0.1;
      break;
    case RadiusFamily::constant:
      if (!(spec_.value > 0.0)) fail(ErrorCode::argument, "constant radius must be positive");
      delta_ = 0.0;
      break;
    case RadiusFamily::modulated:
      if (!(spec_.amplitude >= 0.0 && spec_.amplitude < 1.0))
        fail(ErrorCode::argument, "modulated radius amplitude must lie in [0, 1)");
      if (!(spec_.delta > 0.0 && spec_.delta < 1.0))
        fail(ErrorCode::argument, "modulated radius end zone must lie in (0, 1)");
      delta_ = spec_.delta;
      break;
  }
  a0_ = std::numeric_limits<double>::infinity();
  const int grid = 20000;
  for (int k = 0; k < grid; ++k) {
    const double s = static_cast<double>(k) / grid;
    if (s <= 1.0 - delta_) a0_ = std::min(a0_, a(s));
    a_star_ = std::max(a_star_, std::abs(a_aprime(s)));
    a_starstar_ = std::max(a_starstar_, std::abs(a3_a2prime(s)));
  }
}

std::string RadiusProfile::end_form() const {
  return spec_.family == RadiusFamily::constant ? "none" : "spheroidal";
}

double RadiusProfile::a(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  switch (spec_.family) {
    case RadiusFamily::spheroidal:
      return std::sqrt(1.0 - s * s);
    case RadiusFamily::constant:
      return spec_.value;
    case RadiusFamily::modulated:
      return std::sqrt(1.0 - s * s) * Neck{spec_.amplitude, 1.0 - spec_.delta}.g(s);
  }
  return 0.0;
}

double RadiusProfile::a_prime(double s) const {
  const double r = a(s);
  if (spec_.family == RadiusFamily::constant) return 0.0;
  if (r == 0.0) return -std::numeric_limits<double>::infinity();
  return a_aprime(s) / r;
}

double RadiusProfile::a_aprime(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  switch (spec_.family) {
    case RadiusFamily::spheroidal:
      return -s;
    case RadiusFamily::constant:
      return 0.0;
    case RadiusFamily::modulated: {
      const Neck nk{spec_.amplitude, 1.0 - spec_.delta};
      const double g = nk.g(s);
      return -s * g * g + (1.0 - s * s) * g * nk.dg(s);
    }
  }
  return 0.0;
}

double RadiusProfile::a3_a2prime(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  switch (spec_.family) {
    case RadiusFamily::spheroidal:
      return -1.0;
    case RadiusFamily::constant:
      return 0.0;
    case RadiusFamily::modulated: {
      const Neck nk{spec_.amplitude, 1.0 - spec_.delta};
      const double g = nk.g(s);
      const double r2 = 1.0 - s * s;
      return -g * g * g * g - 2.0 * r2 * s * g * g * g * nk.dg(s) + r2 * r2 * g * g * g * nk.ddg(s);
    }
  }
  return 0.0;
}

StretchMap StretchMap::for_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::argument, "eps must lie in (0, 1)");
  // 1 - sqrt(1 - eps^2) written without cancellation.
  return StretchMap{eps * eps / (1.0 + std::sqrt(1.0 - eps * eps))};
}

// ---------------------------------------------------------------------------

VesselGeometry::VesselGeometry(std::shared_ptr<const Centerline> centerline, RadiusProfile radius,
                               double eps)
    : centerline_(std::move(centerline)),
      radius_(std::move(radius)),
      eps_(eps),
      stretch_(StretchMap::for_eps(eps)),
      reflected_(centerline_) {}

Vec3 VesselGeometry::surface_point(double s, double theta) const {
  const FrameSample f = centerline_->frame(s);
  return f.X + eps_ * radius_.a(s) * (std::cos(theta) * f.e1 + std::sin(theta) * f.e2);
}

double VesselGeometry::jacobian(double s, double theta) const {
  const FrameSample f = centerline_->frame(s);
  const double a = radius_.a(s);
  const double khat = f.k1 * std::cos(theta) + f.k2 * std::sin(theta);
  const double m = 1.0 - eps_ * a * khat;
  if (m <= 0.0) {
    std::ostringstream msg;
    msg << "eps_curvature: 1 - eps a kappa = " << m << " at s = " << s << "; eps too large for the curvature";
    fail(ErrorCode::validation, msg.str());
  }
  const double aap = radius_.a_aprime(s);
  return std::sqrt(eps_ * eps_ * a * a * m * m + eps_ * eps_ * eps_ * eps_ * aap * aap);
}

Vec3 VesselGeometry::normal(double s, double theta) const {
  const FrameSample f = centerline_->frame(s);
  const double a = radius_.a(s);
  const double aap = radius_.a_aprime(s);
  const Vec3 er = std::cos(theta) * f.e1 + std::sin(theta) * f.e2;
  return (-a * er + eps_ * aap * f.et) / std::sqrt(a * a + eps_ * eps_ * aap * aap);
}

Vec3 VesselGeometry::r_eps(double s, double t, double theta) const {
  const FrameSample f = centerline_->frame(s);
  const Vec3 er = std::cos(theta) * f.e1 + std::sin(theta) * f.e2;
  return f.X - source_point(t) + eps_ * radius_.a(s) * er;
}

VesselGeometry::Nearest VesselGeometry::nearest(const Vec3& x) const {
  const Centerline& c = *centerline_;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < c.samples(); ++k) {
    const double d = (c.sample(k).X - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  double lo = std::max(0.0, c.sample_s(best) - c.spacing());
  double hi = std::min(1.0, c.sample_s(best) + c.spacing());
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  auto dist2 = [&](double s) { return (c.position(s) - x).squaredNorm(); };
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = dist2(x1), f2 = dist2(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = dist2(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = dist2(x2);
    }
  }
  Nearest out;
  out.s = 0.5 * (lo + hi);
  out.distance = std::sqrt(dist2(out.s));
  out.clearance = out.distance - eps_ * radius_.a(out.s);
  return out;
}

// ---------------------------------------------------------------------------

bool ValidationReport::accepted() const {
  return std::all_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.passed; });
}

std::string ValidationReport::failures() const {
  std::string out;
  for (const auto& d : diagnostics) {
    if (d.passed) continue;
    if (!out.empty()) out += "; ";
    out += d.name + ": " + d.message;
  }
  return out;
}

ValidationReport validate_geometry(const VesselGeometry& geometry) {
  const Centerline& c = geometry.centerline();
  const RadiusProfile& r = geometry.radius();
  const double eps = geometry.eps();
  ValidationReport rep;
  auto add = [&](std::string name, bool ok, double value, std::string msg) {
    rep.diagnostics.push_back({std::move(name), ok, value, std::move(msg)});
  };

  add("eps_range", eps > 0.0 && eps <= 0.1, eps, "eps must lie in (0, 0.1]");

  const Vec3 base = c.sample(0).X;
  add("base_on_wall", std::abs(base.z()) <= 1e-12, base.z(), "vessel base must lie on z = 0");
  const double tilt = (c.sample(0).et - Vec3::UnitZ()).norm();
  add("base_tangent", tilt <= 1e-10, tilt, "base tangent must be perpendicular to the wall");

  rep.kappa_star = c.kappa_star();
  rep.c_gamma = c.c_gamma();

  // Tube clearance: the wall may only be touched by the s = 0 cross section and
  // distant parts of the vessel may not overlap.
  const int n = c.samples();
  double wall_gap = std::numeric_limits<double>::infinity();
  for (int k = 1; k < n; ++k) {
    const FrameSample& f = c.sample(k);
    const double horiz = std::sqrt(std::max(0.0, 1.0 - f.et.z() * f.et.z()));
    wall_gap = std::min(wall_gap, f.X.z() - eps * r.a(c.sample_s(k)) * horiz);
  }
  const double wall = std::min(c.wall_ratio(), wall_gap);
  add("wall_contact", wall > 0.0, wall, "vessel touches or crosses the wall away from its base");

  double tube_gap = std::numeric_limits<double>::infinity();
  const int stride = std::max(1, n / 384);
  for (int i = 0; i < n; i += stride) {
    for (int j = i + stride; j < n; j += stride) {
      const double si = c.sample_s(i), sj = c.sample_s(j);
      if (sj - si < 4.0 * eps) continue;
      const double d = (c.sample(i).X - c.sample(j).X).norm();
      tube_gap = std::min(tube_gap, d - eps * (r.a(si) + r.a(sj)));
    }
  }
  const bool self_ok = rep.c_gamma > 0.0 && tube_gap > 0.0;
  add("self_intersection", self_ok, std::min(rep.c_gamma, tube_gap),
      "centerline or vessel surface intersects itself");

  double amax = 0.0;
  for (int k = 0; k <= 4000; ++k) amax = std::max(amax, r.a(k / 4000.0));
  add("radius_normalization", std::abs(amax - 1.0) <= 1e-12, amax, "max radius must equal 1");

  rep.a_star = r.a_star();
  rep.a_starstar = r.a_starstar();
  add("radius_regularity", std::isfinite(rep.a_star) && std::isfinite(rep.a_starstar), rep.a_starstar,
      "a a' and a^3 a'' must stay bounded");

  // Spheroidal end: a(1) = 0, monotone decay, and closeness to sqrt(1 - s^2).
  bool end_ok = r.a(1.0) == 0.0 && r.delta() > 0.0;
  double ratio = 0.0;
  if (end_ok) {
    double prev = r.a(1.0 - r.delta());
    for (int k = 1; k <= 2000; ++k) {
      const double s = 1.0 - r.delta() + r.delta() * k / 2000.0;
      const double v = r.a(s);
      if (v > prev + 1e-15) end_ok = false;
      prev = v;
      const double sphere = std::sqrt(std::max(0.0, 1.0 - s * s));
      if (sphere > 0.0) ratio = std::max(ratio, std::abs(v - sphere) / (eps * eps * sphere));
    }
  } else {
    ratio = std::numeric_limits<double>::infinity();
  }
  rep.spheroidal_ratio = ratio;
  add("spheroidal_end", end_ok && ratio <= kSpheroidalConstant, ratio,
      "radius must decay monotonically to zero like sqrt(1 - s^2) at the free end");

  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const FrameSample& f = c.sample(k);
    margin = std::min(margin, 1.0 - eps * r.a(c.sample_s(k)) * std::hypot(f.k1, f.k2));
  }
  rep.curvature_margin = margin;
  add("eps_curvature", margin > 0.0, margin, "eps too large for the centerline curvature");
  return rep;
}

}  // namespace sbp
