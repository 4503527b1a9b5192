#include "doctest.h"

#include "sbp/error.hpp"
#include "sbp/geometry.hpp"

#include <cmath>
#include <numbers>

using namespace sbp;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Centerline> line(const CurveSpec& spec, int samples = 2048) {
  CenterlineOptions o;
  o.samples = samples;
  return std::make_shared<const Centerline>(Centerline::build(spec, o));
}

SplineCurve near_loop() {
  return SplineCurve{{{0, 0, 0}, {0, 0, 0.25}, {0.05, 0, 0.4}, {0.2, 0, 0.45}, {0.3, 0, 0.35}, {0.25, 0, 0.2},
                      {0.1, 0, 0.15}, {0.03, 0, 0.17}}};
}

bool has_failed(const ValidationReport& rep, const std::string& name) {
  for (const auto& d : rep.diagnostics) {
    if (d.name == name) return !d.passed;
  }
  return false;
}

}  // namespace

TEST_CASE("straight centerline has a constant frame and zero curvature") {
  const auto cl = line(StraightCurve{});
  for (int k = 0; k < cl->samples(); k += 97) {
    const auto& f = cl->sample(k);
    CHECK((f.et - Vec3::UnitZ()).norm() < 1e-12);
    CHECK((f.e1 - Vec3::UnitX()).norm() < 1e-12);
    CHECK(std::abs(f.k1) < 1e-12);
    CHECK(std::abs(f.k2) < 1e-12);
  }
  CHECK(std::abs(cl->raw_length() - 1.0) < 1e-12);
}

TEST_CASE("semicircular arc has curvature pi") {
  const auto cl = line(ArcCurve{kPi});
  double worst = 0.0;
  for (int k = 0; k < cl->samples(); ++k) {
    const auto& f = cl->sample(k);
    worst = std::max(worst, std::abs(std::hypot(f.k1, f.k2) - kPi));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("frame invariants on a 3D spline") {
  const auto cl = line(SplineCurve{{{0, 0, 0}, {0, 0, 0.3}, {0.15, 0.1, 0.55}, {0.3, 0.3, 0.7}, {0.25, 0.55, 0.85}}});
  for (int k = 0; k < cl->samples(); ++k) {
    const auto& f = cl->sample(k);
    CHECK(std::abs(f.et.norm() - 1.0) < 1e-10);
    CHECK(std::abs(f.e1.norm() - 1.0) < 1e-10);
    CHECK(std::abs(f.e2.norm() - 1.0) < 1e-10);
    CHECK(std::abs(f.et.dot(f.e1)) < 1e-10);
    CHECK(std::abs(f.et.dot(f.e2)) < 1e-10);
    CHECK(std::abs(f.e1.dot(f.e2)) < 1e-10);
    if (k > 0) CHECK(f.X.z() > 0.0);
  }
  CHECK(std::abs(cl->sample(0).X.z()) < 1e-14);
  CHECK((cl->sample(0).et - Vec3::UnitZ()).norm() < 1e-10);

  // Transport: d e1/ds = -k1 e_t and d e2/ds = -k2 e_t (central differences).
  const double h = 1e-4;
  for (double s : {0.1, 0.35, 0.6, 0.85}) {
    const auto fm = cl->frame(s - h);
    const auto fp = cl->frame(s + h);
    const auto f = cl->frame(s);
    CHECK(((fp.e1 - fm.e1) / (2 * h) + f.k1 * f.et).norm() < 1e-4);
    CHECK(((fp.e2 - fm.e2) / (2 * h) + f.k2 * f.et).norm() < 1e-4);
  }

  // Arclength: |X(s + h) - X(s)| / h -> 1.
  for (double s : {0.0, 0.2, 0.5, 0.9}) {
    const double hh = 1e-3;
    CHECK(std::abs((cl->position(s + hh) - cl->position(s)).norm() / hh - 1.0) < 1e-6);
  }
  CHECK(cl->reparam_residual() < 1e-8);
}

TEST_CASE("Bishop transport integrator converges at fourth order") {
  // Helix with tangent and curvature vector known in closed form.
  const double r = 0.3, c = std::hypot(0.3, 0.2), hz = 0.2;
  auto T = [&](double s) -> Vec3 { return Vec3(-r * std::sin(s / c), r * std::cos(s / c), hz) / c; };
  auto dT = [&](double s) -> Vec3 { return Vec3(-r * std::cos(s / c), -r * std::sin(s / c), 0.0) / (c * c); };
  auto transport = [&](int n) {
    const double h = 1.0 / (n - 1);
    std::vector<Vec3> t, k;
    for (int j = 0; j < 2 * n - 1; ++j) {
      t.push_back(T(0.5 * h * j));
      k.push_back(dT(0.5 * h * j));
    }
    return transport_bishop_normal(t, k, h, Vec3::UnitX()).back();
  };
  const Vec3 ref = transport(4097);
  const double e1 = (transport(17) - ref).norm();
  const double e2 = (transport(33) - ref).norm();
  const double e3 = (transport(65) - ref).norm();
  MESSAGE("transport errors " << e1 << " " << e2 << " " << e3);
  CHECK(std::log2(e1 / e2) >= 3.5);
  CHECK(std::log2(e2 / e3) >= 3.5);
}

TEST_CASE("surface points") {
  const auto straight = line(StraightCurve{});
  {
    RadiusSpec rs;
    rs.family = RadiusFamily::constant;
    const VesselGeometry g(straight, RadiusProfile{rs}, 0.01);
    CHECK((g.surface_point(0.5, 0.0) - (straight->position(0.5) + 0.01 * Vec3::UnitX())).norm() < 1e-14);
  }
  const VesselGeometry g(straight, RadiusProfile{}, 0.01);
  for (double th : {0.0, 1.0, 4.0}) CHECK((g.surface_point(1.0, th) - straight->position(1.0)).norm() < 1e-14);
  const Vec3 expect = straight->position(0.6) + 0.008 * straight->frame(0.6).e2;
  CHECK((g.surface_point(0.6, kPi / 2) - expect).norm() < 1e-14);
}

TEST_CASE("surface Jacobian") {
  const auto straight = line(StraightCurve{});
  RadiusSpec rs;
  rs.family = RadiusFamily::constant;
  rs.value = 0.7;
  const VesselGeometry gc(straight, RadiusProfile{rs}, 0.02);
  CHECK(gc.jacobian(0.3, 1.0) == doctest::Approx(0.02 * 0.7).epsilon(1e-15));

  const double eps = 0.01;
  const VesselGeometry g(straight, RadiusProfile{}, eps);
  const double a = std::sqrt(1 - 0.36), ap = -0.6 / a;
  CHECK(g.jacobian(0.6, 2.0) == doctest::Approx(eps * a * std::sqrt(1 + eps * eps * ap * ap)).epsilon(1e-13));

  // |J - eps a| <= C eps^2 with C from (kappa_star, a_star).
  const auto arc = line(ArcCurve{2.0});
  for (double e : {0.04, 0.02, 0.01}) {
    const VesselGeometry ga(arc, RadiusProfile{}, e);
    const double C = arc->kappa_star() + ga.radius().a_star();
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double s = i / 200.0;
      for (int j = 0; j < 16; ++j) {
        const double th = 2 * kPi * j / 16;
        worst = std::max(worst, std::abs(ga.jacobian(s, th) - e * ga.radius().a(s)));
      }
    }
    CHECK(worst <= C * e * e);
  }

  // Cross sections overlap when eps a kappa >= 1 (eps deliberately outside
  // the admissible range).
  const auto tight = line(ArcCurve{3.0});
  const VesselGeometry bad(tight, RadiusProfile{}, 0.5);
  CHECK_THROWS_AS(bad.jacobian(0.1, 0.0), Error);
}

TEST_CASE("reflection and even extension") {
  const auto straight = line(StraightCurve{});
  const ReflectedCurve Y(straight);
  for (double t : {-1.0, -0.4, 0.0, 0.3, 1.0}) CHECK((Y(t) - t * Vec3::UnitZ()).norm() < 1e-13);
  const auto fstar = even_extension([](double s) { return s * s; });
  CHECK(fstar(-0.3) == doctest::Approx(0.09));

  const auto curve = line(near_loop());
  const ReflectedCurve Yc(curve);
  double prev = 1.0;
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const Vec3 right = (Yc(h) - Yc(0.0)) / h;
    const Vec3 left = (Yc(0.0) - Yc(-h)) / h;
    const double jump = (right - left).norm();
    CHECK(jump < prev);
    prev = jump;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("stretch map") {
  for (double eps : {0.1, 0.04, 0.01}) {
    const StretchMap m = StretchMap::for_eps(eps);
    CHECK(m.ell >= eps * eps / 2.0);
    CHECK(m.ell <= eps * eps);
    for (double t : {0.0, 0.3, 0.99}) CHECK(std::abs(m.forward(m.inverse(t)) - t) < 1e-15);
  }
}

TEST_CASE("R_eps identities and bounds") {
  const auto straight = line(StraightCurve{});
  const VesselGeometry g(straight, RadiusProfile{}, 0.02);
  for (double s : {0.1, 0.5, 0.9}) {
    const double t = g.stretch().forward(s);
    for (double th : {0.0, 2.0}) CHECK(g.r_eps(s, t, th).norm() == doctest::Approx(0.02 * g.radius().a(s)).epsilon(1e-12));
  }

  // Upper/lower bounds against sqrt(sbar^2 + eps^2 a^2) on a grid (arc vessel).
  const auto arc = line(ArcCurve{2.0});
  const VesselGeometry ga(arc, RadiusProfile{}, 0.02);
  const double kstar = arc->kappa_star();
  double lower = 1e300;
  double worst = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double s = i / 40.0;
    for (int j = 0; j <= 80; ++j) {
      const double t = -1.0 + 2.0 * j / 80.0;
      const double sbar = s - ga.stretch().inverse(t);
      const double ref = std::sqrt(sbar * sbar + std::pow(0.02 * ga.radius().a(s), 2));
      for (int k = 0; k < 8; ++k) {
        const double R = ga.r_eps(s, t, 2 * kPi * k / 8).norm();
        CHECK(R > 0.0);
        if (ref > 0.0) lower = std::min(lower, R / ref);
        if (sbar != 0.0) worst = std::max(worst, std::abs(R - ref) / (sbar * sbar));
      }
    }
  }
  CHECK(lower > 0.05);
  MESSAGE("max |R - ref| / sbar^2 = " << worst << ", kappa_star / 2 = " << 0.5 * kstar);
  CHECK(worst <= 0.5 * kstar);
}

TEST_CASE("validation verdicts") {
  const auto straight = line(StraightCurve{});
  CHECK(validate_geometry(VesselGeometry(straight, RadiusProfile{}, 0.01)).accepted());

  const auto loop = line(near_loop());
  for (double eps : {0.02, 0.01, 0.005}) {
    const auto rep = validate_geometry(VesselGeometry(loop, RadiusProfile{}, eps));
    CHECK(rep.accepted());
    CHECK(rep.c_gamma > 0.0);
  }

  // A centerline dipping below the wall is rejected while it is built.
  try {
    line(SplineCurve{{{0, 0, 0}, {0, 0, 0.2}, {0.3, 0, 0.1}, {0.6, 0, -0.1}}});
    FAIL("expected a wall-contact rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
    CHECK(std::string(e.what()).find("wall_contact") != std::string::npos);
  }

  RadiusSpec constant;
  constant.family = RadiusFamily::constant;
  const auto rep_const = validate_geometry(VesselGeometry(straight, RadiusProfile{constant}, 0.01));
  CHECK_FALSE(rep_const.accepted());
  CHECK(has_failed(rep_const, "spheroidal_end"));
  CHECK(rep_const.failures().find("spheroidal_end") != std::string::npos);
}

TEST_CASE("radius profile metadata") {
  const RadiusProfile a{};
  CHECK(a.a(0.0) == doctest::Approx(1.0));
  CHECK(a.a(1.0) == 0.0);
  CHECK(std::isfinite(a.a_star()));
  CHECK(std::isfinite(a.a_starstar()));
  for (double s = 0.9; s < 1.0; s += 0.01) CHECK(a.a(s + 0.005) < a.a(s));
}
