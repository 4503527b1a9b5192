#include "doctest.h"

#include "sbp/error.hpp"
#include "sbp/harness.hpp"
#include "sbp/solver1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace sbp;

namespace {

constexpr double kPi = std::numbers::pi;

// (a^4 v_s)_s for v = s (1 - s^2) and a = sqrt(1 - s^2).
double manufactured_rhs(double s) { return 2.0 * s * (1.0 - s * s) * (9.0 * s * s - 5.0); }

double manufactured_error(int n, double gamma) {
  const Mesh1D mesh = build_mesh(n, gamma, RadiusProfile{}, 1.0);
  std::vector<double> v(mesh.s.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = mesh.s[i] * (1.0 - mesh.s[i] * mesh.s[i]);
  const std::vector<double> dv = discretize_local(mesh).apply(v);
  double err = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) err = std::max(err, std::abs(dv[i] - manufactured_rhs(mesh.s[i])));
  return err;
}

std::vector<double> random_piecewise(std::mt19937_64& rng, const std::vector<double>& s) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
  std::vector<double> breaks{0.0, 1.0};
  const int pieces = 1 + static_cast<int>(pos(rng) * 8);
  for (int k = 1; k < pieces; ++k) breaks.push_back(pos(rng));
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> values(breaks.size());
  for (double& v : values) v = u(rng);
  std::vector<double> f(s.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto k = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), s[i]) - breaks.begin()) - 1;
    f[i] = values[std::min(k, values.size() - 1)];
    peak = std::max(peak, std::abs(f[i]));
  }
  for (double& v : f) v /= peak;
  return f;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Scene small(const std::string& name, int nodes = 200) {
  Scene s = builtin_scene(name);
  s.nodes = nodes;
  return s;
}

}  // namespace

TEST_CASE("graded nodes") {
  const auto u = graded_nodes(4, 1.0);
  const std::vector<double> expect_u{0, 0.25, 0.5, 0.75, 1};
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == doctest::Approx(expect_u[i]).epsilon(1e-15));
  const auto g = graded_nodes(4, 2.0);
  const std::vector<double> expect_g{0, 0.4375, 0.75, 0.9375, 1};
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(expect_g[i]).epsilon(1e-15));
  const auto f = graded_nodes(100, 2.0);
  CHECK(f.back() - f[f.size() - 2] == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK_THROWS_AS(build_mesh(4, 2.0, RadiusProfile{}, 1.0), Error);
  CHECK_THROWS_AS(graded_nodes(10, 0.5), Error);
}

TEST_CASE("finite-volume stencil") {
  RadiusSpec unit;
  unit.family = RadiusFamily::constant;
  const Mesh1D mesh = build_mesh(32, 1.0, RadiusProfile{unit}, 1.0);
  const TridiagonalOperator D = discretize_local(mesh);
  const double h = 1.0 / 32;
  for (int i = 1; i < 32; ++i) {
    const auto k = static_cast<std::size_t>(i);
    CHECK(D.lower[k] == doctest::Approx(1.0 / (h * h)));
    CHECK(D.diag[k] == doctest::Approx(-2.0 / (h * h)));
    CHECK(D.upper[k] == doctest::Approx(1.0 / (h * h)));
  }
  std::vector<double> lin(mesh.s.size());
  for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = 3.0 * mesh.s[i] - 1.0;
  const auto d = D.apply(lin);
  for (std::size_t i = 1; i + 1 < lin.size(); ++i) CHECK(std::abs(d[i]) < 1e-9);
}

TEST_CASE("manufactured solution of the degenerate operator") {
  double prev = manufactured_error(100, 2.0);
  for (int n : {200, 400, 800}) {
    const double e = manufactured_error(n, 2.0);
    const double order = std::log2(prev / e);
    MESSAGE("N=" << n << " error " << e << " order " << order);
    CHECK(order >= 1.5);
    prev = e;
  }
}

TEST_CASE("local solve and maximum principle") {
  const Mesh1D mesh = build_mesh(200, 2.0, RadiusProfile{}, 2 * kPi * 200 / 4.7426);
  const auto zero = solve_local(mesh, std::vector<double>(mesh.s.size(), 0.0));
  CHECK(max_abs(zero.v) == 0.0);
  CHECK(zero.m_matrix);
  CHECK(local_operator_is_m_matrix(discretize_local(mesh), mesh));

  // No-kernel limit of the coupled system: (a^4 v_s)_s - alpha v = alpha p0.
  const double p0 = 1.5;
  const auto nokernel = solve_local(mesh, std::vector<double>(mesh.s.size(), p0));
  for (double v : nokernel.v) {
    CHECK(v + p0 >= 0.0);
    CHECK(v + p0 <= p0);
  }

  std::mt19937_64 rng(2024);
  for (double coeff : {1.0, 2 * kPi * 200 / 4.7426, 1e4}) {
    const Mesh1D m = build_mesh(200, 2.0, RadiusProfile{}, coeff);
    for (int trial = 0; trial < 100; ++trial) {
      const auto f = random_piecewise(rng, m.s);
      const auto sol = solve_local(m, f);
      CHECK(sol.m_matrix);
      CHECK(max_abs(sol.v) <= 2.0 * max_abs(f));
    }
  }
  CHECK_THROWS_AS(solve_local(mesh, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("weighted norms") {
  const Mesh1D mesh = build_mesh(400, 2.0, RadiusProfile{}, 1.0);
  const std::vector<double> zero(mesh.s.size(), 0.0);
  const auto one = weighted_norms(mesh, std::vector<double>(mesh.s.size(), 1.0), zero);
  CHECK(one.ha == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.a2_ps_l2 == 0.0);
  const auto lin = weighted_norms(mesh, mesh.s, zero);
  CHECK(lin.a2_ps_l2 * lin.a2_ps_l2 == doctest::Approx(8.0 / 15.0).epsilon(1e-4));
  CHECK(lin.p_l2 * lin.p_l2 == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("dense solve: limits and linearity") {
  {
    Scene s = small("straight");
    s.omega = 0.0;
    const auto prob = solve_scene(s);
    for (double p : prob->solution.p) CHECK(std::abs(p - s.p0) < 1e-10);
  }
  {
    Scene s = small("near_loop");
    s.p0 = 0.0;
    const auto prob = solve_scene(s);
    CHECK(max_abs(prob->solution.p) == 0.0);
  }
  const auto prob = solve_scene(small("near_loop"));
  const Solution twice = solve_psb(prob->mesh, prob->kernel, 2.0);
  for (std::size_t i = 0; i < twice.p.size(); ++i) {
    CHECK(std::abs(twice.p[i] - 2.0 * prob->solution.p[i]) <= 1e-12 * std::abs(twice.p[i]) + 1e-14);
  }
  CHECK(prob->solution.residual < 1e-12);
  CHECK_FALSE(prob->solution.condition_warning);
}

TEST_CASE("dense solve: qualitative behaviour of the reference scenes") {
  const auto straight = solve_scene(small("straight", 400));
  const auto& p = straight->solution.p;
  CHECK(p.front() == doctest::Approx(1.0));
  CHECK(p.back() > 0.0);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) CHECK(p[i + 1] <= p[i]);

  const auto loop = solve_scene(small("near_loop", 400));
  const auto& q = loop->solution.p;
  const auto it = std::min_element(q.begin(), q.end());
  const auto imin = static_cast<std::size_t>(it - q.begin());
  MESSAGE("near-loop minimum " << *it << " at node " << imin << ", tip " << q.back());
  CHECK(imin > 0);
  CHECK(imin + 1 < q.size());
  CHECK(q.back() > *it + 1e-3);
}

TEST_CASE("coercivity diagnostic") {
  const auto prob = solve_scene(small("straight", 100));
  const CoercivityReport c = coercivity_diagnostic(prob->mesh, prob->kernel, 32, 12345);
  CHECK(c.samples == 32);
  CHECK(c.min_ratio > 0.0);
  CHECK(c.max_ratio >= c.min_ratio);
}
