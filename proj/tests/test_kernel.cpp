#include "doctest.h"

#include "oracle.hpp"
#include "sbp/error.hpp"
#include "sbp/kernel.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace sbp;

namespace {

constexpr double kPi = std::numbers::pi;

VesselGeometry vessel(const CurveSpec& spec, double eps, RadiusSpec radius = {}) {
  return VesselGeometry(std::make_shared<const Centerline>(Centerline::build(spec)), RadiusProfile{radius}, eps);
}

SplineCurve near_loop() {
  return SplineCurve{{{0, 0, 0}, {0, 0, 0.25}, {0.05, 0, 0.4}, {0.2, 0, 0.45}, {0.3, 0, 0.35}, {0.25, 0, 0.2},
                      {0.1, 0, 0.15}, {0.03, 0, 0.17}}};
}

}  // namespace

TEST_CASE("Neumann Green's function") {
  CHECK(green_neumann({0, 0, 1}, {0, 0, 2}) == doctest::Approx(1.0 / (3.0 * kPi)).epsilon(1e-15));
  CHECK_THROWS_AS(green_neumann({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}), Error);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0), up(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vec3 x(u(rng), u(rng), up(rng)), y(u(rng), u(rng), up(rng) + 0.05);
    const double gxy = green_neumann(x, y), gyx = green_neumann(y, x);
    CHECK(std::abs(gxy - gyx) <= 1e-14 * std::abs(gxy));
    // Wall condition by central differences at z = 0.
    const double h = 1e-5;
    const Vec3 w(x.x(), x.y(), 0.0);
    const double dz = (green_neumann(w + h * Vec3::UnitZ(), y) - green_neumann(w - h * Vec3::UnitZ(), y)) / (2 * h);
    CHECK(std::abs(dz) < 1e-8);
    // Gradient against central differences.
    const Vec3 g = green_neumann_gradient(x + Vec3(0, 0, 0.1), y);
    for (int d = 0; d < 3; ++d) {
      Vec3 e = Vec3::Zero();
      e[d] = 1e-6;
      const Vec3 xx = x + Vec3(0, 0, 0.1);
      const double fd = (green_neumann(xx + e, y) - green_neumann(xx - e, y)) / 2e-6;
      CHECK(std::abs(fd - g[d]) <= 1e-6 * (1.0 + std::abs(g[d])));
    }
  }
}

TEST_CASE("elliptic closed form matches adaptive theta quadrature") {
  for (auto [A, B, C] : {std::tuple{1.0, 0.3, 0.2}, std::tuple{2.0, -1.9, 0.1}, std::tuple{0.01, 0.0, 0.0}}) {
    const double adaptive = oracle::adaptive(
        [&](double t) { return 1.0 / std::sqrt(A + B * std::cos(t) + C * std::sin(t)); },
        {0.0, kPi / 2, kPi, 1.5 * kPi, 2 * kPi});
    CHECK(oracle::theta_integral_elliptic(A, B, C) == doctest::Approx(adaptive).epsilon(1e-12));
  }
}

TEST_CASE("kernel values") {
  RadiusSpec constant;
  constant.family = RadiusFamily::constant;
  constant.value = 0.8;
  const double eta = 0.7;
  {
    const auto g = vessel(StraightCurve{}, 0.02, constant);
    const KernelEvaluator K(g, eta);
    for (double s : {0.2, 0.5}) {
      const double t = g.stretch().forward(s);
      const double expect = eta / (4 * kPi * 0.02 * 0.8);
      CHECK(K(s, t) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(oracle::kernel_adaptive(g, eta, s, t) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  const auto g = vessel(near_loop(), 0.02);
  const KernelEvaluator K(g, eta);
  // Well separated: point-source value up to O(eps^2).
  for (auto [s, t] : {std::pair{0.1, 0.8}, std::pair{0.7, -0.1}, std::pair{0.2, -0.9}}) {
    const double far = eta / (4 * kPi) / (g.centerline().position(s) - g.source_point(t)).norm();
    CHECK(std::abs(K(s, t) - far) <= 50 * 0.02 * 0.02 * far);
    CHECK(K(s, t) == doctest::Approx(oracle::kernel_adaptive(g, eta, s, t)).epsilon(1e-10));
  }

  // Random spot checks against both oracles.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> us(0.0, 1.0), ut(-1.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const double s = us(rng);
    const double t = k % 2 ? ut(rng) : g.stretch().forward(s) + 0.05 * ut(rng) * (1 - s);
    if (std::abs(t) > 1.0) continue;
    const double v = K(s, t);
    CHECK(v > 0.0);
    CHECK(v == doctest::Approx(oracle::kernel_adaptive(g, eta, s, t)).epsilon(1e-9));
    CHECK(v == doctest::Approx(oracle::kernel_elliptic(g, eta, s, t)).epsilon(1e-9));
  }

  // Doubling the initial theta order changes values by < 1e-12.
  KernelOptions fine;
  fine.theta.min_order = 128;
  const KernelEvaluator K2(g, eta, fine);
  for (double s : {0.05, 0.4, 0.95}) {
    for (double t : {-0.5, 0.3, g.stretch().forward(s)}) {
      CHECK(std::abs(K(s, t) - K2(s, t)) <= 1e-12 * K(s, t));
    }
  }
}

TEST_CASE("kernel matrix assembly") {
  const double eta = 1.0;
  const auto g = vessel(StraightCurve{}, 0.02);
  const KernelEvaluator K(g, eta);
  const Mesh1D mesh = build_mesh(64, 2.0, g.radius(), 1.0);
  const KernelMatrix km = assemble_kernel_matrix(K, mesh);
  CHECK(km.K.allFinite());
  CHECK(km.K.minCoeff() >= 0.0);
  CHECK(km.self_check <= 1e-12);

  // Folding identity on the full matrix.
  const Eigen::MatrixXd unfolded = assemble_unfolded(K, mesh) * even_extension_matrix(mesh.intervals());
  CHECK((unfolded - km.K).cwiseAbs().maxCoeff() <= 1e-12 * km.K.cwiseAbs().maxCoeff());

  // f = 1: row sums against adaptive integration of the kernel in t.
  const Eigen::VectorXd rows = km.K * Eigen::VectorXd::Ones(mesh.nodes());
  for (int i : {0, 10, 32, 50, 63}) {
    const double s = mesh.s[static_cast<std::size_t>(i)];
    CHECK(rows[i] == doctest::Approx(oracle::kernel_row_integral(g, eta, s)).epsilon(1e-8));
  }
}

TEST_CASE("kernel row sums grow logarithmically in 1/eps") {
  auto max_row = [](double eps) {
    const auto g = vessel(StraightCurve{}, eps);
    const KernelEvaluator K(g, 1.0);
    const Mesh1D mesh = build_mesh(64, 2.0, g.radius(), 1.0);
    const KernelMatrix km = assemble_kernel_matrix(K, mesh);
    return (km.K * Eigen::VectorXd::Ones(mesh.nodes())).maxCoeff();
  };
  const double ratio = max_row(0.01) / max_row(0.04);
  const double log_ratio = std::log(0.01) / std::log(0.04);
  MESSAGE("row-sum ratio " << ratio << " vs log ratio " << log_ratio);
  CHECK(std::abs(ratio / log_ratio - 1.0) <= 0.3);
}

TEST_CASE("slender-body operator at field points") {
  const auto g = vessel(near_loop(), 0.02);
  const Mesh1D mesh = build_mesh(64, 2.0, g.radius(), 1.0);
  std::vector<double> f(mesh.s.size()), zero(mesh.s.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::cos(2.0 * mesh.s[i]) + mesh.s[i];

  const Vec3 x(0.1, 0.05, 0.3);
  CHECK(s_n_evaluate(g, mesh.s, zero, x) == 0.0);
  const double v = s_n_evaluate(g, mesh.s, f, x);
  CHECK(v == doctest::Approx(s_n_evaluate_half(g, mesh.s, f, x)).epsilon(1e-12));
  CHECK(v == doctest::Approx(oracle::s_n_adaptive(g, mesh.s, f, x)).epsilon(1e-9));

  // Gradient against central differences.
  const Vec3 grad = s_n_gradient(g, mesh.s, f, x);
  for (int d = 0; d < 3; ++d) {
    Vec3 e = Vec3::Zero();
    e[d] = 1e-5;
    const double fd = (s_n_evaluate(g, mesh.s, f, x + e) - s_n_evaluate(g, mesh.s, f, x - e)) / 2e-5;
    CHECK(fd == doctest::Approx(grad[d]).epsilon(1e-6));
  }

  // Far field: |x| S_N[f](x) -> (1/2pi) int_0^1 f dt.
  const auto w = trapezoid_weights(mesh.s);
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) total += w[i] * f[i];
  const Vec3 far = 1e3 * Vec3(0.6, 0.0, 0.8);
  CHECK(far.norm() * s_n_evaluate(g, mesh.s, f, far) == doctest::Approx(total / (2 * kPi)).epsilon(0.01));

  // Inside the vessel.
  const Vec3 inside = g.centerline().position(0.5);
  try {
    s_n_evaluate(g, mesh.s, f, inside);
    FAIL("expected inside_vessel");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("inside_vessel") != std::string::npos);
  }
}

TEST_CASE("symmetrized quadratic form and near-positivity") {
  const auto g = vessel(StraightCurve{}, 0.02);
  const KernelEvaluator K(g, 1.0);
  const Mesh1D mesh = build_mesh(64, 2.0, g.radius(), 1.0);
  const KernelMatrix km = assemble_kernel_matrix(K, mesh);
  CHECK(symmetrized_quadratic_form(km, std::vector<double>(mesh.s.size(), 0.0)) == 0.0);
  std::vector<double> one(mesh.s.size(), 1.0);
  CHECK(symmetrized_quadratic_form(km, one) > 0.0);
  const auto rep = near_positivity(km, mesh, 0.9);
  CHECK(rep.min_quotient >= -1e-10);
  CHECK(rep.max_quotient > 0.0);
}
