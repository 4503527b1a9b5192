#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace sbp {

/// Gauss-Legendre rule with `Order` points on [-1, 1].
template <int Order>
struct GaussRule {
  std::array<double, Order> x{};
  std::array<double, Order> w{};
};

/// Fixed 8-point rule used on every panel of the graded t-quadrature.
const GaussRule<8>& gauss8();

/// Splits [a, b] bisectively until each panel is no longer than `ratio` times
/// the distance scale `dist` measured at its midpoint, then calls
/// visit(lo, hi) for the panels in increasing order.
template <class Dist, class Visit>
void graded_panels(double a, double b, const Dist& dist, double ratio, Visit&& visit, int depth = 0) {
  const double mid = 0.5 * (a + b);
  if (depth < 60 && (b - a) > ratio * dist(mid) && (b - a) > 1e-15) {
    graded_panels(a, mid, dist, ratio, visit, depth + 1);
    graded_panels(mid, b, dist, ratio, visit, depth + 1);
    return;
  }
  visit(a, b);
}

/// Periodic trapezoid rule for integrals over [0, 2 pi), starting at
/// `min_order` points and doubling (reusing previous nodes) until two
/// successive values differ by less than `rel_tol` relative.
struct ThetaRule {
  int min_order = 64;
  int max_order = 4096;
  double rel_tol = 1e-11;
};

struct ThetaResult {
  double value = 0.0;
  int order = 0;
};

template <class F>
ThetaResult periodic_trapezoid(const F& f, const ThetaRule& rule) {
  const double two_pi = 2.0 * std::numbers::pi;
  int n = rule.min_order;
  double sum_half = 0.0;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = f(two_pi * k / n);
    sum += v;
    if (k % 2 == 0) sum_half += v;
  }
  double prev = two_pi * sum_half / (n / 2);
  double cur = two_pi * sum / n;
  while (std::abs(cur - prev) > rule.rel_tol * std::abs(cur) && 2 * n <= rule.max_order) {
    for (int k = 0; k < n; ++k) sum += f(two_pi * (2 * k + 1) / (2 * n));
    n *= 2;
    prev = cur;
    cur = two_pi * sum / n;
  }
  return {cur, n};
}

/// Composite trapezoid weights for the nodes of a 1D mesh.
std::vector<double> trapezoid_weights(const std::vector<double>& nodes);

}  // namespace sbp
