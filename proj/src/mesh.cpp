#include "sbp/mesh.hpp"

#include "sbp/error.hpp"
#include "sbp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sbp {

namespace {

// int_lo^hi a(s) ds in the variable u = sqrt(1 - s), which removes the
// square-root behaviour of a spheroidal end at s = 1.
double integrate_radius(const RadiusProfile& radius, double lo, double hi) {
  const double u0 = std::sqrt(1.0 - hi);
  const double u1 = std::sqrt(1.0 - lo);
  const double c = 0.5 * (u0 + u1);
  const double r = 0.5 * (u1 - u0);
  const auto& rule = gauss8();
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.x.size(); ++q) {
    const double u = c + r * rule.x[q];
    sum += rule.w[q] * radius.a(1.0 - u * u) * 2.0 * u;
  }
  return r * sum;
}

}  // namespace

std::vector<double> graded_nodes(int intervals, double gamma) {
  if (intervals < 1) fail(ErrorCode::argument, "mesh needs at least one interval");
  if (!(gamma >= 1.0)) fail(ErrorCode::argument, "grading exponent must be >= 1");
  std::vector<double> s(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) {
    s[static_cast<std::size_t>(i)] = 1.0 - std::pow(1.0 - static_cast<double>(i) / intervals, gamma);
  }
  s.front() = 0.0;
  s.back() = 1.0;
  return s;
}

double Mesh1D::cell(int i) const {
  const int n = intervals();
  if (i == 0) return 0.5 * h(0);
  if (i == n) return 0.5 * h(n - 1);
  return 0.5 * (s[static_cast<std::size_t>(i + 1)] - s[static_cast<std::size_t>(i - 1)]);
}

Mesh1D build_mesh(int intervals, double gamma, const RadiusProfile& radius,
                  double alpha_coefficient) {
  if (intervals < 16) {
    fail(ErrorCode::argument, "mesh needs N >= 16 intervals, got " + std::to_string(intervals));
  }
  if (!(alpha_coefficient >= 0.0) || !std::isfinite(alpha_coefficient)) {
    fail(ErrorCode::argument, "alpha coefficient must be finite and nonnegative");
  }
  Mesh1D m;
  m.gamma = gamma;
  m.s = graded_nodes(intervals, gamma);
  const std::size_t n = m.s.size();
  m.a.resize(n);
  m.a_aprime.resize(n);
  m.alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.a[i] = radius.a(m.s[i]);
    m.a_aprime[i] = radius.a_aprime(m.s[i]);
  }
  // Finite-volume reaction coefficient: the cell average of alpha, so that the
  // tip cell keeps its (nonzero) share of the exchange although a(1) = 0.
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = i > 0 ? 0.5 * (m.s[i - 1] + m.s[i]) : 0.0;
    const double hi = i + 1 < n ? 0.5 * (m.s[i] + m.s[i + 1]) : 1.0;
    m.alpha[i] = alpha_coefficient * integrate_radius(radius, lo, hi) / (hi - lo);
  }
  m.mid.resize(n - 1);
  m.a_mid.resize(n - 1);
  m.a4_mid.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    m.mid[i] = 0.5 * (m.s[i] + m.s[i + 1]);
    m.a_mid[i] = radius.a(m.mid[i]);
    m.a4_mid[i] = std::pow(m.a_mid[i], 4);
  }

  // A(s) = int_s^1 a at the nodes, accumulated from the tip.
  std::vector<double> tail(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) tail[i] = tail[i + 1] + integrate_radius(radius, m.s[i], m.s[i + 1]);
  // transmissibility = A(mid) / int A / a^4 over the interval, in u = sqrt(1 - s).
  const auto& rule = gauss8();
  m.transmissibility.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double hi = m.s[i + 1];
    const double u0 = std::sqrt(1.0 - hi);
    const double u1 = std::sqrt(1.0 - m.s[i]);
    const double c = 0.5 * (u0 + u1);
    const double r = 0.5 * (u1 - u0);
    double resistance = 0.0;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const double u = c + r * rule.x[q];
      const double s = 1.0 - u * u;
      const double A = tail[i + 1] + integrate_radius(radius, s, hi);
      resistance += rule.w[q] * A / std::pow(radius.a(s), 4) * 2.0 * u;
    }
    resistance *= r;
    const double a_mid = tail[i + 1] + integrate_radius(radius, m.mid[i], hi);
    m.transmissibility[i] = a_mid / resistance;
  }
  return m;
}

HatLocation locate(const std::vector<double>& nodes, double t) {
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  int k = static_cast<int>(it - nodes.begin()) - 1;
  k = std::clamp(k, 0, static_cast<int>(nodes.size()) - 2);
  const double lo = nodes[static_cast<std::size_t>(k)];
  const double hi = nodes[static_cast<std::size_t>(k + 1)];
  return {k, std::clamp((t - lo) / (hi - lo), 0.0, 1.0)};
}

}  // namespace sbp
