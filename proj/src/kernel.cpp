#include "sbp/kernel.hpp"

#include "sbp/error.hpp"
#include "sbp/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace sbp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kThetaTable = 4096;

struct ThetaTable {
  std::array<double, kThetaTable> c{};
  std::array<double, kThetaTable> s{};
  ThetaTable() {
    for (int k = 0; k < kThetaTable; ++k) {
      const double th = 2.0 * kPi * k / kThetaTable;
      c[static_cast<std::size_t>(k)] = std::cos(th);
      s[static_cast<std::size_t>(k)] = std::sin(th);
    }
  }
};

const ThetaTable& theta_table() {
  static const ThetaTable table;
  return table;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Mean over theta of (A + B cos + C sin)^{-1/2}, by the doubling trapezoid rule.
double theta_mean(double A, double B, double C, const ThetaRule& rule, int* order_used) {
  const auto& tab = theta_table();
  auto f = [&](int k) {
    const double q = A + B * tab.c[static_cast<std::size_t>(k)] + C * tab.s[static_cast<std::size_t>(k)];
    if (!(q > 0.0)) fail(ErrorCode::numerical, "kernel evaluated on its own source point");
    return 1.0 / std::sqrt(q);
  };
  int n = rule.min_order;
  int stride = kThetaTable / n;
  double sum = 0.0;
  double sum_even = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = f(k * stride);
    sum += v;
    if (k % 2 == 0) sum_even += v;
  }
  double prev = sum_even / (n / 2);
  double cur = sum / n;
  while (std::abs(cur - prev) > rule.rel_tol * std::abs(cur) && 2 * n <= rule.max_order) {
    const int half = stride / 2;
    for (int k = 0; k < n; ++k) sum += f(k * stride + half);
    n *= 2;
    stride = half;
    prev = cur;
    cur = sum / n;
  }
  if (order_used) *order_used = n;
  return cur;
}

void check_theta_rule(const ThetaRule& rule) {
  if (!power_of_two(rule.min_order) || !power_of_two(rule.max_order) || rule.min_order < 4 ||
      rule.max_order > kThetaTable || rule.min_order > rule.max_order) {
    fail(ErrorCode::argument, "theta orders must be powers of two between 4 and " +
                                  std::to_string(kThetaTable));
  }
}

// Visits the Gauss nodes (t, weight, interval k, right hat weight) of the
// graded panel quadrature on [0, 1] for the given distance function.
template <class Dist, class Visit>
void graded_quadrature(const std::vector<double>& nodes, const Dist& dist, double ratio,
                       Visit&& visit) {
  const auto& g = gauss8();
  const int n = static_cast<int>(nodes.size()) - 1;
  for (int k = 0; k < n; ++k) {
    const double lo = nodes[static_cast<std::size_t>(k)];
    const double hi = nodes[static_cast<std::size_t>(k + 1)];
    const double width = hi - lo;
    graded_panels(lo, hi, dist, ratio, [&](double a, double b) {
      const double mid = 0.5 * (a + b);
      const double half = 0.5 * (b - a);
      for (std::size_t q = 0; q < 8; ++q) {
        const double t = mid + half * g.x[q];
        visit(t, half * g.w[q], k, (t - lo) / width);
      }
    });
  }
}

}  // namespace

double green_neumann(const Vec3& x, const Vec3& y) {
  const double d1 = (x - y).norm();
  const double d2 = (x - reflect_across_wall(y)).norm();
  if (d1 == 0.0 || d2 == 0.0) fail(ErrorCode::argument, "singular_evaluation: x coincides with a source");
  return (1.0 / d1 + 1.0 / d2) / (4.0 * kPi);
}

Vec3 green_neumann_gradient(const Vec3& x, const Vec3& y) {
  const Vec3 r1 = x - y;
  const Vec3 r2 = x - reflect_across_wall(y);
  const double d1 = r1.norm();
  const double d2 = r2.norm();
  if (d1 == 0.0 || d2 == 0.0) fail(ErrorCode::argument, "singular_evaluation: x coincides with a source");
  return -(r1 / (d1 * d1 * d1) + r2 / (d2 * d2 * d2)) / (4.0 * kPi);
}

// ---------------------------------------------------------------------------

KernelEvaluator::KernelEvaluator(VesselGeometry geometry, double eta, KernelOptions options)
    : geometry_(std::move(geometry)), eta_(eta), options_(options) {
  check_theta_rule(options_.theta);
  if (!(options_.panel_ratio > 0.0)) fail(ErrorCode::argument, "panel ratio must be positive");
}

KernelEvaluator::Section KernelEvaluator::section(double s) const {
  const FrameSample f = geometry_.centerline().frame(s);
  return {s, f.X, f.e1, f.e2, geometry_.eps() * geometry_.radius().a(s)};
}

double KernelEvaluator::value(const Section& sec, double t, int* theta_order) const {
  const Vec3 D = sec.X - geometry_.source_point(t);
  const double r = sec.radius;
  const double A = D.squaredNorm() + r * r;
  const double B = 2.0 * r * D.dot(sec.e1);
  const double C = 2.0 * r * D.dot(sec.e2);
  return eta_ / (4.0 * kPi) * theta_mean(A, B, C, options_.theta, theta_order);
}

double KernelEvaluator::integrand(double s, double t, double theta) const {
  return 1.0 / geometry_.r_eps(s, t, theta).norm();
}

void kernel_row(const KernelEvaluator& kernel, const std::vector<double>& nodes, double s,
                double* folded, double* unfolded, int* theta_order, std::size_t* evaluations) {
  const VesselGeometry& geom = kernel.geometry();
  const Centerline& line = geom.centerline();
  const double L = 1.0 - geom.stretch().ell;
  const auto sec = kernel.section(s);
  const double r = sec.radius;
  const double r2 = r * r;
  const double scale = kernel.eta() / (4.0 * kPi);
  const ThetaRule& rule = kernel.options().theta;
  const int n = static_cast<int>(nodes.size()) - 1;

  auto dist = [&](double t) {
    const Vec3 P = line.position(L * t);
    const double dp = (sec.X - P).squaredNorm();
    const double dm = (sec.X - reflect_across_wall(P)).squaredNorm();
    return std::sqrt(std::min(dp, dm) + r2) / L;
  };
  auto mean_inv = [&](const Vec3& D, int* order) {
    return theta_mean(D.squaredNorm() + r2, 2.0 * r * D.dot(sec.e1), 2.0 * r * D.dot(sec.e2), rule,
                      order);
  };

  std::fill(folded, folded + n + 1, 0.0);
  if (unfolded) std::fill(unfolded, unfolded + 2 * n + 1, 0.0);
  int max_order = 0;
  std::size_t count = 0;
  graded_quadrature(nodes, dist, kernel.options().panel_ratio,
                    [&](double t, double w, int k, double lam) {
                      const Vec3 P = line.position(L * t);
                      int o1 = 0;
                      int o2 = 0;
                      const double kp = scale * mean_inv(sec.X - P, &o1);
                      const double km = scale * mean_inv(sec.X - reflect_across_wall(P), &o2);
                      max_order = std::max({max_order, o1, o2});
                      count += 2;
                      const double sum = w * (kp + km);
                      folded[k] += sum * (1.0 - lam);
                      folded[k + 1] += sum * lam;
                      if (unfolded) {
                        unfolded[n + k] += w * kp * (1.0 - lam);
                        unfolded[n + k + 1] += w * kp * lam;
                        unfolded[n - k] += w * km * (1.0 - lam);
                        unfolded[n - k - 1] += w * km * lam;
                      }
                    });
  if (theta_order) *theta_order = max_order;
  if (evaluations) *evaluations = count;
}

Eigen::MatrixXd even_extension_matrix(int intervals) {
  const int n = intervals;
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(2 * n + 1, n + 1);
  for (int k = -n; k <= n; ++k) E(k + n, std::abs(k)) = 1.0;
  return E;
}

Eigen::MatrixXd assemble_unfolded(const KernelEvaluator& kernel, const Mesh1D& mesh) {
  const int n = mesh.intervals();
  Eigen::MatrixXd U(n + 1, 2 * n + 1);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n) + 1);
  parallel_for(rows.size(), [&](std::size_t i) {
    std::vector<double> f(static_cast<std::size_t>(n) + 1);
    rows[i].resize(2 * static_cast<std::size_t>(n) + 1);
    kernel_row(kernel, mesh.s, mesh.s[i], f.data(), rows[i].data());
  });
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= 2 * n; ++j) U(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return U;
}

KernelMatrix assemble_kernel_matrix(const KernelEvaluator& kernel, const Mesh1D& mesh) {
  const int n = mesh.intervals();
  const std::size_t rows = static_cast<std::size_t>(n) + 1;
  KernelMatrix km;
  km.nodes = mesh.s;
  km.quad_weights = trapezoid_weights(mesh.s);
  km.K.resize(n + 1, n + 1);

  std::vector<int> orders(rows, 0);
  std::vector<std::size_t> counts(rows, 0);
  std::vector<double> buffer(rows * rows);
  parallel_for(rows, [&](std::size_t i) {
    kernel_row(kernel, mesh.s, mesh.s[i], buffer.data() + i * rows, nullptr, &orders[i], &counts[i]);
  });
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < rows; ++j) km.K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buffer[i * rows + j];
    km.theta_order = std::max(km.theta_order, orders[i]);
    km.kernel_evaluations += counts[i];
  }

  // Self-check: the unfolded quadrature folded by even extension must
  // reproduce the stored rows.
  const std::array<int, 4> spot{0, n / 3, (2 * n) / 3, n};
  std::vector<double> f(rows);
  std::vector<double> u(2 * rows - 1);
  for (int i : spot) {
    kernel_row(kernel, mesh.s, mesh.s[static_cast<std::size_t>(i)], f.data(), u.data());
    double scale = 0.0;
    double diff = 0.0;
    for (int j = 0; j <= n; ++j) {
      const double fold = j == 0 ? u[static_cast<std::size_t>(n)]
                                 : u[static_cast<std::size_t>(n + j)] + u[static_cast<std::size_t>(n - j)];
      scale = std::max(scale, std::abs(km.K(i, j)));
      diff = std::max(diff, std::abs(fold - km.K(i, j)));
    }
    km.self_check = std::max(km.self_check, scale > 0.0 ? diff / scale : diff);
  }
  if (km.self_check > 1e-9) {
    fail(ErrorCode::numerical, "kernel_self_check: folded and unfolded assembly differ by " +
                                   std::to_string(km.self_check));
  }
  return km;
}

// ---------------------------------------------------------------------------

FieldWeights field_weights(const VesselGeometry& geom, const std::vector<double>& nodes,
                           const Vec3& x, bool with_gradient, double panel_ratio) {
  const Centerline& line = geom.centerline();
  const double L = 1.0 - geom.stretch().ell;
  const int n = static_cast<int>(nodes.size()) - 1;
  FieldWeights fw;
  fw.value = Eigen::VectorXd::Zero(n + 1);
  if (with_gradient) fw.gradient = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, n + 1);
  const double c = 1.0 / (4.0 * kPi);

  auto dist = [&](double t) {
    const Vec3 P = line.position(L * t);
    return std::sqrt(std::min((x - P).squaredNorm(), (x - reflect_across_wall(P)).squaredNorm())) / L;
  };
  graded_quadrature(nodes, dist, panel_ratio, [&](double t, double w, int k, double lam) {
    const Vec3 P = line.position(L * t);
    const Vec3 r1 = x - P;
    const Vec3 r2 = x - reflect_across_wall(P);
    const double d1 = r1.norm();
    const double d2 = r2.norm();
    if (d1 == 0.0 || d2 == 0.0) fail(ErrorCode::numerical, "field point on the source curve");
    const double v = c * w * (1.0 / d1 + 1.0 / d2);
    fw.value[k] += v * (1.0 - lam);
    fw.value[k + 1] += v * lam;
    if (with_gradient) {
      const Vec3 gvec = -c * w * (r1 / (d1 * d1 * d1) + r2 / (d2 * d2 * d2));
      fw.gradient.col(k) += gvec * (1.0 - lam);
      fw.gradient.col(k + 1) += gvec * lam;
    }
  });
  return fw;
}

namespace {

void check_field_point(const VesselGeometry& geom, const std::vector<double>& nodes,
                       const std::vector<double>& f, const Vec3& x) {
  if (f.size() != nodes.size()) fail(ErrorCode::argument, "density and node counts differ");
  if (x.z() < 0.0) fail(ErrorCode::argument, "field point below the wall");
  if (geom.inside(x)) fail(ErrorCode::argument, "inside_vessel: field point lies inside the vessel");
}

}  // namespace

double s_n_evaluate(const VesselGeometry& geom, const std::vector<double>& nodes,
                    const std::vector<double>& f, const Vec3& x) {
  check_field_point(geom, nodes, f, x);
  const Centerline& line = geom.centerline();
  const double L = 1.0 - geom.stretch().ell;
  const double c = 1.0 / (4.0 * kPi);
  auto dist = [&](double t) {
    const Vec3 P = line.position(L * t);
    return std::sqrt(std::min((x - P).squaredNorm(), (x - reflect_across_wall(P)).squaredNorm())) / L;
  };
  // Reflected form: the [-1, 0] half uses the mirrored panels of [0, 1].
  double pos = 0.0;
  double neg = 0.0;
  graded_quadrature(nodes, dist, 0.75, [&](double t, double w, int k, double lam) {
    const double fk = f[static_cast<std::size_t>(k)] * (1.0 - lam) + f[static_cast<std::size_t>(k + 1)] * lam;
    pos += w * fk / (x - geom.source_point(t)).norm();
    neg += w * fk / (x - geom.source_point(-t)).norm();
  });
  return c * (neg + pos);
}

double s_n_evaluate_half(const VesselGeometry& geom, const std::vector<double>& nodes,
                         const std::vector<double>& f, const Vec3& x) {
  check_field_point(geom, nodes, f, x);
  const Centerline& line = geom.centerline();
  const double L = 1.0 - geom.stretch().ell;
  auto dist = [&](double t) {
    const Vec3 P = line.position(L * t);
    return std::sqrt(std::min((x - P).squaredNorm(), (x - reflect_across_wall(P)).squaredNorm())) / L;
  };
  double sum = 0.0;
  graded_quadrature(nodes, dist, 0.75, [&](double t, double w, int k, double lam) {
    const double fk = f[static_cast<std::size_t>(k)] * (1.0 - lam) + f[static_cast<std::size_t>(k + 1)] * lam;
    sum += w * green_neumann(x, line.position(L * t)) * fk;
  });
  return sum;
}

Vec3 s_n_gradient(const VesselGeometry& geom, const std::vector<double>& nodes,
                  const std::vector<double>& f, const Vec3& x) {
  check_field_point(geom, nodes, f, x);
  const FieldWeights fw = field_weights(geom, nodes, x, true);
  const Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(f.size()));
  return fw.gradient * fv;
}

// ---------------------------------------------------------------------------

double symmetrized_quadratic_form(const KernelMatrix& kernel, const std::vector<double>& f) {
  if (f.size() != kernel.nodes.size()) fail(ErrorCode::argument, "density and node counts differ");
  const Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(f.size()));
  const Eigen::VectorXd Kf = kernel.K * fv;
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += kernel.quad_weights[i] * f[i] * Kf[static_cast<Eigen::Index>(i)];
  return sum;
}

NearPositivityReport near_positivity(const KernelMatrix& kernel, const Mesh1D& mesh, double s_max) {
  std::vector<int> idx;
  for (int i = 0; i < mesh.nodes(); ++i) {
    if (mesh.s[static_cast<std::size_t>(i)] <= s_max + 1e-14 && mesh.a[static_cast<std::size_t>(i)] > 0.0) idx.push_back(i);
  }
  const int m = static_cast<int>(idx.size());
  if (m == 0) fail(ErrorCode::argument, "near-positivity: empty index set");
  Eigen::MatrixXd Q(m, m);
  Eigen::VectorXd scale(m);
  for (int p = 0; p < m; ++p) {
    const auto i = static_cast<std::size_t>(idx[static_cast<std::size_t>(p)]);
    scale[p] = std::sqrt(mesh.a[i] / kernel.quad_weights[i]);
  }
  for (int p = 0; p < m; ++p) {
    const int i = idx[static_cast<std::size_t>(p)];
    for (int q = 0; q < m; ++q) {
      const int j = idx[static_cast<std::size_t>(q)];
      const double wij = kernel.quad_weights[static_cast<std::size_t>(i)] * kernel.K(i, j);
      const double wji = kernel.quad_weights[static_cast<std::size_t>(j)] * kernel.K(j, i);
      Q(p, q) = 0.5 * (wij + wji) * scale[p] * scale[q];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) fail(ErrorCode::numerical, "near-positivity eigensolve failed");
  NearPositivityReport rep;
  rep.min_quotient = eig.eigenvalues().minCoeff();
  rep.max_quotient = eig.eigenvalues().maxCoeff();
  rep.dimension = m;
  rep.s_max = s_max;
  return rep;
}

}  // namespace sbp
