#include "sbp/solver1d.hpp"

#include "sbp/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace sbp {

std::vector<double> TridiagonalOperator::apply(const std::vector<double>& v) const {
  const int n = size();
  if (static_cast<int>(v.size()) != n) fail(ErrorCode::argument, "operator and vector sizes differ");
  std::vector<double> out(v.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double sum = diag[k] * v[k];
    if (i > 0) sum += lower[k] * v[k - 1];
    if (i + 1 < n) sum += upper[k] * v[k + 1];
    out[k] = sum;
  }
  return out;
}

TridiagonalOperator discretize_local(const Mesh1D& mesh) {
  const int n = mesh.intervals();
  TridiagonalOperator D;
  D.lower.assign(static_cast<std::size_t>(n) + 1, 0.0);
  D.diag.assign(static_cast<std::size_t>(n) + 1, 0.0);
  D.upper.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double cell = mesh.cell(i);
    const double left = mesh.transmissibility[k - 1];
    const double right = i < n ? mesh.transmissibility[k] : 0.0;
    D.lower[k] = left / cell;
    D.upper[k] = right / cell;
    D.diag[k] = -(left + right) / cell;
  }
  return D;
}

bool local_operator_is_m_matrix(const TridiagonalOperator& D, const Mesh1D& mesh) {
  const int n = mesh.intervals();
  bool strict = false;
  for (int i = 1; i <= n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double diag = -D.diag[k] + mesh.alpha[k];
    const double lo = i > 1 ? -D.lower[k] : 0.0;  // v_0 = 0 is eliminated
    const double up = i < n ? -D.upper[k] : 0.0;
    if (!(diag > 0.0) || lo > 0.0 || up > 0.0) return false;
    const double excess = diag - std::abs(lo) - std::abs(up);
    if (excess < -1e-12 * diag) return false;
    if (excess > 1e-12 * diag) strict = true;
  }
  return strict;
}

LocalSolution solve_local(const Mesh1D& mesh, const std::vector<double>& f) {
  const int n = mesh.intervals();
  if (static_cast<int>(f.size()) != n + 1) fail(ErrorCode::argument, "forcing must be given at the mesh nodes");
  for (double x : f) {
    if (!std::isfinite(x)) fail(ErrorCode::argument, "forcing must be finite");
  }
  const TridiagonalOperator D = discretize_local(mesh);
  LocalSolution out;
  out.m_matrix = local_operator_is_m_matrix(D, mesh);

  // Thomas algorithm on rows 1..N of (D - alpha) v = alpha f.
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> d(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double lo = i > 1 ? D.lower[k] : 0.0;
    const double b = D.diag[k] - mesh.alpha[k] - lo * c[k - 1];
    if (b == 0.0 || !std::isfinite(b)) fail(ErrorCode::numerical, "singular local operator");
    c[k] = i < n ? D.upper[k] / b : 0.0;
    d[k] = (mesh.alpha[k] * f[k] - lo * d[k - 1]) / b;
  }
  out.v.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = n; i >= 1; --i) {
    const auto k = static_cast<std::size_t>(i);
    out.v[k] = d[k] - (i < n ? c[k] * out.v[k + 1] : 0.0);
  }
  return out;
}

NormReport weighted_norms(const Mesh1D& mesh, const std::vector<double>& p,
                          const std::vector<double>& g) {
  const int n = mesh.intervals();
  if (static_cast<int>(p.size()) != n + 1 || static_cast<int>(g.size()) != n + 1) {
    fail(ErrorCode::argument, "nodal arrays must match the mesh");
  }
  NormReport r;
  double p2 = 0.0;
  double ps2 = 0.0;
  double g2 = 0.0;
  double gs2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double h = mesh.h(i);
    const double am = mesh.a_mid[k];
    const double pm = 0.5 * (p[k] + p[k + 1]);
    const double ps = (p[k + 1] - p[k]) / h;
    const double gm = 0.5 * (g[k] + g[k + 1]);
    const double gs = (g[k + 1] - g[k]) / h;
    p2 += h * pm * pm;
    ps2 += h * std::pow(am * am * ps, 2);
    if (am > 0.0) g2 += h * gm * gm / am;
    gs2 += h * am * am * am * gs * gs;
    r.a_ps_inf = std::max(r.a_ps_inf, std::abs(am * ps));
    r.a_gs_inf = std::max(r.a_gs_inf, std::abs(am * gs));
  }
  for (int i = 0; i <= n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    r.p_inf = std::max(r.p_inf, std::abs(p[k]));
    if (mesh.a[k] > 0.0) r.a_inv_g_inf = std::max(r.a_inv_g_inf, std::abs(g[k]) / mesh.a[k]);
  }
  r.p_l2 = std::sqrt(p2);
  r.a2_ps_l2 = std::sqrt(ps2);
  r.ha = r.p_l2 + r.a2_ps_l2;
  r.a_inv_half_g_l2 = std::sqrt(g2);
  r.a32_gs_l2 = std::sqrt(gs2);
  const auto last = static_cast<std::size_t>(n - 1);
  r.tip_flux = mesh.transmissibility[last] * (p[last + 1] - p[last]);
  const double a3 = std::pow(mesh.a_mid[last], 3);
  r.tip_flux_ratio = a3 > 0.0 ? std::abs(r.tip_flux) / a3 : 0.0;
  return r;
}

namespace {

// Dense matrix G mapping u = (v_1..v_N, g_0) to nodal g = (a^4 v_s)_s.
struct GEntry {
  int row;
  int col;
  double value;
};

std::vector<GEntry> g_entries(const TridiagonalOperator& D, int n) {
  std::vector<GEntry> e;
  e.push_back({0, n, 1.0});
  for (int i = 1; i <= n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (i > 1) e.push_back({i, i - 2, D.lower[k]});
    e.push_back({i, i - 1, D.diag[k]});
    if (i < n) e.push_back({i, i, D.upper[k]});
  }
  return e;
}

}  // namespace

Solution solve_psb(const Mesh1D& mesh, const KernelMatrix& kernel, double p0) {
  const int n = mesh.intervals();
  if (kernel.K.rows() != n + 1 || kernel.K.cols() != n + 1) {
    fail(ErrorCode::argument, "kernel matrix does not match the mesh");
  }
  if (!std::isfinite(p0)) fail(ErrorCode::argument, "p0 must be finite");
  const TridiagonalOperator D = discretize_local(mesh);
  const auto entries = g_entries(D, n);

  // A = (I + diag(alpha) K) G - diag(alpha) V.
  Eigen::MatrixXd KG = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (const auto& e : entries) KG.col(e.col) += e.value * kernel.K.col(e.row);
  Eigen::MatrixXd A(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) A.row(i) = mesh.alpha[static_cast<std::size_t>(i)] * KG.row(i);
  for (const auto& e : entries) A(e.row, e.col) += e.value;
  for (int i = 1; i <= n; ++i) A(i, i - 1) -= mesh.alpha[static_cast<std::size_t>(i)];
  Eigen::VectorXd b(n + 1);
  for (int i = 0; i <= n; ++i) b[i] = mesh.alpha[static_cast<std::size_t>(i)] * p0;

  // Row equilibration.
  for (int i = 0; i <= n; ++i) {
    const double m = A.row(i).cwiseAbs().maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) fail(ErrorCode::numerical, "degenerate row in the system matrix");
    A.row(i) /= m;
    b[i] /= m;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Solution sol;
  const double rcond = lu.rcond();
  sol.condition_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  sol.condition_warning = sol.condition_estimate > 1e12;
  Eigen::VectorXd u = lu.solve(b);
  if (!u.allFinite()) fail(ErrorCode::numerical, "dense solve produced non-finite values");
  const Eigen::VectorXd r = b - A * u;
  const Eigen::VectorXd du = lu.solve(r);
  u += du;
  const double unorm = u.cwiseAbs().maxCoeff();
  sol.refinement_correction = unorm > 0.0 ? du.cwiseAbs().maxCoeff() / unorm : 0.0;
  const double bnorm = b.cwiseAbs().maxCoeff();
  sol.residual = bnorm > 0.0 ? (b - A * u).cwiseAbs().maxCoeff() / bnorm : 0.0;

  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) v[static_cast<std::size_t>(i)] = u[i - 1];
  sol.s = mesh.s;
  sol.a = mesh.a;
  sol.p0 = p0;
  sol.p.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sol.p[i] = v[i] + p0;
  sol.flux.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    sol.flux[k] = mesh.transmissibility[k] * (v[k + 1] - v[k]);
  }
  sol.g = D.apply(v);
  sol.g[0] = u[n];
  sol.norms = weighted_norms(mesh, sol.p, sol.g);
  return sol;
}

CoercivityReport coercivity_diagnostic(const Mesh1D& mesh, const KernelMatrix& kernel, int samples,
                                       std::uint64_t seed) {
  const int n = mesh.intervals();
  const TridiagonalOperator D = discretize_local(mesh);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CoercivityReport rep;
  rep.samples = samples;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = -std::numeric_limits<double>::infinity();
  constexpr int kModes = 6;
  for (int k = 0; k < samples; ++k) {
    // Smooth random v with v(0) = 0 and g(0) from the same expansion.
    std::array<double, kModes> c{};
    for (auto& x : c) x = normal(rng);
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      double sum = 0.0;
      for (int m = 0; m < kModes; ++m) {
        sum += c[static_cast<std::size_t>(m)] * std::sin((m + 0.5) * std::numbers::pi * mesh.s[static_cast<std::size_t>(i)]);
      }
      v[static_cast<std::size_t>(i)] = sum;
    }
    std::vector<double> g = D.apply(v);
    // The value at s = 0 is linearly extrapolated from the interior.
    g[0] = 2.0 * g[1] - g[2];
    const Eigen::Map<const Eigen::VectorXd> gv(g.data(), static_cast<Eigen::Index>(g.size()));
    const Eigen::VectorXd Kg = kernel.K * gv;
    double local = 0.0;
    double energy = 0.0;
    double cross = 0.0;
    double weighted = 0.0;
    for (int i = 0; i <= n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double w = kernel.quad_weights[idx];
      if (mesh.alpha[idx] > 0.0) local += w * g[idx] * g[idx] / mesh.alpha[idx];
      if (mesh.a[idx] > 0.0) weighted += w * g[idx] * g[idx] / mesh.a[idx];
      cross += w * g[idx] * Kg[i];
    }
    for (int i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double dv = v[idx + 1] - v[idx];
      energy += mesh.transmissibility[idx] * dv * dv;
    }
    const double norm_a = std::sqrt(weighted) + std::sqrt(energy);
    const double ratio = (local + energy + cross) / (norm_a * norm_a);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

}  // namespace sbp
