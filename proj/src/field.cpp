#include "sbp/field.hpp"

#include "sbp/error.hpp"
#include "sbp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sbp {

namespace {

void check_context(const FieldContext& ctx) {
  if (!ctx.geometry || !ctx.mesh || !ctx.solution) fail(ErrorCode::argument, "incomplete field context");
  if (ctx.solution->g.size() != ctx.mesh->s.size()) fail(ErrorCode::argument, "solution does not match the mesh");
}

Eigen::Map<const Eigen::VectorXd> density(const FieldContext& ctx) {
  const auto& g = ctx.solution->g;
  return {g.data(), static_cast<Eigen::Index>(g.size())};
}

void check_exterior(const FieldContext& ctx, const Vec3& x) {
  if (x.z() < 0.0) fail(ErrorCode::argument, "field point below the wall");
  if (ctx.geometry->inside(x)) fail(ErrorCode::argument, "inside_vessel: field point lies inside the vessel");
}

}  // namespace

double q_sb(const FieldContext& ctx, const Vec3& x) {
  check_context(ctx);
  check_exterior(ctx, x);
  const FieldWeights fw = field_weights(*ctx.geometry, ctx.mesh->s, x, false, ctx.panel_ratio);
  return ctx.eta * fw.value.dot(density(ctx));
}

Vec3 q_sb_gradient(const FieldContext& ctx, const Vec3& x) {
  check_context(ctx);
  check_exterior(ctx, x);
  const FieldWeights fw = field_weights(*ctx.geometry, ctx.mesh->s, x, true, ctx.panel_ratio);
  return ctx.eta * (fw.gradient * density(ctx));
}

FieldSlice slice_grid(const FieldContext& ctx, const PlaneSpec& plane) {
  check_context(ctx);
  if (plane.nu < 1 || plane.nv < 1) fail(ErrorCode::argument, "slice resolution must be positive");
  if (plane.u.norm() == 0.0 || plane.v.norm() == 0.0) fail(ErrorCode::argument, "slice directions must be nonzero");
  FieldSlice out;
  out.plane = plane;
  const Vec3 u = plane.u.normalized();
  const Vec3 v = plane.v.normalized();
  const std::size_t count = static_cast<std::size_t>(plane.nu) * static_cast<std::size_t>(plane.nv);
  out.points.resize(count);
  out.values.assign(count, std::numeric_limits<double>::quiet_NaN());
  out.masked.assign(count, true);
  out.clearance.assign(count, 0.0);
  for (int j = 0; j < plane.nv; ++j) {
    for (int i = 0; i < plane.nu; ++i) {
      const double a = plane.nu > 1 ? plane.u_min + (plane.u_max - plane.u_min) * i / (plane.nu - 1) : plane.u_min;
      const double b = plane.nv > 1 ? plane.v_min + (plane.v_max - plane.v_min) * j / (plane.nv - 1) : plane.v_min;
      out.points[static_cast<std::size_t>(j) * static_cast<std::size_t>(plane.nu) + static_cast<std::size_t>(i)] =
          plane.origin + a * u + b * v;
    }
  }
  std::vector<char> mask(count, 1);
  parallel_for(count, [&](std::size_t k) {
    const Vec3& x = out.points[k];
    if (x.z() < 0.0) return;
    const auto near = ctx.geometry->nearest(x);
    out.clearance[k] = near.clearance;
    const double required = plane.clearance_factor * ctx.geometry->eps() * ctx.geometry->radius().a(near.s);
    if (near.clearance < required || near.clearance <= 0.0) return;
    const FieldWeights fw = field_weights(*ctx.geometry, ctx.mesh->s, x, false, ctx.panel_ratio);
    out.values[k] = ctx.eta * fw.value.dot(density(ctx));
    mask[k] = 0;
  });
  for (std::size_t k = 0; k < count; ++k) {
    out.masked[k] = mask[k] != 0;
    if (!out.masked[k]) ++out.unmasked;
  }
  if (out.unmasked == 0) fail(ErrorCode::validation, "degenerate_slice: every slice point is masked");
  return out;
}

ResidualReport boundary_residuals(const FieldContext& ctx, int theta_points) {
  check_context(ctx);
  if (theta_points < 4) fail(ErrorCode::argument, "need at least 4 theta points");
  const VesselGeometry& geom = *ctx.geometry;
  const Mesh1D& mesh = *ctx.mesh;
  const Solution& sol = *ctx.solution;
  const double eps = geom.eps();
  const int n_s = mesh.intervals();  // nodes 0..N-1; the tip node is excluded
  const int n_t = theta_points;

  ResidualReport rep;
  rep.eps = eps;
  rep.theta_points = n_t;
  rep.s.assign(mesh.s.begin(), mesh.s.end() - 1);
  rep.tip_band_start = 1.0 - geom.stretch().ell;
  const std::size_t total = static_cast<std::size_t>(n_s) * static_cast<std::size_t>(n_t);
  rep.r.assign(total, 0.0);
  rep.dqdn.assign(total, 0.0);
  rep.q_surface.assign(total, 0.0);
  std::vector<double> jac(total, 0.0);
  const auto g = density(ctx);

  parallel_for(total, [&](std::size_t k) {
    const int i = static_cast<int>(k / static_cast<std::size_t>(n_t));
    const int j = static_cast<int>(k % static_cast<std::size_t>(n_t));
    const double s = mesh.s[static_cast<std::size_t>(i)];
    const double th = 2.0 * std::numbers::pi * j / n_t;
    const Vec3 x = geom.surface_point(s, th);
    const FieldWeights fw = field_weights(geom, mesh.s, x, true, ctx.panel_ratio);
    const double q = ctx.eta * fw.value.dot(g);
    const Vec3 grad = ctx.eta * (fw.gradient * g);
    const double dqdn = geom.normal(s, th).dot(grad);
    rep.q_surface[k] = q;
    rep.dqdn[k] = dqdn;
    rep.r[k] = dqdn - ctx.omega / eps * (sol.p[static_cast<std::size_t>(i)] - q);
    jac[k] = geom.jacobian(s, th);
  });

  rep.rbar.assign(static_cast<std::size_t>(n_s), 0.0);
  rep.rbar_alt.assign(static_cast<std::size_t>(n_s), 0.0);
  const double dth = 2.0 * std::numbers::pi / n_t;
  double l2 = 0.0;
  double r_l2 = 0.0;
  for (int i = 0; i < n_s; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    double flux = 0.0;
    double r_int = 0.0;
    double robin = 0.0;
    for (int j = 0; j < n_t; ++j) {
      const std::size_t k = ii * static_cast<std::size_t>(n_t) + static_cast<std::size_t>(j);
      flux += dth * rep.dqdn[k] * jac[k];
      r_int += dth * rep.r[k] * jac[k];
      robin += dth * ctx.omega / eps * (sol.p[ii] - rep.q_surface[k]) * jac[k];
      const double weight = std::min(1.0 / std::max(mesh.a[ii], 1e-300), 1.0 / eps);
      rep.r_sup = std::max(rep.r_sup, std::abs(rep.r[k]));
      rep.r_weighted_sup = std::max(rep.r_weighted_sup, std::abs(rep.r[k]) / weight);
    }
    rep.rbar[ii] = flux - ctx.eta * sol.g[ii];
    rep.rbar_alt[ii] = r_int + (robin - ctx.eta * sol.g[ii]);
    rep.rbar_sup = std::max(rep.rbar_sup, std::abs(rep.rbar[ii]));
    const double h = mesh.cell(i);
    l2 += h * rep.rbar[ii] * rep.rbar[ii];
    for (int j = 0; j < n_t; ++j) {
      const double rv = rep.r[ii * static_cast<std::size_t>(n_t) + static_cast<std::size_t>(j)];
      r_l2 += h * dth * rv * rv;
    }
  }
  rep.rbar_l2 = std::sqrt(l2);
  rep.r_l2 = std::sqrt(r_l2);
  return rep;
}

double theta_variation(const FieldContext& ctx, double s, int theta_points) {
  check_context(ctx);
  if (theta_points < 4) fail(ErrorCode::argument, "need at least 4 theta points");
  const VesselGeometry& geom = *ctx.geometry;
  const auto g = density(ctx);
  std::vector<double> q(static_cast<std::size_t>(theta_points));
  for (int j = 0; j < theta_points; ++j) {
    const double th = 2.0 * std::numbers::pi * j / theta_points;
    const FieldWeights fw = field_weights(geom, ctx.mesh->s, geom.surface_point(s, th), false, ctx.panel_ratio);
    q[static_cast<std::size_t>(j)] = ctx.eta * fw.value.dot(g);
  }
  double mean = 0.0;
  for (double x : q) mean += x;
  mean /= theta_points;
  double var = 0.0;
  for (double x : q) var = std::max(var, std::abs(x - mean));
  return var;
}

}  // namespace sbp
