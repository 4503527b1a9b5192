#pragma once

#include "sbp/kernel.hpp"
#include "sbp/solver1d.hpp"

#include <vector>

namespace sbp {

/// Everything needed to evaluate q^SB: the vessel, eta (unit-length
/// scaling), omega, and the solved density (a^4 p_s)_s on the mesh.
struct FieldContext {
  const VesselGeometry* geometry = nullptr;
  double eta = 1.0;
  double omega = 1.0;
  const Mesh1D* mesh = nullptr;
  const Solution* solution = nullptr;
  double panel_ratio = 0.75;
};

/// q^SB(x) = eta S_N[(a^4 p_s)_s](x); throws inside the vessel.
double q_sb(const FieldContext& ctx, const Vec3& x);
/// Gradient of q^SB at x (outside the vessel).
Vec3 q_sb_gradient(const FieldContext& ctx, const Vec3& x);

struct PlaneSpec {
  Vec3 origin = Vec3::Zero();
  Vec3 u = Vec3::UnitX();  // first spanning direction (normalized on use)
  Vec3 v = Vec3::UnitZ();  // second spanning direction
  double u_min = -1.0, u_max = 1.0;
  double v_min = 0.0, v_max = 1.0;
  int nu = 41, nv = 41;
  /// Points closer to the surface than this multiple of eps a(s_nearest)
  /// are masked.
  double clearance_factor = 2.0;
};

struct FieldSlice {
  PlaneSpec plane;
  std::vector<Vec3> points;     // row-major, v outer
  std::vector<double> values;   // q^SB, NaN where masked
  std::vector<bool> masked;
  std::vector<double> clearance;
  int unmasked = 0;
};

FieldSlice slice_grid(const FieldContext& ctx, const PlaneSpec& plane);

struct ResidualReport {
  double eps = 0.0;
  std::vector<double> s;             // surface grid nodes (tip node excluded)
  int theta_points = 64;
  std::vector<double> rbar;          // angle-averaged flux residual per node
  std::vector<double> r;             // pointwise residual, row-major (s outer, theta inner)
  std::vector<double> dqdn;          // normal derivative at the grid points
  std::vector<double> q_surface;     // q^SB on the surface grid
  double rbar_sup = 0.0;
  double rbar_l2 = 0.0;
  double r_sup = 0.0;
  double r_l2 = 0.0;
  /// sup over the grid of |R_eps| / min(1/a, 1/eps).
  double r_weighted_sup = 0.0;
  double tip_band_start = 1.0;       // 1 - ell(eps); nodes beyond lie in the flagged tip band
  /// R-bar computed a second way: theta-integral of R_eps J plus the defect
  /// of the angle-averaged Robin balance.
  std::vector<double> rbar_alt;
};

ResidualReport boundary_residuals(const FieldContext& ctx, int theta_points = 64);

/// max_theta |q^SB(s, theta) - mean_theta q^SB(s, .)| on the surface.
double theta_variation(const FieldContext& ctx, double s, int theta_points = 64);

}  // namespace sbp
