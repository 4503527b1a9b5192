#pragma once

#include "sbp/geometry.hpp"
#include "sbp/mesh.hpp"
#include "sbp/quadrature.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace sbp {

/// Half-space Neumann Green's function (1/4pi)(1/|x-y| + 1/|x-y*|).
/// Throws when x coincides with y or with its image.
double green_neumann(const Vec3& x, const Vec3& y);
/// Gradient of green_neumann with respect to x.
Vec3 green_neumann_gradient(const Vec3& x, const Vec3& y);

struct KernelOptions {
  ThetaRule theta{};
  /// Gauss panels are split until their length is at most this multiple of
  /// the distance from the panel midpoint to the nearest source feature.
  double panel_ratio = 0.75;
};

/// theta-averaged kernel K_eps(s, t) = eta/(8 pi^2) int_0^{2pi} dtheta / |R_eps|.
class KernelEvaluator {
 public:
  KernelEvaluator(VesselGeometry geometry, double eta, KernelOptions options = {});

  /// Cross-section data at arclength s.
  struct Section {
    double s = 0.0;
    Vec3 X;
    Vec3 e1;
    Vec3 e2;
    double radius = 0.0;  // eps a(s)
  };
  Section section(double s) const;

  double operator()(double s, double t) const { return value(section(s), t); }
  double value(const Section& sec, double t, int* theta_order = nullptr) const;
  /// 1/|R_eps(s, t, theta)| (unscaled integrand), for independent checks.
  double integrand(double s, double t, double theta) const;

  const VesselGeometry& geometry() const { return geometry_; }
  double eta() const { return eta_; }
  const KernelOptions& options() const { return options_; }

 private:
  VesselGeometry geometry_;
  double eta_;
  KernelOptions options_;
};

/// Dense product-integration operator on the mesh: for nodal f,
/// (K f)_i approximates int_{-1}^{1} K_eps(s_i, t) f*(t) dt with f
/// interpolated piecewise linearly. The t < 0 half is folded onto [0, 1].
struct KernelMatrix {
  std::vector<double> nodes;
  Eigen::MatrixXd K;
  std::vector<double> quad_weights;  // trapezoid weights of the nodes
  int theta_order = 0;               // largest theta order used
  double self_check = 0.0;           // folded-vs-unfolded mismatch on spot rows
  std::size_t kernel_evaluations = 0;
};

/// Folded row at an arbitrary s: out[j] = int_0^1 (K(s,t) + K(s,-t)) phi_j(t) dt.
/// When `unfolded` is non-null it receives the 2N+1 weights of the same
/// quadrature on [-1, 1], indexed by node k = -N..N at position k + N.
void kernel_row(const KernelEvaluator& kernel, const std::vector<double>& nodes, double s,
                double* folded, double* unfolded = nullptr, int* theta_order = nullptr,
                std::size_t* evaluations = nullptr);

/// Assembles the folded matrix in parallel over rows. Spot rows are
/// recomputed unfolded and compared; a mismatch above 1e-9 throws.
KernelMatrix assemble_kernel_matrix(const KernelEvaluator& kernel, const Mesh1D& mesh);

/// Unfolded assembly on [-1, 1]: (N+1) x (2N+1) with columns for nodes -N..N.
Eigen::MatrixXd assemble_unfolded(const KernelEvaluator& kernel, const Mesh1D& mesh);

/// Maps nodal f on [0, 1] to nodal f* on the symmetric node set -N..N.
Eigen::MatrixXd even_extension_matrix(int intervals);

// ---------------------------------------------------------------------------
// Slender-body operator S_N at field points.

/// Quadrature weights w (and gradient weights) such that
/// S_N[f](x) = sum_j w_j f_j for nodal f, using the reflected form on [-1, 1].
struct FieldWeights {
  Eigen::VectorXd value;
  Eigen::Matrix<double, 3, Eigen::Dynamic> gradient;
};
FieldWeights field_weights(const VesselGeometry& geometry, const std::vector<double>& nodes,
                           const Vec3& x, bool with_gradient, double panel_ratio = 0.75);

/// S_N[f](x) in the reflected form (1/4pi) int_{-1}^{1} f*(t)/|x - Y(phi^{-1} t)| dt.
/// Throws when x lies inside the vessel.
double s_n_evaluate(const VesselGeometry& geometry, const std::vector<double>& nodes,
                    const std::vector<double>& f, const Vec3& x);
/// Same operator in the half-interval form int_0^1 G_N(x, X(phi^{-1} t)) f(t) dt.
double s_n_evaluate_half(const VesselGeometry& geometry, const std::vector<double>& nodes,
                         const std::vector<double>& f, const Vec3& x);
/// Gradient of S_N[f] at x.
Vec3 s_n_gradient(const VesselGeometry& geometry, const std::vector<double>& nodes,
                  const std::vector<double>& f, const Vec3& x);

// ---------------------------------------------------------------------------
// Near-positivity diagnostic.

/// int_0^1 int_{-1}^{1} K_eps(s,t) f*(t) f(s) dt ds with the assembled matrix
/// and trapezoid weights in s.
double symmetrized_quadratic_form(const KernelMatrix& kernel, const std::vector<double>& f);

struct NearPositivityReport {
  double min_quotient = 0.0;  // most negative (or smallest) weighted Rayleigh quotient
  double max_quotient = 0.0;
  int dimension = 0;
  double s_max = 1.0;
};

/// Extreme values of the quadratic form over ||a^{-1/2} f||_{L^2} = 1,
/// restricted to f supported on [0, s_max] (the tip node is excluded because
/// the weight a^{-1} is infinite there).
NearPositivityReport near_positivity(const KernelMatrix& kernel, const Mesh1D& mesh,
                                     double s_max = 1.0);

}  // namespace sbp
