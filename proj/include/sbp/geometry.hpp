#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace sbp {

using Vec3 = Eigen::Vector3d;

inline Vec3 reflect_across_wall(const Vec3& v) { return {v.x(), v.y(), -v.z()}; }

// ---------------------------------------------------------------------------
// Centerline families. Every family describes a curve whose base sits on the
// wall z = 0 with tangent +z there; the built centerline is rescaled to unit
// arclength.

struct StraightCurve {};

// Planar circular arc in the x-z plane turning toward +x; `angle` is the total
// turning angle, so the unit-length arc has curvature `angle`.
struct ArcCurve {
  double angle = 1.0;
};

// Cubic spline through control points (chord-length parameter), clamped to
// the +z direction at the first point and natural at the last one.
struct SplineCurve {
  std::vector<Vec3> points;
};

using CurveSpec = std::variant<StraightCurve, ArcCurve, SplineCurve>;

struct CenterlineOptions {
  int samples = 2048;
  Vec3 e1_initial = Vec3::UnitX();
};

struct FrameSample {
  Vec3 X;
  Vec3 et;
  Vec3 e1;
  Vec3 e2;
  double k1 = 0.0;
  double k2 = 0.0;
};

/// Unit-length, arclength-parameterized centerline with a Bishop frame.
///
/// Positions and frame vectors are tabulated on a uniform arclength grid and
/// evaluated in between by cubic Hermite interpolation, using the frame
/// equations for the derivative data. The object is immutable after build().
class Centerline {
 public:
  static Centerline build(const CurveSpec& spec, const CenterlineOptions& options = {});

  int samples() const { return static_cast<int>(table_.size()); }
  double spacing() const { return h_; }
  double sample_s(int k) const { return k * h_; }
  const FrameSample& sample(int k) const { return table_[static_cast<std::size_t>(k)]; }

  Vec3 position(double s) const;
  FrameSample frame(double s) const;

  double kappa_star() const { return kappa_star_; }
  /// Length of the family curve before rescaling to unit length.
  double raw_length() const { return raw_length_; }
  /// Largest mismatch between requested and achieved arclength increments,
  /// relative to the increment.
  double reparam_residual() const { return reparam_residual_; }
  const Vec3& e1_initial() const { return e1_initial_; }

  /// min over sampled pairs of |X(s1)-X(s2)|/|s1-s2| and of z(s)/s.
  double c_gamma(int max_pairs_side = 384) const;
  /// Smallest z over s > 0 divided by s (wall part of c_gamma).
  double wall_ratio() const;

 private:
  std::vector<FrameSample> table_;
  double h_ = 0.0;
  double kappa_star_ = 0.0;
  double raw_length_ = 0.0;
  double reparam_residual_ = 0.0;
  Vec3 e1_initial_ = Vec3::UnitX();
};

/// Transports e1 along tabulated tangent/curvature data with classical RK4.
/// `tangent` and `curvature` hold 2n-1 values on the half-step grid of an
/// n-point uniform grid of spacing h; returns the n transported normals.
std::vector<Vec3> transport_bishop_normal(const std::vector<Vec3>& tangent,
                                          const std::vector<Vec3>& curvature, double h,
                                          const Vec3& e1_start);

// ---------------------------------------------------------------------------
// Radius profiles (dimensionless, max 1, vanishing at the free tip).

enum class RadiusFamily { spheroidal, constant, modulated };

struct RadiusSpec {
  RadiusFamily family = RadiusFamily::spheroidal;
  double value = 1.0;      // constant family
  double amplitude = 0.2;  // modulated family: depth of the interior neck
  double delta = 0.2;      // modulated family: length of the spheroidal end zone
};

class RadiusProfile {
 public:
  explicit RadiusProfile(RadiusSpec spec = {});

  double a(double s) const;
  /// a'(s); infinite at the tip of a spheroidal end.
  double a_prime(double s) const;
  /// a(s) a'(s), bounded up to the tip.
  double a_aprime(double s) const;
  /// a(s)^3 a''(s), bounded up to the tip.
  double a3_a2prime(double s) const;

  const RadiusSpec& spec() const { return spec_; }
  std::string end_form() const;
  double delta() const { return delta_; }
  double a0() const { return a0_; }
  double a_star() const { return a_star_; }
  double a_starstar() const { return a_starstar_; }

 private:
  RadiusSpec spec_;
  double delta_ = 0.0;
  double a0_ = 0.0;
  double a_star_ = 0.0;
  double a_starstar_ = 0.0;
};

// ---------------------------------------------------------------------------

/// The stretch map t = s / (1 - ell) and its inverse, with
/// ell(eps) = 1 - sqrt(1 - eps^2) (the focus of the prolate spheroid).
struct StretchMap {
  double ell = 0.0;

  static StretchMap for_eps(double eps);
  double forward(double s) const { return s / (1.0 - ell); }
  double inverse(double t) const { return (1.0 - ell) * t; }
};

/// Centerline extended by its mirror image across the wall: Y(t) = X(t) for
/// t >= 0 and Y(t) = X(-t) reflected for t < 0.
class ReflectedCurve {
 public:
  explicit ReflectedCurve(std::shared_ptr<const Centerline> centerline)
      : centerline_(std::move(centerline)) {}

  Vec3 operator()(double t) const {
    return t >= 0.0 ? centerline_->position(t) : reflect_across_wall(centerline_->position(-t));
  }
  Vec3 tangent(double t) const;

 private:
  std::shared_ptr<const Centerline> centerline_;
};

/// Even extension f*(t) = f(|t|) of a function given on [0, 1].
template <class F>
auto even_extension(F f) {
  return [f](double t) { return f(t < 0.0 ? -t : t); };
}

/// Centerline, radius profile and slenderness bundled as one immutable vessel.
class VesselGeometry {
 public:
  VesselGeometry(std::shared_ptr<const Centerline> centerline, RadiusProfile radius, double eps);

  const Centerline& centerline() const { return *centerline_; }
  const std::shared_ptr<const Centerline>& centerline_ptr() const { return centerline_; }
  const RadiusProfile& radius() const { return radius_; }
  const ReflectedCurve& reflected() const { return reflected_; }
  double eps() const { return eps_; }
  const StretchMap& stretch() const { return stretch_; }

  /// X(s) + eps a(s) e_r(s, theta).
  Vec3 surface_point(double s, double theta) const;
  /// Surface element factor; throws when 1 - eps a kappa_hat <= 0.
  double jacobian(double s, double theta) const;
  /// Outward (into the vessel) unit normal of Gamma_eps at (s, theta).
  Vec3 normal(double s, double theta) const;
  /// Source point Y(phi^{-1}(t)) of the line distribution, t in [-1, 1].
  Vec3 source_point(double t) const { return reflected_(stretch_.inverse(t)); }
  /// R_eps(s, t, theta) = X(s) - Y(phi^{-1}(t)) + eps a(s) e_r(s, theta).
  Vec3 r_eps(double s, double t, double theta) const;

  struct Nearest {
    double s = 0.0;
    double distance = 0.0;   // to the centerline point X(s)
    double clearance = 0.0;  // distance minus the local radius eps a(s)
  };
  /// Closest centerline point to x (sample scan plus local refinement).
  Nearest nearest(const Vec3& x) const;
  bool inside(const Vec3& x) const { return nearest(x).clearance < 0.0; }

 private:
  std::shared_ptr<const Centerline> centerline_;
  RadiusProfile radius_;
  double eps_;
  StretchMap stretch_;
  ReflectedCurve reflected_;
};

// ---------------------------------------------------------------------------

struct Diagnostic {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  double c_gamma = 0.0;
  double kappa_star = 0.0;
  double a_star = 0.0;
  double a_starstar = 0.0;
  double spheroidal_ratio = 0.0;  // max |a - sqrt(1-s^2)| / (eps^2 sqrt(1-s^2)) on the end zone
  double curvature_margin = 0.0;  // min over the surface of 1 - eps a kappa_hat
  std::vector<Diagnostic> diagnostics;

  bool accepted() const;
  std::string failures() const;
};

/// Constant C of the spheroidal-end condition used by the validator.
inline constexpr double kSpheroidalConstant = 10.0;

ValidationReport validate_geometry(const VesselGeometry& geometry);

}  // namespace sbp
