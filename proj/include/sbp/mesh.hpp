#pragma once

#include "sbp/geometry.hpp"

#include <vector>

namespace sbp {

/// Nodes s_i = 1 - (1 - i/N)^gamma, i = 0..N (gamma = 1 is uniform).
std::vector<double> graded_nodes(int intervals, double gamma);

/// Graded mesh on [0, 1] with the per-node coefficients of the degenerate
/// operator. Midpoint quantities are indexed by the left node.
struct Mesh1D {
  double gamma = 2.0;
  std::vector<double> s;         // nodes, s[0] = 0, s[N] = 1
  std::vector<double> a;         // a(s_i)
  std::vector<double> a_aprime;  // a(s_i) a'(s_i), bounded up to the tip
  std::vector<double> alpha;     // 2 pi omega / eta times the cell average of a around s_i
  std::vector<double> mid;       // (s_i + s_{i+1}) / 2
  std::vector<double> a_mid;     // a at midpoints
  std::vector<double> a4_mid;    // a^4 at midpoints
  /// Interval transmissibilities: the flux a^4 v_s at the midpoint of
  /// [s_i, s_{i+1}] is transmissibility[i] * (v_{i+1} - v_i). Exact when the
  /// flux is proportional to A(s) = int_s^1 a, the leading-order flux profile
  /// at a degenerate tip; equals a^4_mid / h_i up to O(h^2) elsewhere.
  std::vector<double> transmissibility;

  int intervals() const { return static_cast<int>(s.size()) - 1; }
  int nodes() const { return static_cast<int>(s.size()); }
  double h(int i) const { return s[static_cast<std::size_t>(i + 1)] - s[static_cast<std::size_t>(i)]; }
  /// Finite-volume cell length around node i (half cells at both ends).
  double cell(int i) const;
};

/// Builds the graded mesh; `alpha_coefficient` is 2 pi omega / eta so that
/// alpha(s) = alpha_coefficient * a(s). Requires N >= 16 and gamma >= 1.
Mesh1D build_mesh(int intervals, double gamma, const RadiusProfile& radius,
                  double alpha_coefficient);

/// Locates the mesh interval containing t in [0, 1] (returns k with
/// s[k] <= t <= s[k+1]) and the hat-function weight of the right node.
struct HatLocation {
  int left = 0;
  double right_weight = 0.0;
};
HatLocation locate(const std::vector<double>& nodes, double t);

}  // namespace sbp
