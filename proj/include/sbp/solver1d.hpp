#pragma once

#include "sbp/kernel.hpp"
#include "sbp/mesh.hpp"

#include <cstdint>
#include <vector>

namespace sbp {

/// Conservative finite-volume approximation of v -> (a^4 v_s)_s on the mesh
/// nodes: row i reads lower[i] v_{i-1} + diag[i] v_i + upper[i] v_{i+1}.
/// Row 0 is left empty (the Dirichlet row belongs to the caller); the last
/// row drops the right flux, which encodes a^4 v_s = 0 at the tip.
struct TridiagonalOperator {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  std::vector<double> apply(const std::vector<double>& v) const;
  int size() const { return static_cast<int>(diag.size()); }
};

TridiagonalOperator discretize_local(const Mesh1D& mesh);

/// Checks that the matrix of -(D - diag(alpha)) on the unknowns v_1..v_N
/// (v_0 = 0 eliminated) is an M-matrix: positive diagonal, nonpositive
/// off-diagonals, weak row diagonal dominance with at least one strict row.
bool local_operator_is_m_matrix(const TridiagonalOperator& D, const Mesh1D& mesh);

struct LocalSolution {
  std::vector<double> v;
  bool m_matrix = false;
};

/// Solves (a^4 v_s)_s - alpha v = alpha f with v(0) = 0 (Thomas algorithm).
LocalSolution solve_local(const Mesh1D& mesh, const std::vector<double>& f);

struct NormReport {
  double p_l2 = 0.0;              // ||p||_{L^2}
  double a2_ps_l2 = 0.0;          // ||a^2 p_s||_{L^2}
  double ha = 0.0;                // ||p||_{H^a} = sum of the two above
  double a_inv_half_g_l2 = 0.0;   // ||a^{-1/2} (a^4 p_s)_s||_{L^2}
  double a_ps_inf = 0.0;          // ||a p_s||_inf
  double a_inv_g_inf = 0.0;       // ||a^{-1} (a^4 p_s)_s||_inf (nodes with a > 0)
  double a32_gs_l2 = 0.0;         // ||a^{3/2} (a^4 p_s)_ss||_{L^2} (difference quotients)
  double a_gs_inf = 0.0;          // ||a (a^4 p_s)_ss||_inf (difference quotients)
  double p_inf = 0.0;             // ||p||_inf
  double tip_flux = 0.0;          // a^4 p_s at the last midpoint
  double tip_flux_ratio = 0.0;    // |tip_flux| / a^3 at the last midpoint
};

/// Weighted norms by midpoint quadrature on the mesh. `g` holds (a^4 p_s)_s
/// at the nodes.
NormReport weighted_norms(const Mesh1D& mesh, const std::vector<double>& p,
                          const std::vector<double>& g);

struct Solution {
  std::vector<double> s;
  std::vector<double> a;
  std::vector<double> p;       // p^SB at nodes
  std::vector<double> flux;    // a^4 p_s at midpoints
  std::vector<double> g;       // (a^4 p_s)_s at nodes
  double p0 = 0.0;
  double condition_estimate = 0.0;  // 1-norm estimate after row equilibration
  bool condition_warning = false;   // estimate above 1e12
  double refinement_correction = 0.0;  // relative size of the refinement step
  double residual = 0.0;               // relative residual after refinement
  NormReport norms;
};

/// Solves (D - diag(alpha) + diag(alpha) K D) v = alpha p0, v(0) = 0 by dense
/// LU with partial pivoting and one step of iterative refinement; the value
/// (a^4 v_s)_s at s = 0 is carried as an extra unknown.
Solution solve_psb(const Mesh1D& mesh, const KernelMatrix& kernel, double p0);

struct CoercivityReport {
  double min_ratio = 0.0;  // min over samples of B(v,v) / ||v||_A^2
  double max_ratio = 0.0;
  int samples = 0;
};

/// Evaluates the discrete bilinear form B(v,v) on random v with v(0) = 0,
/// divided by ||v||_A^2 = (||a^{-1/2}(a^4 v_s)_s|| + ||a^2 v_s||)^2.
CoercivityReport coercivity_diagnostic(const Mesh1D& mesh, const KernelMatrix& kernel, int samples,
                                       std::uint64_t seed);

}  // namespace sbp
