#pragma once

#include "sbp/field.hpp"
#include "sbp/geometry.hpp"
#include "sbp/kernel.hpp"
#include "sbp/mesh.hpp"
#include "sbp/solver1d.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sbp {

using Json = nlohmann::ordered_json;

/// Slice plane in physical coordinates (lengths in units of L).
struct SliceSpec {
  Vec3 origin = Vec3::Zero();
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitZ();
  double u_min = -1.0, u_max = 1.0;
  double v_min = 0.0, v_max = 1.0;
  int nu = 41, nv = 41;
  double clearance_factor = 2.0;
};

/// The full problem statement: vessel shape, physical parameters and the
/// discretization controls. Lengths are physical (the vessel has length L);
/// the solver works on the unit-length rescaling.
struct Scene {
  std::string name = "scene";
  CurveSpec curve = StraightCurve{};
  RadiusSpec radius{};
  double length = 1.0;  // L
  double eps = 0.01;
  double eta = 1.0;
  double omega = 1.0;
  double p0 = 1.0;
  int nodes = 400;  // N intervals
  double gamma = 2.0;
  int theta_order = 64;
  int geometry_samples = 2048;
  Vec3 e1_initial = Vec3::UnitX();
  double panel_ratio = 0.75;
  std::optional<SliceSpec> slice;
  std::string output_dir;  // used when no output directory is given on the command line
};

Json scene_to_json(const Scene& scene);
/// Parses a scene; unknown keys and malformed values raise argument errors.
Scene scene_from_json(const Json& j);
Scene load_scene(const std::filesystem::path& path);
/// Accepts a scene file path, or "builtin:NAME" / a bare built-in name.
Scene resolve_scene(const std::string& ref);

std::vector<std::string> builtin_scene_names();
Scene builtin_scene(const std::string& name);

/// Hash of the physical problem (curve, radius, L, eps, eta, omega, frame
/// choice, geometry sampling). Discretization controls and p0 are excluded so
/// that refinement and linearity comparisons share a hash.
std::string scene_hash(const Scene& scene);
/// Hash of every scene field, including discretization and p0.
std::string config_hash(const Scene& scene);

/// Parameter checks that do not need geometry (eps in (0, 0.1], N range, ...).
void check_scene_parameters(const Scene& scene);

/// Everything assembled for one scene: geometry, mesh, kernel and solution.
struct Problem {
  Scene scene;
  std::shared_ptr<const Centerline> centerline;
  std::unique_ptr<VesselGeometry> geometry;
  ValidationReport validation;
  double eta_unit = 0.0;    // eta L^2
  double omega_unit = 0.0;  // omega L
  Mesh1D mesh;
  KernelMatrix kernel;
  Solution solution;
  double geometry_seconds = 0.0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;

  FieldContext field_context() const;
  /// Physical coordinates -> unit-length coordinates and back.
  Vec3 to_unit(const Vec3& x) const { return x / scene.length; }
  Vec3 to_physical(const Vec3& x) const { return x * scene.length; }
};

/// Builds the geometry and validates it (validation errors carry the
/// geometry diagnostics).
ValidationReport validate_scene(const Scene& scene);

/// Validates, assembles and solves.
std::unique_ptr<Problem> solve_scene(const Scene& scene);

/// Solution table in physical units: rows (s, a, p, a4ps, a4ps_s) with a4ps
/// at the nodes (averaged from the midpoint fluxes).
struct SolutionTable {
  std::vector<double> s, a, p, a4ps, a4ps_s;
};
SolutionTable solution_table(const Problem& problem);

// ---------------------------------------------------------------------------
// Runs

enum class RunMode { solve, sweep_eps, sweep_mesh, slice, residuals, figures };

RunMode parse_run_mode(const std::string& name);
std::string run_mode_name(RunMode mode);

struct RunConfig {
  std::string scene;  // path or built-in reference; may be empty for `figures`
  RunMode mode = RunMode::solve;
  std::vector<double> eps;   // overrides (one value for single runs, a list for sweeps)
  std::vector<int> nodes;    // overrides
  std::optional<int> theta_order;
  std::filesystem::path out_dir;
  std::uint64_t seed = 12345;
};

/// Structured run report; `json` holds the full record written to disk.
struct RunReport {
  std::string scene_hash;
  std::string mode;
  Json json;
  std::vector<std::filesystem::path> files;
};

/// Executes the pipeline for `config`, writing outputs to config.out_dir.
/// On failure every file written by the run is removed before rethrowing.
RunReport run(const RunConfig& config);

/// Default eps values of the sweep and of the figure regeneration.
std::vector<double> default_sweep_eps();
std::vector<double> figure_eps();
std::vector<int> default_sweep_nodes();
/// File names produced by `figures` (8 CSV files, then the manifest).
std::vector<std::string> figure_manifest_files();

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Compares two solve reports of the same physical problem.
struct Comparison {
  double p_max_abs_diff = 0.0;
  double p_max_rel_diff = 0.0;
  double p_ratio_min = 0.0;  // min / max of p_b / p_a over common nodes
  double p_ratio_max = 0.0;
  int common_nodes = 0;
  Json norms;  // relative differences per norm
  Json json;   // complete summary
};
Comparison compare_runs(const Json& report_a, const Json& report_b);
Json load_report(const std::filesystem::path& path);

}  // namespace sbp
