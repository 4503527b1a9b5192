// Command-line front end. Talks to the solver exclusively through the C API.

#include "sbp_c.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace {

// Exit codes: 0 success, 2 validation failure, 3 numerical failure, 1 for
// usage and i/o errors.
int exit_code(sbp_status status) {
  switch (status) {
    case SBP_OK: return 0;
    case SBP_ERR_VALIDATION: return 2;
    case SBP_ERR_NUMERICAL: return 3;
    default: return 1;
  }
}

int report_failure(sbp_status status) {
  std::fprintf(stderr, "error (%s): %s\n", sbp_status_name(status), sbp_last_error());
  return exit_code(status);
}

struct Options {
  std::string scene;
  std::string out;
  std::vector<double> eps;
  std::vector<int> nodes;
  int theta_order = 0;
  std::uint64_t seed = 12345;
  bool quiet = false;
};

void add_run_options(CLI::App* cmd, Options& o, bool scene_required) {
  auto* scene = cmd->add_option("--scene", o.scene, "Scene file (JSON) or builtin:NAME");
  if (scene_required) scene->required();
  cmd->add_option("--out", o.out, "Output directory (default: scene output_dir or ./out)");
  cmd->add_option("--eps", o.eps, "Slenderness override(s); a list for sweep-eps")->delimiter(',');
  cmd->add_option("--nodes", o.nodes, "Mesh interval count(s); a list for sweep-mesh")->delimiter(',');
  cmd->add_option("--theta-order", o.theta_order, "Initial theta quadrature order (power of two)");
  cmd->add_option("--seed", o.seed, "Seed for randomized diagnostics");
  cmd->add_flag("--quiet", o.quiet, "Do not print the report");
}

int execute(sbp_run_mode mode, const Options& o) {
  sbp_run_config cfg{};
  cfg.scene = o.scene.empty() ? nullptr : o.scene.c_str();
  cfg.mode = mode;
  cfg.eps = o.eps.empty() ? nullptr : o.eps.data();
  cfg.eps_count = o.eps.size();
  cfg.nodes = o.nodes.empty() ? nullptr : o.nodes.data();
  cfg.nodes_count = o.nodes.size();
  cfg.theta_order = o.theta_order;
  cfg.out_dir = o.out.empty() ? nullptr : o.out.c_str();
  cfg.seed = o.seed;
  sbp_report* report = nullptr;
  const sbp_status status = sbp_run(&cfg, &report);
  if (status != SBP_OK) return report_failure(status);
  if (!o.quiet) std::printf("%s\n", sbp_report_json(report));
  for (size_t k = 0; k < sbp_report_file_count(report); ++k) {
    std::fprintf(stderr, "wrote %s\n", sbp_report_file(report, k));
  }
  sbp_report_free(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slender-body perfusion model: solve, sweep, slice and regenerate figure data"};
  app.require_subcommand(1);

  Options opts;
  const std::pair<const char*, sbp_run_mode> modes[] = {
      {"solve", SBP_MODE_SOLVE},         {"sweep-eps", SBP_MODE_SWEEP_EPS}, {"sweep-mesh", SBP_MODE_SWEEP_MESH},
      {"slice", SBP_MODE_SLICE},         {"residuals", SBP_MODE_RESIDUALS}, {"figures", SBP_MODE_FIGURES}};
  const char* help[] = {"Solve one scene and write the solution CSV and report",
                        "Sweep eps: norms, residual slopes and theta variation",
                        "Sweep the mesh size and report self-convergence",
                        "Evaluate the exterior pressure on a plane",
                        "Compute the coupling residuals on the vessel surface",
                        "Regenerate the data behind the figures (8 CSV files and a manifest)"};
  std::vector<std::pair<CLI::App*, sbp_run_mode>> commands;
  for (std::size_t k = 0; k < std::size(modes); ++k) {
    CLI::App* cmd = app.add_subcommand(modes[k].first, help[k]);
    add_run_options(cmd, opts, modes[k].second != SBP_MODE_FIGURES);
    commands.emplace_back(cmd, modes[k].second);
  }

  std::string report_a, report_b, compare_out;
  CLI::App* compare = app.add_subcommand("compare", "Compare two solve reports of the same scene");
  compare->add_option("report_a", report_a, "First report (JSON)")->required();
  compare->add_option("report_b", report_b, "Second report (JSON)")->required();
  compare->add_option("--out", compare_out, "Write the comparison to this file");

  CLI::App* list = app.add_subcommand("scenes", "List the built-in scenes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list->parsed()) {
    for (const char* const* name = sbp_builtin_scenes(); *name; ++name) std::printf("%s\n", *name);
    return 0;
  }
  if (compare->parsed()) {
    sbp_report* report = nullptr;
    const sbp_status status = sbp_compare_reports(report_a.c_str(), report_b.c_str(), &report);
    if (status != SBP_OK) return report_failure(status);
    std::printf("%s\n", sbp_report_json(report));
    int rc = 0;
    if (!compare_out.empty()) {
      std::ofstream out(compare_out);
      out << sbp_report_json(report) << "\n";
      if (!out) {
        std::fprintf(stderr, "error: cannot write %s\n", compare_out.c_str());
        rc = 1;
      }
    }
    sbp_report_free(report);
    return rc;
  }
  for (const auto& [cmd, mode] : commands) {
    if (cmd->parsed()) return execute(mode, opts);
  }
  return 1;
}
