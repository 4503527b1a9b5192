#include "sbp_c.h"

#include "sbp/error.hpp"
#include "sbp/harness.hpp"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

struct sbp_scene {
  sbp::Scene scene;
};

struct sbp_solution {
  std::unique_ptr<sbp::Problem> problem;
  sbp::SolutionTable table;
};

struct sbp_report {
  std::string json;
  std::vector<std::string> files;
};

namespace {

thread_local std::string g_last_error;

sbp_status to_status(sbp::ErrorCode code) {
  switch (code) {
    case sbp::ErrorCode::argument: return SBP_ERR_ARGUMENT;
    case sbp::ErrorCode::validation: return SBP_ERR_VALIDATION;
    case sbp::ErrorCode::numerical: return SBP_ERR_NUMERICAL;
    case sbp::ErrorCode::io: return SBP_ERR_IO;
  }
  return SBP_ERR_INTERNAL;
}

template <class F>
sbp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return SBP_OK;
  } catch (const sbp::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SBP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SBP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SBP_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) sbp::fail(sbp::ErrorCode::argument, what);
}

sbp_status make_scene(sbp::Scene scene, sbp_scene** out) {
  *out = new sbp_scene{std::move(scene)};
  return SBP_OK;
}

}  // namespace

extern "C" {

const char* sbp_last_error(void) { return g_last_error.c_str(); }

const char* sbp_status_name(sbp_status status) {
  switch (status) {
    case SBP_OK: return "ok";
    case SBP_ERR_ARGUMENT: return "argument error";
    case SBP_ERR_VALIDATION: return "validation failure";
    case SBP_ERR_NUMERICAL: return "numerical failure";
    case SBP_ERR_IO: return "i/o error";
    case SBP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

sbp_status sbp_scene_load(const char* path, sbp_scene** out) {
  return guarded([&] {
    require(path && out, "null argument");
    make_scene(sbp::load_scene(path), out);
  });
}

sbp_status sbp_scene_builtin(const char* name, sbp_scene** out) {
  return guarded([&] {
    require(name && out, "null argument");
    make_scene(sbp::builtin_scene(name), out);
  });
}

sbp_status sbp_scene_from_json(const char* json_text, sbp_scene** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    sbp::Json j;
    try {
      j = sbp::Json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      sbp::fail(sbp::ErrorCode::argument, std::string("scene is not valid JSON: ") + e.what());
    }
    make_scene(sbp::scene_from_json(j), out);
  });
}

sbp_status sbp_scene_set_double(sbp_scene* scene, const char* key, double value) {
  return guarded([&] {
    require(scene && key, "null argument");
    sbp::Scene& s = scene->scene;
    const std::string k = key;
    if (k == "eps") s.eps = value;
    else if (k == "eta") s.eta = value;
    else if (k == "omega") s.omega = value;
    else if (k == "p0") s.p0 = value;
    else if (k == "length") s.length = value;
    else if (k == "gamma") s.gamma = value;
    else if (k == "panel_ratio") s.panel_ratio = value;
    else sbp::fail(sbp::ErrorCode::argument, "unknown scene key '" + k + "'");
  });
}

sbp_status sbp_scene_set_int(sbp_scene* scene, const char* key, int value) {
  return guarded([&] {
    require(scene && key, "null argument");
    sbp::Scene& s = scene->scene;
    const std::string k = key;
    if (k == "nodes") s.nodes = value;
    else if (k == "theta_order") s.theta_order = value;
    else if (k == "geometry_samples") s.geometry_samples = value;
    else sbp::fail(sbp::ErrorCode::argument, "unknown scene key '" + k + "'");
  });
}

sbp_status sbp_scene_get_double(const sbp_scene* scene, const char* key, double* value) {
  return guarded([&] {
    require(scene && key && value, "null argument");
    const sbp::Scene& s = scene->scene;
    const std::string k = key;
    if (k == "eps") *value = s.eps;
    else if (k == "eta") *value = s.eta;
    else if (k == "omega") *value = s.omega;
    else if (k == "p0") *value = s.p0;
    else if (k == "length") *value = s.length;
    else if (k == "gamma") *value = s.gamma;
    else if (k == "panel_ratio") *value = s.panel_ratio;
    else sbp::fail(sbp::ErrorCode::argument, "unknown scene key '" + k + "'");
  });
}

sbp_status sbp_scene_hash(const sbp_scene* scene, char* buf, size_t len) {
  return guarded([&] {
    require(scene && buf, "null argument");
    const std::string h = sbp::scene_hash(scene->scene);
    require(len > h.size(), "hash buffer too small");
    std::memcpy(buf, h.c_str(), h.size() + 1);
  });
}

sbp_status sbp_scene_validate(const sbp_scene* scene) {
  return guarded([&] {
    require(scene, "null argument");
    const sbp::ValidationReport rep = sbp::validate_scene(scene->scene);
    if (!rep.accepted()) sbp::fail(sbp::ErrorCode::validation, "scene rejected: " + rep.failures());
  });
}

void sbp_scene_free(sbp_scene* scene) { delete scene; }

sbp_status sbp_solve(const sbp_scene* scene, sbp_solution** out) {
  return guarded([&] {
    require(scene && out, "null argument");
    auto sol = std::make_unique<sbp_solution>();
    sol->problem = sbp::solve_scene(scene->scene);
    sol->table = sbp::solution_table(*sol->problem);
    *out = sol.release();
  });
}

sbp_status sbp_solution_size(const sbp_solution* sol, size_t* nodes) {
  return guarded([&] {
    require(sol && nodes, "null argument");
    *nodes = sol->table.s.size();
  });
}

sbp_status sbp_solution_columns(const sbp_solution* sol, double* s, double* a, double* p, double* a4ps,
                                double* a4ps_s, size_t capacity) {
  return guarded([&] {
    require(sol, "null argument");
    const auto& t = sol->table;
    require(capacity >= t.s.size(), "output capacity smaller than the node count");
    auto copy = [](const std::vector<double>& src, double* dst) {
      if (dst) std::memcpy(dst, src.data(), src.size() * sizeof(double));
    };
    copy(t.s, s);
    copy(t.a, a);
    copy(t.p, p);
    copy(t.a4ps, a4ps);
    copy(t.a4ps_s, a4ps_s);
  });
}

sbp_status sbp_solution_field(const sbp_solution* sol, const double x[3], double* q) {
  return guarded([&] {
    require(sol && x && q, "null argument");
    const sbp::Problem& prob = *sol->problem;
    *q = sbp::q_sb(prob.field_context(), prob.to_unit(sbp::Vec3(x[0], x[1], x[2])));
  });
}

sbp_status sbp_solution_condition(const sbp_solution* sol, double* estimate) {
  return guarded([&] {
    require(sol && estimate, "null argument");
    *estimate = sol->problem->solution.condition_estimate;
  });
}

void sbp_solution_free(sbp_solution* sol) { delete sol; }

sbp_status sbp_run(const sbp_run_config* config, sbp_report** out) {
  return guarded([&] {
    require(config && out, "null argument");
    require(config->eps_count == 0 || config->eps, "eps list is null");
    require(config->nodes_count == 0 || config->nodes, "node list is null");
    sbp::RunConfig cfg;
    if (config->scene) cfg.scene = config->scene;
    switch (config->mode) {
      case SBP_MODE_SOLVE: cfg.mode = sbp::RunMode::solve; break;
      case SBP_MODE_SWEEP_EPS: cfg.mode = sbp::RunMode::sweep_eps; break;
      case SBP_MODE_SWEEP_MESH: cfg.mode = sbp::RunMode::sweep_mesh; break;
      case SBP_MODE_SLICE: cfg.mode = sbp::RunMode::slice; break;
      case SBP_MODE_RESIDUALS: cfg.mode = sbp::RunMode::residuals; break;
      case SBP_MODE_FIGURES: cfg.mode = sbp::RunMode::figures; break;
      default: sbp::fail(sbp::ErrorCode::argument, "unknown run mode");
    }
    cfg.eps.assign(config->eps, config->eps + config->eps_count);
    cfg.nodes.assign(config->nodes, config->nodes + config->nodes_count);
    if (config->theta_order != 0) cfg.theta_order = config->theta_order;
    if (config->out_dir) cfg.out_dir = config->out_dir;
    cfg.seed = config->seed;
    const sbp::RunReport rep = sbp::run(cfg);
    auto r = std::make_unique<sbp_report>();
    r->json = rep.json.dump(2);
    for (const auto& f : rep.files) r->files.push_back(f.string());
    *out = r.release();
  });
}

const char* sbp_report_json(const sbp_report* report) { return report ? report->json.c_str() : ""; }

size_t sbp_report_file_count(const sbp_report* report) { return report ? report->files.size() : 0; }

const char* sbp_report_file(const sbp_report* report, size_t index) {
  if (!report || index >= report->files.size()) return nullptr;
  return report->files[index].c_str();
}

void sbp_report_free(sbp_report* report) { delete report; }

sbp_status sbp_compare_reports(const char* path_a, const char* path_b, sbp_report** out) {
  return guarded([&] {
    require(path_a && path_b && out, "null argument");
    const sbp::Comparison c = sbp::compare_runs(sbp::load_report(path_a), sbp::load_report(path_b));
    auto r = std::make_unique<sbp_report>();
    r->json = c.json.dump(2);
    *out = r.release();
  });
}

const char* const* sbp_builtin_scenes(void) {
  static const std::vector<std::string> names = sbp::builtin_scene_names();
  static const std::vector<const char*> ptrs = [] {
    std::vector<const char*> v;
    for (const auto& n : names) v.push_back(n.c_str());
    v.push_back(nullptr);
    return v;
  }();
  return ptrs.data();
}

}  // extern "C"
