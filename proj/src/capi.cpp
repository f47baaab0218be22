#include "uavrsma.h"

#include <exception>
#include <iostream>
#include <new>
#include <stdexcept>
#include <string>

#include "uavrsma/experiment.hpp"
#include "uavrsma/oracle.hpp"

namespace {

thread_local std::string g_last_error;

bool looks_like_solver_failure(const std::string& msg) {
  return msg.find("convex restriction") != std::string::npos ||
         msg.find("conic") != std::string::npos;
}

uav_status classify(const std::exception& e) {
  g_last_error = e.what();
  if (dynamic_cast<const std::invalid_argument*>(&e)) return UAV_ERR_VALIDATION;
  return looks_like_solver_failure(g_last_error) ? UAV_ERR_SOLVER : UAV_ERR_RUNTIME;
}

}  // namespace

struct uav_spec {
  uavrsma::ExperimentSpec spec;
};

extern "C" {

const char* uav_version(void) { return uavrsma::kLibraryVersion; }

const char* uav_last_error(void) { return g_last_error.c_str(); }

uav_status uav_spec_load(const char* path, uav_spec** out) {
  if (!path || !out) {
    g_last_error = "uav_spec_load: null argument";
    return UAV_ERR_VALIDATION;
  }
  *out = nullptr;
  try {
    auto* handle = new uav_spec{uavrsma::load_spec(path)};
    *out = handle;
    g_last_error.clear();
    return UAV_OK;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return UAV_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UAV_ERR_VALIDATION;  // unreadable or malformed spec file
  }
}

void uav_spec_free(uav_spec* spec) { delete spec; }

uav_status uav_spec_validate(const uav_spec* spec) {
  if (!spec) {
    g_last_error = "uav_spec_validate: null spec";
    return UAV_ERR_VALIDATION;
  }
  try {
    const auto problems = uavrsma::validate_spec(spec->spec);
    if (problems.empty()) {
      g_last_error.clear();
      return UAV_OK;
    }
    g_last_error.clear();
    for (const auto& p : problems) {
      if (!g_last_error.empty()) g_last_error += '\n';
      g_last_error += p;
    }
    return UAV_ERR_VALIDATION;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UAV_ERR_RUNTIME;
  }
}

uav_status uav_run_experiment(const uav_spec* spec) {
  if (!spec) {
    g_last_error = "uav_run_experiment: null spec";
    return UAV_ERR_VALIDATION;
  }
  try {
    const auto result = uavrsma::run_experiment(spec->spec, std::cout);
    if (result.all_ok) {
      g_last_error.clear();
      return UAV_OK;
    }
    g_last_error.clear();
    for (const auto& run : result.runs)
      if (!run.ok) {
        if (!g_last_error.empty()) g_last_error += '\n';
        g_last_error += "value " + std::to_string(run.sweep_value) + " seed " +
                        std::to_string(run.seed) + ": " + run.error;
      }
    return result.any_solver_failure ? UAV_ERR_SOLVER : UAV_ERR_RUNTIME;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

uav_status uav_emit_plots(const char* dir) {
  if (!dir) {
    g_last_error = "uav_emit_plots: null dir";
    return UAV_ERR_VALIDATION;
  }
  try {
    uavrsma::emit_plots(dir);
    g_last_error.clear();
    return UAV_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UAV_ERR_RUNTIME;
  }
}

uav_status uav_run_oracles(long samples, unsigned long seed, int* failures) {
  try {
    const auto results = uavrsma::oracle::run_all(std::cout, samples, seed);
    int failed = 0;
    for (const auto& r : results) failed += r.pass ? 0 : 1;
    if (failures) *failures = failed;
    if (failed == 0) {
      g_last_error.clear();
      return UAV_OK;
    }
    g_last_error = std::to_string(failed) + " oracle checks failed";
    return UAV_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UAV_ERR_RUNTIME;
  }
}

}  // extern "C"
