// Command-line front end; talks to the core only through the C API.
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "uavrsma.h"

namespace {

void usage(std::FILE* to) {
  std::fprintf(to,
               "uavrsma-cli %s — secure UAV-RSMA sum-MOS optimizer\n"
               "usage:\n"
               "  uavrsma-cli validate <spec-file>   check a spec and all swept scenarios\n"
               "  uavrsma-cli run <spec-file>        run the sweep, write CSVs + MANIFEST\n"
               "  uavrsma-cli plot <result-dir>      render SVG charts from the CSVs\n"
               "  uavrsma-cli oracle [samples [seed]]  run the validator suite\n"
               "exit codes: 0 ok, 1 validation error, 2 runtime error, 3 solver failure\n",
               uav_version());
}

int report(uav_status st) {
  if (st != UAV_OK) std::fprintf(stderr, "error: %s\n", uav_last_error());
  return static_cast<int>(st);
}

int with_spec(const char* path, uav_status (*action)(const uav_spec*)) {
  uav_spec* spec = nullptr;
  const uav_status loaded = uav_spec_load(path, &spec);
  if (loaded != UAV_OK) return report(loaded);
  const uav_status validated = uav_spec_validate(spec);
  if (validated != UAV_OK) {
    uav_spec_free(spec);
    return report(validated);
  }
  const uav_status st = action(spec);
  uav_spec_free(spec);
  return report(st);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    usage(stderr);
    return static_cast<int>(UAV_ERR_VALIDATION);
  }
  const char* verb = argv[1];

  if (std::strcmp(verb, "--help") == 0 || std::strcmp(verb, "-h") == 0) {
    usage(stdout);
    return 0;
  }
  if (std::strcmp(verb, "validate") == 0) {
    if (argc != 3) {
      usage(stderr);
      return static_cast<int>(UAV_ERR_VALIDATION);
    }
    const int rc = with_spec(argv[2], [](const uav_spec*) { return UAV_OK; });
    if (rc == 0) std::printf("OK\n");
    return rc;
  }
  if (std::strcmp(verb, "run") == 0) {
    if (argc != 3) {
      usage(stderr);
      return static_cast<int>(UAV_ERR_VALIDATION);
    }
    return with_spec(argv[2], [](const uav_spec* s) { return uav_run_experiment(s); });
  }
  if (std::strcmp(verb, "plot") == 0) {
    if (argc != 3) {
      usage(stderr);
      return static_cast<int>(UAV_ERR_VALIDATION);
    }
    return report(uav_emit_plots(argv[2]));
  }
  if (std::strcmp(verb, "oracle") == 0) {
    const long samples = argc > 2 ? std::atol(argv[2]) : 10000;
    const unsigned long seed = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 0;
    if (samples < 1) {
      std::fprintf(stderr, "error: samples must be >= 1\n");
      return static_cast<int>(UAV_ERR_VALIDATION);
    }
    int failures = 0;
    return report(uav_run_oracles(samples, seed, &failures));
  }
  usage(stderr);
  return static_cast<int>(UAV_ERR_VALIDATION);
}
