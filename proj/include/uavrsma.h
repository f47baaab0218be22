/* C interface to the UAV-RSMA sum-MOS optimizer. All entry points are
 * exception-safe; failures set a thread-local message readable through
 * uav_last_error() and return a uav_status other than UAV_OK. */
#ifndef UAVRSMA_H
#define UAVRSMA_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  UAV_OK = 0,
  UAV_ERR_VALIDATION = 1, /* bad spec file or inconsistent scenario */
  UAV_ERR_RUNTIME = 2,    /* I/O, parse or internal runtime failure */
  UAV_ERR_SOLVER = 3      /* a conic solve failed inside an optimization run */
} uav_status;

/* Library version string, e.g. "0.1.0". */
const char* uav_version(void);

/* Message for the most recent failure on this thread ("" when none). The
 * pointer stays valid until the next API call on the same thread. */
const char* uav_last_error(void);

/* Opaque experiment description parsed from a sectioned key = value file. */
typedef struct uav_spec uav_spec;

/* Parses the spec file; on success *out owns the handle. */
uav_status uav_spec_load(const char* path, uav_spec** out);
void uav_spec_free(uav_spec* spec);

/* Checks the spec and every swept scenario; UAV_ERR_VALIDATION lists all
 * problems in uav_last_error(). */
uav_status uav_spec_validate(const uav_spec* spec);

/* Runs the sweep and writes history.csv, summary.csv and MANIFEST to the
 * spec's output directory; progress goes to stdout. Partial results are kept
 * on failure. */
uav_status uav_run_experiment(const uav_spec* spec);

/* Renders summary.svg and trace.svg from the CSVs found in dir. */
uav_status uav_emit_plots(const char* dir);

/* Runs the full validator suite (one line per check on stdout) with the
 * given sample count per check. *failures, when non-null, receives the
 * number of failed checks; any failure yields UAV_ERR_RUNTIME. */
uav_status uav_run_oracles(long samples, unsigned long seed, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* UAVRSMA_H */
