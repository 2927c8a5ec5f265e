#ifndef ACID_ACID_H
#define ACID_ACID_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ACID_API __declspec(dllexport)
#else
#define ACID_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum acid_status {
  ACID_OK = 0,
  ACID_ERR_INVALID_ARGUMENT = 1,
  ACID_ERR_INVALID_CONFIG = 2,
  ACID_ERR_DISCONNECTED = 3,
  ACID_ERR_DIVERGED = 4,
  ACID_ERR_UNSUPPORTED = 5,
  ACID_ERR_IO = 6,
  ACID_ERR_DEADLOCK = 7,
  ACID_ERR_CLOCK_REGRESSION = 8,
  ACID_ERR_INTERNAL = 9
} acid_status;

typedef enum acid_run_kind {
  ACID_RUN_SIMULATE = 0,
  ACID_RUN_RUNTIME = 1,
  ACID_RUN_BASELINE = 2
} acid_run_kind;

typedef struct acid_config acid_config;
typedef struct acid_graph acid_graph;
typedef struct acid_trace acid_trace;

typedef struct acid_spectral {
  double chi1;
  double chi2;
  double trace_lambda;
  double lambda_norm;
} acid_spectral;

typedef struct acid_sample {
  double t;
  double consensus_sq;
  double loss_mean;
  double dist_opt_sq; /* NaN when the objective has no closed-form optimum */
  double grad_norm_sq_mean;
  uint64_t grad_events;
  uint64_t comm_events;
} acid_sample;

typedef struct acid_summary {
  double gamma;
  double gamma_bound;
  double eta;
  double alpha;
  double alpha_tilde;
  double chi;
  uint64_t events;
  uint64_t rejected_comm_events;
  double time_avg_grad_norm;
  /* runtime runs only, zero otherwise */
  int has_timing;
  double wall_seconds;
  double measured_ratio;
  double tracker_gap;
  double ledger_rel_error;
} acid_summary;

/* Message of the last failed call on this thread; never NULL. */
ACID_API const char* acid_last_error(void);
ACID_API const char* acid_status_name(acid_status status);

/* Strings returned through char** are owned by the caller. */
ACID_API void acid_string_free(char* s);

ACID_API acid_status acid_config_new(acid_config** out);
ACID_API acid_status acid_config_parse_string(const char* text, acid_config** out);
ACID_API acid_status acid_config_parse_file(const char* path, acid_config** out);
ACID_API acid_status acid_config_set(acid_config* cfg, const char* key, const char* value);
ACID_API acid_status acid_config_get(const acid_config* cfg, const char* key, char** out);
ACID_API acid_status acid_config_to_text(const acid_config* cfg, char** out);
ACID_API acid_status acid_config_seed_count(const acid_config* cfg, size_t* out);
ACID_API acid_status acid_config_seed_at(const acid_config* cfg, size_t index, uint64_t* out);
ACID_API void acid_config_free(acid_config* cfg);

/* kind: ring | complete | star */
ACID_API acid_status acid_graph_build(const char* kind, size_t n, double ratio, acid_graph** out);
/* Graph described by the topology keys of a config (custom edges included). */
ACID_API acid_status acid_graph_from_config(const acid_config* cfg, acid_graph** out);
ACID_API acid_status acid_graph_node_count(const acid_graph* g, size_t* out);
ACID_API acid_status acid_graph_spectral(const acid_graph* g, acid_spectral* out);
ACID_API acid_status acid_graph_effective_resistance(const acid_graph* g, size_t i, size_t j,
                                                     double* out);
ACID_API void acid_graph_free(acid_graph* g);

/* One run of the config at `seed` (the config's seeds list is ignored). */
ACID_API acid_status acid_run(const acid_config* cfg, acid_run_kind kind, uint64_t seed,
                              acid_trace** out);
ACID_API acid_status acid_trace_sample_count(const acid_trace* tr, size_t* out);
ACID_API acid_status acid_trace_sample(const acid_trace* tr, size_t index, acid_sample* out);
ACID_API acid_status acid_trace_summary(const acid_trace* tr, acid_summary* out);
ACID_API acid_status acid_trace_csv(const acid_trace* tr, char** out);
ACID_API acid_status acid_trace_json(const acid_trace* tr, char** out);
/* Atomic writes; either path may be NULL to skip it. */
ACID_API acid_status acid_trace_write(const acid_trace* tr, const char* csv_path,
                                      const char* json_path);
ACID_API void acid_trace_free(acid_trace* tr);

/* Accelerated / non-accelerated x ratios matrix over the config's seeds. */
ACID_API acid_status acid_compare(const acid_config* cfg, char** csv_out, char** json_out);

/* Atomic write of an arbitrary string, for callers that assemble outputs. */
ACID_API acid_status acid_write_file(const char* path, const char* content);

#ifdef __cplusplus
}
#endif

#endif
