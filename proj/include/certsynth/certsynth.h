#ifndef CERTSYNTH_H
#define CERTSYNTH_H

/* C interface to the certificate synthesis library. All handles are opaque
 * and owned by the caller once returned; release them with the matching
 * *_free function. Functions returning certsynth_status leave a message for
 * certsynth_last_error() on failure. Strings returned through char** must be
 * released with certsynth_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(CERTSYNTH_BUILDING)
#define CERTSYNTH_API __attribute__((visibility("default")))
#else
#define CERTSYNTH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum certsynth_status {
  CERTSYNTH_OK = 0,
  CERTSYNTH_ERR_ARGUMENT = 1, /* null handle or out-of-range value */
  CERTSYNTH_ERR_CONFIG = 2,   /* unknown benchmark, parse or validation error */
  CERTSYNTH_ERR_IO = 3,
  CERTSYNTH_ERR_INTERNAL = 4
} certsynth_status;

typedef struct certsynth_problem certsynth_problem;
typedef struct certsynth_result certsynth_result;
typedef struct certsynth_certificate certsynth_certificate;
typedef struct certsynth_report certsynth_report;

/* Message of the last failed call on this thread, "" if none. */
CERTSYNTH_API const char* certsynth_last_error(void);
CERTSYNTH_API void certsynth_string_free(char* s);
CERTSYNTH_API const char* certsynth_version(void);

/* ---- benchmark registry ---- */

typedef struct certsynth_benchmark_info {
  int id;
  const char* name;     /* static storage */
  const char* property; /* static storage */
  int n_states;
  int n_inputs;
  int extended; /* excluded from the default acceptance suite */
} certsynth_benchmark_info;

CERTSYNTH_API int certsynth_benchmark_count(void);
CERTSYNTH_API certsynth_status certsynth_benchmark_at(int index, certsynth_benchmark_info* out);
/* One block per benchmark: dynamics, regions and network shapes. */
CERTSYNTH_API certsynth_status certsynth_registry_listing(char** out);

/* ---- problems ---- */

/* `key` is a numeric id or "Name-Property", case-insensitive. */
CERTSYNTH_API certsynth_status certsynth_problem_from_benchmark(const char* key, certsynth_problem** out);
CERTSYNTH_API certsynth_status certsynth_problem_from_config_file(const char* path, certsynth_problem** out);
CERTSYNTH_API certsynth_status certsynth_problem_from_config_text(const char* yaml, certsynth_problem** out);
CERTSYNTH_API void certsynth_problem_free(certsynth_problem* p);

typedef struct certsynth_problem_info {
  const char* name;     /* valid while the problem lives */
  const char* property; /* static storage */
  int benchmark_id;     /* 0 for configuration files */
  int n_states;
  int n_inputs;
  uint64_t seed;
  int max_loops; /* effective budget */
  double delta;
  double gamma;
} certsynth_problem_info;

CERTSYNTH_API certsynth_status certsynth_problem_get_info(const certsynth_problem* p, certsynth_problem_info* out);

CERTSYNTH_API certsynth_status certsynth_problem_set_seed(certsynth_problem* p, uint64_t seed);
CERTSYNTH_API certsynth_status certsynth_problem_set_max_loops(certsynth_problem* p, int max_loops);
CERTSYNTH_API certsynth_status certsynth_problem_set_delta(certsynth_problem* p, double delta);
CERTSYNTH_API certsynth_status certsynth_problem_set_gamma(certsynth_problem* p, double gamma);
/* Negative selects the default weight; 0 disables the control loss. */
CERTSYNTH_API certsynth_status certsynth_problem_set_control_loss_weight(certsynth_problem* p, double weight);
CERTSYNTH_API certsynth_status certsynth_problem_set_verifier_timeout(certsynth_problem* p, double seconds);

/* ---- synthesis ---- */

typedef void (*certsynth_log_fn)(const char* line, void* user);

/* Runs the synthesis loop. A failed synthesis still returns CERTSYNTH_OK
 * with a result whose `success` field is 0. */
CERTSYNTH_API certsynth_status certsynth_synthesize(const certsynth_problem* p, certsynth_log_fn log, void* user,
                                                   certsynth_result** out);
CERTSYNTH_API void certsynth_result_free(certsynth_result* r);

typedef struct certsynth_result_summary {
  int success;
  int loops;
  long cex_count;
  double t_learn_s;
  double t_verify_s;
  double t_total_s;
} certsynth_result_summary;

CERTSYNTH_API certsynth_status certsynth_result_get_summary(const certsynth_result* r, certsynth_result_summary* out);
/* Failure reason, "" on success. Valid while the result lives. */
CERTSYNTH_API const char* certsynth_result_reason(const certsynth_result* r);
/* The last rounded candidate with its levels and problem. */
CERTSYNTH_API certsynth_status certsynth_result_certificate(const certsynth_result* r, certsynth_certificate** out);
/* Writes <stem>.cert.yaml and <stem>.net.yaml; `path_out` may be NULL. */
CERTSYNTH_API certsynth_status certsynth_result_write(const certsynth_result* r, const char* stem, char** path_out);

/* ---- certificates ---- */

CERTSYNTH_API certsynth_status certsynth_certificate_load(const char* path, certsynth_certificate** out);
/* A user-supplied certificate for `p`. `b` may be NULL; `controller` holds
 * one expression per input. */
CERTSYNTH_API certsynth_status certsynth_certificate_from_text(const certsynth_problem* p, const char* v, const char* b,
                                                              const char* const* controller, int n_controller,
                                                              certsynth_certificate** out);
CERTSYNTH_API void certsynth_certificate_free(certsynth_certificate* c);
/* `which` is "V", "B" or "u<i>". */
CERTSYNTH_API certsynth_status certsynth_certificate_function(const certsynth_certificate* c, const char* which,
                                                             char** out);
CERTSYNTH_API certsynth_status certsynth_certificate_write(const certsynth_certificate* c, const char* path);

/* ---- verification ---- */

typedef struct certsynth_check_options {
  double delta; /* <= 0 keeps the problem's delta */
  double timeout_s;
  long max_splits;
  const char* smt_dump_dir; /* NULL or "" disables SMT-LIB dumps */
  uint64_t seed;            /* for level estimation when a level is missing */
} certsynth_check_options;

CERTSYNTH_API void certsynth_check_options_default(certsynth_check_options* out);

/* Verifies every condition of the certificate without training. Missing
 * levels (ROA beta_hat, RSWA beta) are estimated or searched first and
 * stored in the certificate. */
CERTSYNTH_API certsynth_status certsynth_check(certsynth_certificate* c, const certsynth_check_options* opts,
                                              certsynth_report** out);
CERTSYNTH_API void certsynth_report_free(certsynth_report* r);
CERTSYNTH_API int certsynth_report_valid(const certsynth_report* r);
CERTSYNTH_API int certsynth_report_count(const certsynth_report* r);

typedef struct certsynth_verdict_info {
  const char* condition; /* strings and point valid while the report lives */
  const char* verdict;   /* Valid, Counterexample, DeltaSat or ResourceOut */
  double violation;
  long boxes;
  double seconds;
  const double* point; /* NULL without a witness */
  int point_dim;
  const char* detail;
} certsynth_verdict_info;

CERTSYNTH_API certsynth_status certsynth_report_verdict(const certsynth_report* r, int index, certsynth_verdict_info* out);

/* ---- simulation ---- */

typedef struct certsynth_sim_options {
  int n_init;
  double dt;
  double horizon;
  uint64_t seed;
} certsynth_sim_options;

CERTSYNTH_API void certsynth_sim_options_default(certsynth_sim_options* out);

typedef struct certsynth_sim_summary {
  int n_trajectories;
  int n_avoid_violations;
  int n_arrive_successes;
  int n_remain_violations;
  int n_blow_up;
  int checks_avoid;
  int checks_arrive;
  int checks_remain;
  double max_barrier;
  long lyapunov_increases;
  int clean;
} certsynth_sim_summary;

/* Integrates the closed loop from sampled initial states and checks the
 * avoid / arrive / remain components of the property. */
CERTSYNTH_API certsynth_status certsynth_simulate(const certsynth_certificate* c, const certsynth_sim_options* opts,
                                                 certsynth_sim_summary* out);
/* CSV t,x0,..; `x0` NULL samples one initial state with `seed`. */
CERTSYNTH_API certsynth_status certsynth_write_trajectory_csv(const certsynth_certificate* c, const double* x0, int dim,
                                                             double dt, double horizon, int stride, uint64_t seed,
                                                             const char* path);
/* CSV xi,xj,value of V or B over the domain's bounding box, other
 * coordinates at 0. */
CERTSYNTH_API certsynth_status certsynth_write_contour_csv(const certsynth_certificate* c, const char* which, int axis_i,
                                                          int axis_j, int resolution, const char* path);

#ifdef __cplusplus
}
#endif

#endif
