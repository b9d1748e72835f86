/* C interface to the floq library. All functions return a floq_status;
 * results come back through out parameters. Handles are opaque and must be
 * released with the matching _destroy call. Strings returned through char**
 * are heap-allocated and released with floq_string_free.
 *
 * The last failure message (thread-local) is available via floq_last_error.
 */
#ifndef FLOQ_H_
#define FLOQ_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  FLOQ_OK = 0,
  FLOQ_ERR_INVALID = 1,   /* bad arguments / config */
  FLOQ_ERR_INVARIANT = 2, /* a checked mathematical invariant failed */
  FLOQ_ERR_RUNTIME = 3    /* I/O, solver, or other operational failure */
} floq_status;

const char* floq_version(void);
const char* floq_last_error(void);
void floq_string_free(char* s);

/* ---- band-limited field on the circle ---- */
typedef struct floq_field floq_field;

floq_status floq_field_create(int j_max, floq_field** out);
floq_status floq_field_set_coeff(floq_field* f, int j, double re, double im);
floq_status floq_field_coeff(const floq_field* f, int j, double* re, double* im);
floq_status floq_field_hs_norm(const floq_field* f, double s, double* out);
floq_status floq_field_apply_multiplier(const floq_field* f, int J,
                                        floq_field** out);
void floq_field_destroy(floq_field* f);

/* ---- structurally specified analytic potential ---- */
typedef struct floq_potential floq_potential;

floq_status floq_potential_parse(const char* json_text, floq_potential** out);
floq_status floq_potential_builtin(const char* name, floq_potential** out);
floq_status floq_potential_eval(const floq_potential* p, double x, double t,
                                double* out);
void floq_potential_destroy(floq_potential* p);

/* ---- space-time coefficient tables (V1 and its truncation V2) ---- */
typedef struct floq_table floq_table;

/* Periodize V with a Gevrey-alpha cutoff to period 2*pi*T, then truncate to
 * the (sigma, delta) rectangle. */
floq_status floq_table_build(const floq_potential* p, double T, double alpha,
                             double sigma, double delta, floq_table** out);
floq_status floq_table_coeff(const floq_table* t, int j, int n, double* re,
                             double* im);
floq_status floq_table_extent(const floq_table* t, int* j_max, int* n_max);
floq_status floq_table_gap(const floq_table* t, double* out);
void floq_table_destroy(floq_table* t);

/* ---- truncated Floquet operator and its spectrum ---- */
typedef struct floq_operator floq_operator;
typedef struct floq_spectrum floq_spectrum;

floq_status floq_operator_assemble(const floq_table* v2, int J_cap, double A,
                                   double sigma, floq_operator** out);
floq_status floq_operator_sites(const floq_operator* h, long* out);
floq_status floq_operator_entry(const floq_operator* h, int j, int n, int jp,
                                int np, double* re, double* im);
void floq_operator_destroy(floq_operator* h);

floq_status floq_eigensolve(const floq_operator* h, long dense_budget,
                            floq_spectrum** out);
floq_status floq_spectrum_count(const floq_spectrum* s, int* out);
floq_status floq_spectrum_complete(const floq_spectrum* s, int* out);
floq_status floq_spectrum_eigenvalue(const floq_spectrum* s, int k, double* out);
void floq_spectrum_destroy(floq_spectrum* s);

/* ---- high-level commands (the CLI is a thin shell over these) ----
 * config_json: command configuration document (schema documented in README);
 * out_dir: directory for result files (created if absent; NULL = no files);
 * summary: receives a JSON summary string on success and on invariant
 * failure (may be NULL). Seed/params overrides replace config values when
 * >= 0 / non-NULL. */
floq_status floq_cmd_simulate(const char* config_json, const char* out_dir,
                              int64_t seed, const char* params, char** summary);
floq_status floq_cmd_floquet(const char* config_json, const char* out_dir,
                             int64_t seed, const char* params, char** summary);
floq_status floq_cmd_localize(const char* config_json, const char* out_dir,
                              int64_t seed, const char* params, char** summary);
floq_status floq_cmd_estimates(const char* config_json, const char* out_dir,
                               int64_t seed, const char* params, char** summary);
floq_status floq_cmd_compare(const char* config_json, const char* out_dir,
                             int64_t seed, const char* params, char** summary);
floq_status floq_cmd_plot_data(const char* config_json, const char* out_dir,
                               int64_t seed, const char* params, char** summary);

#ifdef __cplusplus
}
#endif

#endif /* FLOQ_H_ */
