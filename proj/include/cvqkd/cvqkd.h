/* Public C interface of the cvqkd library.
 *
 * Every fallible call returns a cvqkd_status. On failure a description is
 * available from cvqkd_last_error() on the calling thread until the next
 * call into the library from that thread. Objects are opaque handles owned
 * by the caller and released with the matching *_free function.
 */
#ifndef CVQKD_H
#define CVQKD_H

#include <stddef.h>
#include <stdint.h>

#if defined(CVQKD_BUILDING_LIBRARY)
#define CVQKD_API __attribute__((visibility("default")))
#else
#define CVQKD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cvqkd_status {
    CVQKD_OK = 0,
    CVQKD_ERR_INVALID_ARGUMENT = 1,
    CVQKD_ERR_DIMENSION = 2,
    CVQKD_ERR_SINGULAR = 3,
    CVQKD_ERR_TRUNCATION = 4,
    CVQKD_ERR_INFEASIBLE = 5,
    CVQKD_ERR_UNPHYSICAL = 6,
    CVQKD_ERR_CONFIG = 7,
    CVQKD_ERR_IO = 8,
    CVQKD_ERR_RECONCILIATION = 9,
    CVQKD_ERR_ESTIMATION = 10,
    CVQKD_ERR_INTERNAL = 99
} cvqkd_status;

CVQKD_API const char* cvqkd_version(void);
CVQKD_API const char* cvqkd_last_error(void);
/* Config file line of the last CVQKD_ERR_CONFIG, 0 if unknown. */
CVQKD_API int cvqkd_last_error_line(void);
/* Violating photon number of the last CVQKD_ERR_INFEASIBLE, -1 if none. */
CVQKD_API int cvqkd_last_error_photon_number(void);

/* Dimension value for the Gaussian modulation. */
#define CVQKD_D_GAUSSIAN 0

typedef enum cvqkd_detection { CVQKD_HOMODYNE = 0, CVQKD_HETERODYNE = 1 } cvqkd_detection;

typedef struct cvqkd_channel {
    double T;
    double xi;
    double eta;
    int detection; /* cvqkd_detection */
    int eta_trusted;
} cvqkd_channel;

typedef struct cvqkd_keyrate_report {
    int d;
    double va;
    double T;
    double xi;
    double eta;
    int eta_trusted;
    int detection;
    double beta;
    double snr;
    double I_AB;
    double chi_BE;
    double K;
    double F;
    double delta_xi;
} cvqkd_keyrate_report;

CVQKD_API cvqkd_status cvqkd_distance_to_T(double distance_km, double loss_db_per_km, double* T);
CVQKD_API cvqkd_status cvqkd_key_rate(int d, double va, const cvqkd_channel* channel, double beta,
                                      cvqkd_keyrate_report* out);
CVQKD_API cvqkd_status cvqkd_optimize_va(int d, const cvqkd_channel* channel, double beta, double va_lo,
                                         double va_hi, double* va);
/* Correlation coefficient Z_d(V_A); d = CVQKD_D_GAUSSIAN gives Z_EPR. */
CVQKD_API cvqkd_status cvqkd_correlation(int d, double va, double* z);
CVQKD_API cvqkd_status cvqkd_equivalent_excess_noise(int d, double va, double* F, double* delta_xi);
CVQKD_API cvqkd_status cvqkd_biawgn_capacity(double snr, double* capacity);

CVQKD_API cvqkd_status cvqkd_p_succ(int d, double alpha, double* p);
/* n_max <= 0 picks a cutoff automatically. */
CVQKD_API cvqkd_status cvqkd_povm_scale(int d, double alpha, int n_max, double* pi, int* k_star,
                                        int* index_formula_k, double* index_formula_value);

/* Decoy designs. */
typedef struct cvqkd_decoy cvqkd_decoy;

typedef struct cvqkd_decoy_info {
    int d;
    double alpha;
    double p;
    double epsilon;
    double tail_slack;
    int n_max;
    size_t n_components;
} cvqkd_decoy_info;

CVQKD_API cvqkd_status cvqkd_decoy_optimize(int d, double alpha, double p, int n_radii_max, int n_max,
                                            cvqkd_decoy** out);
CVQKD_API cvqkd_status cvqkd_decoy_read(const char* path, cvqkd_decoy** out);
CVQKD_API cvqkd_status cvqkd_decoy_write(const cvqkd_decoy* design, const char* path);
CVQKD_API cvqkd_status cvqkd_decoy_get_info(const cvqkd_decoy* design, cvqkd_decoy_info* out);
CVQKD_API cvqkd_status cvqkd_decoy_component(const cvqkd_decoy* design, size_t i, double* radius, double* weight);
CVQKD_API void cvqkd_decoy_free(cvqkd_decoy* design);

/* Reconciliation codes: "rep:R", a parity-check file, or "rep:R+file". */
typedef struct cvqkd_code cvqkd_code;

CVQKD_API cvqkd_status cvqkd_code_from_spec(const char* spec, cvqkd_code** out);
CVQKD_API cvqkd_status cvqkd_code_size(const cvqkd_code* code, size_t* n_bits, size_t* k_bits);
CVQKD_API void cvqkd_code_free(cvqkd_code* code);

/* Reconciliation benchmark on the virtual channel. */
typedef struct cvqkd_bench cvqkd_bench;

typedef struct cvqkd_bench_summary {
    int d;
    double snr;
    double sigma2;
    size_t frames;
    size_t frames_ok;
    double capacity;
    double beta_achieved;
    double ks_min_p;
    double w_variance;
    double max_abs_corr_uw;
} cvqkd_bench_summary;

CVQKD_API cvqkd_status cvqkd_bench_run(int d, double snr, const cvqkd_code* code, size_t frames, uint64_t seed,
                                       cvqkd_bench** out);
CVQKD_API cvqkd_status cvqkd_bench_get_summary(const cvqkd_bench* bench, cvqkd_bench_summary* out);
CVQKD_API cvqkd_status cvqkd_bench_frame(const cvqkd_bench* bench, size_t i, int* success, size_t* raw_errors,
                                         size_t* decoded_errors);
CVQKD_API void cvqkd_bench_free(cvqkd_bench* bench);

/* Protocol configuration and sessions. */
typedef struct cvqkd_config cvqkd_config;

CVQKD_API cvqkd_status cvqkd_config_default(cvqkd_config** out);
CVQKD_API cvqkd_status cvqkd_config_load(const char* path, cvqkd_config** out);
CVQKD_API cvqkd_status cvqkd_config_set(cvqkd_config* config, const char* key, const char* value);
CVQKD_API void cvqkd_config_free(cvqkd_config* config);

typedef struct cvqkd_session cvqkd_session;

typedef struct cvqkd_session_info {
    double T_hat;
    double xi_hat;
    size_t estimation_samples;
    size_t blocks_key;
    size_t blocks_estimation;
    size_t blocks_decoy;
    size_t blocks_discarded;
    int distilled;
    size_t frames;
    size_t frames_ok;
    double beta_achieved;
    cvqkd_keyrate_report report;
    size_t n_key;
    size_t key_length;
} cvqkd_session_info;

/* Runs the configured flow with the configured seed; distills when
 * `distill` is non-zero. */
CVQKD_API cvqkd_status cvqkd_session_run(const cvqkd_config* config, int distill, cvqkd_session** out);
CVQKD_API cvqkd_status cvqkd_session_get_info(const cvqkd_session* session, cvqkd_session_info* out);
/* Writes the one-line summary into buf (always NUL-terminated when
 * buf_len > 0); *needed receives the full length excluding the NUL. */
CVQKD_API cvqkd_status cvqkd_session_summary(const cvqkd_session* session, char* buf, size_t buf_len,
                                             size_t* needed);
CVQKD_API size_t cvqkd_session_warning_count(const cvqkd_session* session);
CVQKD_API const char* cvqkd_session_warning(const cvqkd_session* session, size_t i);
CVQKD_API cvqkd_status cvqkd_session_write(const cvqkd_session* session, const char* dir);
CVQKD_API void cvqkd_session_free(cvqkd_session* session);

#ifdef __cplusplus
}
#endif

#endif /* CVQKD_H */
