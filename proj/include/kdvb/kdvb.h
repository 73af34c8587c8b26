#ifndef KDVB_C_API_H
#define KDVB_C_API_H

/* C interface to the KdV-Burgers half-line laboratory.
 *
 * Scalar operations fill caller-provided buffers; experiment-level runs
 * return an opaque kdvb_result holding named numeric tables plus a JSON
 * scalar report. Every entry point returns a kdvb_status; on failure the
 * thread-local message kdvb_last_error() describes the violated
 * precondition (KDVB_ERR_INVALID) or the numerical failure (KDVB_ERR_NUMERIC).
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kdvb_status {
    KDVB_OK = 0,
    KDVB_ERR_INVALID = 2,
    KDVB_ERR_NUMERIC = 3
} kdvb_status;

const char* kdvb_version(void);
const char* kdvb_last_error(void);

/* --- scalar / array operations ------------------------------------------ */

/* Roots of r^3 + r^2 - tau = 0. roots = {re0,im0,re1,im1,re2,im2};
 * decaying[i] = 1 if Re r_i < 0 outside the dead band; degenerate flags a
 * root inside it. */
kdvb_status kdvb_characteristic_roots(double tau_re, double tau_im, double roots[6],
                                      int decaying[3], int* n_decaying, int* degenerate);

/* General monic cubic z^3 + c2 z^2 + c1 z + c0. */
kdvb_status kdvb_cubic_roots(double c2_re, double c2_im, double c1_re, double c1_im, double c0_re,
                             double c0_im, double roots[6]);

/* Spectral multiplication by e^{-(i xi^3 + xi^2) t} on a periodic grid of n
 * samples spanning `period`. Input/output are split re/im arrays of length n. */
kdvb_status kdvb_whole_line_propagate(const double* re, const double* im, long n, double period,
                                      double t, double* out_re, double* out_im);

/* lambda_n = -i (n pi / L)^3 - (n pi / L)^2 for |n| <= n_max
 * (arrays of length 2 n_max + 1), plus the gap 2 pi^3/L^3 and the minimal
 * admissible Ingham horizon pi/gap. */
kdvb_status kdvb_periodic_spectrum(double L, int n_max, double* lambda_re, double* lambda_im,
                                   double* gap, double* t_star_min);

/* Observability ratio ||u0||^2 / ||u||^2_{(-l,l)x(0,T)} for coefficients
 * c_n, n = -n_max..n_max. use_quadrature = 0 evaluates the modal cross terms
 * in closed form; nx/nt size the quadrature otherwise. */
kdvb_status kdvb_observability_ratio(double L, double l, double T, int n_max, const double* c_re,
                                     const double* c_im, int use_quadrature, int nx, int nt,
                                     double* ratio);

/* Non-controllable mode family: b = sqrt(a(2+3a)), lambda = 2a(1+2a)^2,
 * residual = max |z^3 + z^2 + lambda| over both characteristic roots. */
kdvb_status kdvb_noncontrol_mode(double a, double* b, double* lambda, double* root_residual);

/* --- result handles ------------------------------------------------------ */

typedef struct kdvb_result kdvb_result;

void kdvb_result_free(kdvb_result* r);
int kdvb_result_table_count(const kdvb_result* r);
const char* kdvb_result_table_name(const kdvb_result* r, int table);
kdvb_status kdvb_result_table_dims(const kdvb_result* r, int table, long* rows, long* cols);
const char* kdvb_result_table_column(const kdvb_result* r, int table, int col);
/* row-major data, rows*cols doubles, owned by the result */
const double* kdvb_result_table_data(const kdvb_result* r, int table);
/* scalar diagnostics as a JSON object string, owned by the result */
const char* kdvb_result_scalars_json(const kdvb_result* r);

/* --- experiment-level runs ---------------------------------------------- */

/* Whole-line IVP: u0 sampled on n points over [x_min, x_max]; writes
 * snapshot and norm tables for nt times up to t_max. */
kdvb_status kdvb_run_ivp(const double* u0, long n, double x_min, double x_max, double t_max,
                         int nt, kdvb_result** out);

/* Linear half-line IBVP u_t - u_xxx - u_xx = 0 with data (u0, h, g):
 * u0 on nx points over [0, X]; h, g on nt points over [0, T].
 * Produces the field, traces, and defect diagnostics. */
kdvb_status kdvb_run_linear_ibvp(const double* u0, long nx, double X, const double* h,
                                 const double* g, long nt, double T, kdvb_result** out);

/* Nonlinear fixed point for u_t - u_xxx - u_xx = u u_x (+ forcing).
 * forcing may be NULL; otherwise x-major nx*nt. */
kdvb_status kdvb_run_nonlinear(const double* u0, long nx, double X, const double* h,
                               const double* g, long nt, double T, const double* forcing,
                               int nonlinearity_on, double tol, int max_iter, kdvb_result** out);

/* Energy ledger of the homogeneous-boundary semigroup evolution of u0. */
kdvb_status kdvb_run_energy_audit(const double* u0, long nx, double X, double T, int nt,
                                  kdvb_result** out);

/* Observability ensemble study at (L, l, T): max ratio over n_draws random
 * coefficient vectors, with quadrature-doubling and mode-doubling stability. */
kdvb_status kdvb_run_observability(double L, double l, double T, int n_max, int n_draws,
                                   unsigned long long seed, kdvb_result** out);

/* Coefficient positivity scan and sampled verification of the weighted
 * inequality at s = 2 s0. */
kdvb_status kdvb_run_carleman(double L, double T, double epsilon, int nx, int nt, int n_samples,
                              unsigned long long seed, kdvb_result** out);

/* Control synthesis for P v = f on (x_min,x_max)x(0,T), f x-major with
 * support in [t1, t2]. */
kdvb_status kdvb_run_hum(const double* f, long nx, double x_min, double x_max, long nt, double T,
                         double t1, double t2, double epsilon, int n_basis_x, int n_basis_t,
                         kdvb_result** out);

/* Mode table and blow-up scan over decreasing a values. */
kdvb_status kdvb_run_modes(const double* a_values, int n_a, double X, double T, int nx, int nt,
                           kdvb_result** out);

/* Three-stage steering of u0 to uT (both on nx points over [0, X]). */
kdvb_status kdvb_run_steer(const double* u0, const double* uT, long nx, double X, double T,
                           int nt, double beta, double t1, double t2, double epsilon,
                           int n_basis_x, int n_basis_t, kdvb_result** out);

#ifdef __cplusplus
}
#endif

#endif
