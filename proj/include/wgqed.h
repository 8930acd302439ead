#ifndef WGQED_H
#define WGQED_H

/*
 * C interface to the waveguide-QED core. Every entry point returns a status
 * code (wgqed_status); on failure the thread-local error message and class
 * are available through wgqed_last_error_*. Array arguments are caller-owned;
 * opaque handles are released with their matching _free function.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wgqed_status {
    WGQED_OK = 0,
    WGQED_ERR_PARSE = 2,     /* malformed input or configuration */
    WGQED_ERR_NUMERICAL = 3, /* solver / convergence / truncation failure */
    WGQED_ERR_PHYSICS = 4    /* parameters inconsistent with the model */
} wgqed_status;

typedef enum wgqed_channel {
    WGQED_CHANNEL_TRANSMISSION = 0,
    WGQED_CHANNEL_REFLECTION = 1,
    WGQED_CHANNEL_PSB = 2
} wgqed_channel;

typedef enum wgqed_noise_kind {
    WGQED_NOISE_NONE = 0,
    WGQED_NOISE_GAUSSIAN = 1,
    WGQED_NOISE_POISSON = 2
} wgqed_noise_kind;

/* Message and class of the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread. */
const char* wgqed_last_error_message(void);
int wgqed_last_error_class(void);

/* ---- closed-form emitter-waveguide relations ------------------------- */

/* T(detuning) for a dephasing-free emitter; rates angular (rad/s),
 * mean_photon_number in photons per lifetime. */
wgqed_status wgqed_transmission(double beta, double gamma_total, double mean_photon_number,
                                double detuning, double* out);

/* On-resonance low-power contrast beta(2-beta)/(1 + 2 gamma_deph/gamma_tot). */
wgqed_status wgqed_transmission_contrast(double beta, double gamma_dephasing, double gamma_total,
                                         double* out);

wgqed_status wgqed_beta_from_contrast(double contrast, double* out);

/* R(detuning) = |1 + xi e^{i phi} / (1 - 2 i detuning / gamma_total)|^2. */
wgqed_status wgqed_reflection(double xi, double phi, double gamma_total, double detuning,
                              double* out);

/* n_c = 1 / (4 beta^2). */
wgqed_status wgqed_critical_photon_number(double beta, double* out);

/* eta from P_c = h nu n_c linewidth / eta (linewidth in Hz). */
wgqed_status wgqed_coupling_efficiency(double critical_power_watts, double n_c,
                                       double linewidth_hz, double optical_frequency_hz,
                                       double* out);

/* C = beta / (1 - beta). */
wgqed_status wgqed_cooperativity(double beta, double* out);

/* Damped-Rabi resonant autocorrelation value. */
wgqed_status wgqed_resonant_g2_value(double tau, double gamma_decay, double omega_rabi,
                                     double offset, double* out);

/* Lifetime (s) <-> angular decay rate (rad/s) <-> linewidth (Hz). Exactly one
 * of the inputs must be positive; the other two are filled in. */
wgqed_status wgqed_rate_conversions(double* lifetime_s, double* decay_rate, double* linewidth_hz);

/* beta_eff = radiative_efficiency * beta_ideal. */
wgqed_status wgqed_effective_beta(double beta_ideal, double radiative_efficiency, double* out);

/* ---- model evaluation (synthetic data) ------------------------------- */

wgqed_status wgqed_lorentzian_curve(double center, double fwhm, double height, double offset,
                                    const double* x, size_t n, double* out);

/* Contrast vs power: 2a - a^2 with a = beta / (1 + power / critical_power). */
wgqed_status wgqed_saturation_curve(double beta, double critical_power, const double* power,
                                    size_t n, double* out);

wgqed_status wgqed_reflection_curve(double scale, double center, double gamma_total, double xi,
                                    double phi, const double* x, size_t n, double* out);

wgqed_status wgqed_resonant_g2_curve(double gamma_decay, double omega_rabi, double offset,
                                     const double* tau, size_t n, double* out);

/* ---- three-mode Lindblad simulation ---------------------------------- */

/* Normalized channel spectrum of the calibrated three-mode system matched to
 * a waveguide beta, over probe detunings (units of the emitter decay rate).
 * The drive is drive_fraction of the critical photon number. For the
 * reflection channel xi > 0 and phi set the interfering coherent offset;
 * they are ignored otherwise. */
wgqed_status wgqed_spectrum(double beta, double drive_fraction, wgqed_channel channel, double xi,
                            double phi, const double* detuning, size_t n, double* out);

/* Normalized two-time correlation between two channels at the listed delays
 * (units of inverse emitter decay rate). xi/phi as in wgqed_spectrum; used
 * only when a reflection channel is involved. */
wgqed_status wgqed_g2(double beta, double drive_fraction, wgqed_channel channel_1,
                      wgqed_channel channel_2, double xi, double phi, const double* tau, size_t n,
                      double* out);

/* ---- fitting --------------------------------------------------------- */

typedef struct wgqed_fit_result wgqed_fit_result;

/* sigma may be NULL (unweighted; covariance scaled by reduced chi-square). */
wgqed_status wgqed_fit_lorentzian(const double* x, const double* y, const double* sigma, size_t n,
                                  wgqed_fit_result** out);
wgqed_status wgqed_fit_saturation(const double* power, const double* contrast, const double* sigma,
                                  size_t n, wgqed_fit_result** out);
wgqed_status wgqed_fit_reflection(const double* x, const double* y, const double* sigma, size_t n,
                                  wgqed_fit_result** out);
wgqed_status wgqed_fit_resonant_g2(const double* tau, const double* value, const double* sigma,
                                   size_t n, wgqed_fit_result** out);

size_t wgqed_fit_result_param_count(const wgqed_fit_result* result);
const char* wgqed_fit_result_param_name(const wgqed_fit_result* result, size_t index);
double wgqed_fit_result_param_value(const wgqed_fit_result* result, size_t index);
double wgqed_fit_result_param_sigma(const wgqed_fit_result* result, size_t index);
double wgqed_fit_result_reduced_chi_square(const wgqed_fit_result* result);
int wgqed_fit_result_converged(const wgqed_fit_result* result);
int wgqed_fit_result_iterations(const wgqed_fit_result* result);
size_t wgqed_fit_result_flag_count(const wgqed_fit_result* result);
const char* wgqed_fit_result_flag(const wgqed_fit_result* result, size_t index);
size_t wgqed_fit_result_extra_count(const wgqed_fit_result* result);
const char* wgqed_fit_result_extra_name(const wgqed_fit_result* result, size_t index);
double wgqed_fit_result_extra_value(const wgqed_fit_result* result, size_t index);
void wgqed_fit_result_free(wgqed_fit_result* result);

/* ---- polarization ---------------------------------------------------- */

/* scale * normalized PSB counts over the outer product of the two waveplate
 * angle grids (radians); out is row-major with n1 rows and n2 columns. */
wgqed_status wgqed_polarization_map(const double* grid1, size_t n1, const double* grid2, size_t n2,
                                    double scale, double* out);

/* ---- deterministic noise --------------------------------------------- */

typedef struct wgqed_noise wgqed_noise;

wgqed_noise* wgqed_noise_create(uint64_t seed);
void wgqed_noise_free(wgqed_noise* noise);
double wgqed_noise_uniform(wgqed_noise* noise);
double wgqed_noise_gaussian(wgqed_noise* noise, double mean, double sigma);
long long wgqed_noise_poisson(wgqed_noise* noise, double mean);

#ifdef __cplusplus
}
#endif

#endif
