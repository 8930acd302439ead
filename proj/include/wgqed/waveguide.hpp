#ifndef WGQED_WAVEGUIDE_HPP
#define WGQED_WAVEGUIDE_HPP

namespace wgqed {

namespace constants {
inline constexpr double kPlanck = 6.62607015e-34;      // J*s
inline constexpr double kSpeedOfLight = 299792458.0;   // m/s
} // namespace constants

// Closed-form emitter-waveguide physics. All rates and frequencies are
// angular (rad/s) unless a name says otherwise; I/O layers convert to MHz.

struct EmitterWaveguideParams {
    double beta = 0.0;             // waveguide coupling factor, in [0, 1]
    double gamma_total = 0.0;      // total decay rate (rad/s), 1/lifetime
    double gamma_dephasing = 0.0;  // pure dephasing rate (rad/s)
    double optical_frequency = 0.0; // ordinary frequency nu (Hz)
    double coupling_efficiency = 0.0; // eta, in [0, 1]

    void validate() const;
};

struct ReflectionParams {
    double xi = 0.0;          // emitter/background amplitude ratio, >= 0
    double phi = 0.0;         // relative phase (rad)
    double gamma_total = 0.0; // decay rate (rad/s)

    void validate() const;
    double canonical_phi() const; // phi wrapped into [0, 2*pi)
};

struct DriveParams {
    double mean_photon_number = 0.0; // <n> per lifetime
    double detuning = 0.0;           // probe detuning from the emitter (rad/s)

    void validate() const;
};

// Coherent transmission past the emitter:
// T = |1 - beta / ((1 + <n>/n_c)(1 + 2 i w / gamma_tot))|^2.
// Valid only for gamma_dephasing = 0; the dephasing-scaled contrast lives in
// transmission_contrast.
double transmission(const EmitterWaveguideParams& params, const DriveParams& drive);

// On-resonance low-power extinction: beta(2-beta) / (1 + 2 gamma_deph/gamma_tot).
double transmission_contrast(double beta, double gamma_dephasing, double gamma_total);

// Inverts the dephasing-free contrast, picking the physical root below 1:
// beta = 1 - sqrt(1 - delta_t).
double beta_from_contrast(double delta_t);

// Relative reflection against the far-detuned background:
// R = |1 + xi e^{i phi} / (1 - 2 i w / gamma_tot)|^2.
double reflection(const ReflectionParams& params, double detuning);

// Saturation photon number n_c = 1 / (4 beta^2).
double critical_photon_number(double beta);

// Whether gamma in the critical-power relation P_c = h nu n_c gamma / eta is
// read as the linewidth (Hz) or the angular decay rate. The Hz reading is the
// physical one here; the angular variant exists only so the rejected
// interpretation can be demonstrated.
enum class CriticalPowerGammaConvention { LinewidthHz, AngularRate };

double coupling_efficiency_from_critical_power(
    double critical_power_watts, double n_c, double linewidth_hz, double optical_frequency_hz,
    CriticalPowerGammaConvention convention = CriticalPowerGammaConvention::LinewidthHz);

// C = beta / (1 - beta).
double cooperativity(double beta);

// g = sqrt(C * kappa * gamma / 4), from C = 4 g^2 / (kappa gamma).
double cavity_g_from_cooperativity(double cooperativity_value, double kappa, double gamma);

// Damped Rabi oscillation of the resonant autocorrelation:
// g2(tau) = 1 - e^{-3 Gamma |tau| / 4} (cos(Omega tau) + (3 Gamma / 4 Omega) sin(Omega |tau|)) + offset,
// with the analytic Omega -> 0 limit 1 - e^{-3 Gamma tau / 4}(1 + 3 Gamma tau / 4) + offset.
double resonant_g2(double tau, double gamma_decay, double omega_rabi, double offset);

struct RateConversions {
    double lifetime_s;   // 1 / decay_rate
    double decay_rate;   // 1/s
    double linewidth_hz; // decay_rate / (2 pi)
};

RateConversions rates_from_lifetime(double lifetime_s);
RateConversions rates_from_decay_rate(double decay_rate);
RateConversions rates_from_linewidth(double linewidth_hz);

} // namespace wgqed

#endif
