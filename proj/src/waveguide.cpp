#include "wgqed/waveguide.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "wgqed/errors.hpp"

namespace wgqed {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void EmitterWaveguideParams::validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw InvalidParameters("beta must lie in [0, 1]");
    }
    if (!(gamma_total > 0.0)) {
        throw InvalidParameters("gamma_total must be positive");
    }
    if (!(gamma_dephasing >= 0.0)) {
        throw InvalidParameters("gamma_dephasing must be non-negative");
    }
    if (!(coupling_efficiency >= 0.0 && coupling_efficiency <= 1.0)) {
        throw InvalidParameters("coupling efficiency must lie in [0, 1]");
    }
}

void ReflectionParams::validate() const {
    if (!(xi >= 0.0)) {
        throw InvalidParameters("xi must be non-negative");
    }
    if (!(gamma_total > 0.0)) {
        throw InvalidParameters("gamma_total must be positive");
    }
    if (!std::isfinite(phi)) {
        throw InvalidParameters("phi must be finite");
    }
}

double ReflectionParams::canonical_phi() const {
    double p = std::fmod(phi, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    return p;
}

void DriveParams::validate() const {
    if (!(mean_photon_number >= 0.0)) {
        throw InvalidParameters("mean photon number must be non-negative");
    }
}

double transmission(const EmitterWaveguideParams& params, const DriveParams& drive) {
    params.validate();
    drive.validate();
    if (params.gamma_dephasing > 0.0) {
        throw UnsupportedInFormula(
            "the coherent transmission formula assumes zero pure dephasing; "
            "use transmission_contrast for the dephasing-scaled extinction");
    }
    double saturation = 1.0;
    if (drive.mean_photon_number > 0.0) {
        saturation += drive.mean_photon_number / critical_photon_number(params.beta);
    }
    const std::complex<double> denom =
        saturation * std::complex<double>(1.0, 2.0 * drive.detuning / params.gamma_total);
    return std::norm(1.0 - params.beta / denom);
}

double transmission_contrast(double beta, double gamma_dephasing, double gamma_total) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw InvalidParameters("beta must lie in [0, 1]");
    }
    if (!(gamma_total > 0.0) || !(gamma_dephasing >= 0.0)) {
        throw InvalidParameters("rates must be positive (total) and non-negative (dephasing)");
    }
    return beta * (2.0 - beta) / (1.0 + 2.0 * gamma_dephasing / gamma_total);
}

double beta_from_contrast(double delta_t) {
    if (!(delta_t >= 0.0 && delta_t <= 1.0)) {
        throw InvalidParameters("contrast must lie in [0, 1]");
    }
    return 1.0 - std::sqrt(1.0 - delta_t);
}

double reflection(const ReflectionParams& params, double detuning) {
    params.validate();
    const std::complex<double> lorentzian =
        1.0 / std::complex<double>(1.0, -2.0 * detuning / params.gamma_total);
    return std::norm(1.0 + params.xi * std::polar(1.0, params.phi) * lorentzian);
}

double critical_photon_number(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw InvalidParameters("beta must lie in [0, 1]");
    }
    if (beta == 0.0) {
        throw DivergentSaturation("critical photon number diverges at beta = 0");
    }
    return 1.0 / (4.0 * beta * beta);
}

double coupling_efficiency_from_critical_power(double critical_power_watts, double n_c,
                                               double linewidth_hz, double optical_frequency_hz,
                                               CriticalPowerGammaConvention convention) {
    if (!(critical_power_watts > 0.0) || !(n_c > 0.0) || !(linewidth_hz > 0.0) ||
        !(optical_frequency_hz > 0.0)) {
        throw InvalidParameters("critical-power inputs must all be positive");
    }
    const double gamma = (convention == CriticalPowerGammaConvention::LinewidthHz)
        ? linewidth_hz
        : linewidth_hz * kTwoPi;
    const double eta = constants::kPlanck * optical_frequency_hz * n_c * gamma / critical_power_watts;
    if (eta > 1.0) {
        throw InconsistentParameters(
            "computed coupling efficiency exceeds 1; check units of power, linewidth and frequency");
    }
    return eta;
}

double cooperativity(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw InvalidParameters("beta must lie in [0, 1]");
    }
    if (beta == 1.0) {
        throw DivergentCooperativity("cooperativity diverges at beta = 1");
    }
    return beta / (1.0 - beta);
}

double cavity_g_from_cooperativity(double cooperativity_value, double kappa, double gamma) {
    if (!(cooperativity_value >= 0.0) || !(kappa > 0.0) || !(gamma > 0.0)) {
        throw InvalidParameters("cooperativity must be >= 0 and rates positive");
    }
    return std::sqrt(cooperativity_value * kappa * gamma / 4.0);
}

double resonant_g2(double tau, double gamma_decay, double omega_rabi, double offset) {
    if (!(gamma_decay > 0.0) || !(omega_rabi >= 0.0)) {
        throw InvalidParameters("resonant_g2 needs gamma_decay > 0 and omega_rabi >= 0");
    }
    const double t = std::abs(tau);
    const double damping = std::exp(-0.75 * gamma_decay * t);
    if (omega_rabi * t < 1e-6) {
        return 1.0 - damping * (1.0 + 0.75 * gamma_decay * t) + offset;
    }
    const double ratio = 0.75 * gamma_decay / omega_rabi;
    return 1.0 - damping * (std::cos(omega_rabi * t) + ratio * std::sin(omega_rabi * t)) + offset;
}

RateConversions rates_from_decay_rate(double decay_rate) {
    if (!(decay_rate > 0.0)) {
        throw InvalidParameters("decay rate must be positive");
    }
    return {1.0 / decay_rate, decay_rate, decay_rate / kTwoPi};
}

RateConversions rates_from_lifetime(double lifetime_s) {
    if (!(lifetime_s > 0.0)) {
        throw InvalidParameters("lifetime must be positive");
    }
    return rates_from_decay_rate(1.0 / lifetime_s);
}

RateConversions rates_from_linewidth(double linewidth_hz) {
    if (!(linewidth_hz > 0.0)) {
        throw InvalidParameters("linewidth must be positive");
    }
    return rates_from_decay_rate(linewidth_hz * kTwoPi);
}

} // namespace wgqed
