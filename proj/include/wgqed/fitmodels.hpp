#ifndef WGQED_FITMODELS_HPP
#define WGQED_FITMODELS_HPP

#include <complex>
#include <vector>

#include "wgqed/fit.hpp"

namespace wgqed {

// Sampled 1-D trace; sigmas may be empty (unweighted fit, covariance scaled
// by the reduced chi-square).
struct SpectrumTrace {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma;
};

// Field sampled along the propagation axis; only the imaginary part enters
// the mode decomposition.
struct FieldTrace {
    std::vector<double> z_positions;             // meters
    std::vector<std::complex<double>> field;     // complex field along the dipole axis
    std::complex<double> dipole_field;           // field at the dipole location
};

struct ModeAmplitude {
    double amplitude;  // >= 0
    double wavenumber; // rad/m
    double phase;      // rad
};

struct FieldBetaResult {
    double beta_ideal;
    std::vector<ModeAmplitude> modes; // sorted by descending amplitude
};

// offset + height / (1 + (2(x - center)/fwhm)^2). Units follow the x axis.
FitResult fit_lorentzian(const SpectrumTrace& trace);
double lorentzian_model(double x, double center, double fwhm, double height, double offset);

// Saturating extinction contrast vs optical power:
// dT(P) = 2a - a^2 with a = beta / (1 + P/P_c). Parameters {beta, P_c}.
FitResult fit_saturation(const std::vector<double>& powers, const std::vector<double>& contrasts,
                         const std::vector<double>& sigmas);
double saturation_model(double power, double beta, double critical_power);

// scale * |1 + xi e^{i phi} / (1 - 2i(x - center)/gamma)|^2.
// Parameters {xi, phi, gamma_total, center, scale}; phi is reported as fitted
// (possibly outside [0, 2pi)) with the canonical value in extras.
// A xi estimate consistent with zero raises the FlatReflection flag.
FitResult fit_reflection(const SpectrumTrace& trace);

// Damped Rabi autocorrelation; parameters {Gamma, Omega, offset}, Omega > 0.
FitResult fit_resonant_g2(const std::vector<double>& tau, const std::vector<double>& values,
                          const std::vector<double>& sigmas);

// Omega = slope * sqrt(P) through the origin; the free-intercept diagnostic
// lands in extras as intercept / intercept_sigma.
FitResult fit_rabi_power_scaling(const std::vector<double>& powers,
                                 const std::vector<double>& omegas,
                                 const std::vector<double>& sigmas);

// Straight line phase(z) = slope * z + intercept, plus the implied spatial
// period 2pi/slope in extras (infinity flagged when the slope vanishes).
FitResult fit_phase_vs_displacement(const std::vector<double>& displacements,
                                    const std::vector<double>& phases);

// Decomposes Im(field) along z into at most two sinusoids and returns the
// dominant amplitude over Im(dipole_field).
FieldBetaResult beta_from_field_trace(const FieldTrace& trace);

// beta_eff = radiative_efficiency * beta_ideal.
double effective_beta(double beta_ideal, double radiative_efficiency);

// Removes 2pi jumps so a monotone underlying phase sweep stays monotone.
std::vector<double> unwrap_phases(const std::vector<double>& phases);

} // namespace wgqed

#endif
