#include "wgqed.h"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "wgqed/errors.hpp"
#include "wgqed/fitmodels.hpp"
#include "wgqed/jones.hpp"
#include "wgqed/noise.hpp"
#include "wgqed/threemode.hpp"
#include "wgqed/waveguide.hpp"

namespace {

thread_local std::string g_error_message;
thread_local int g_error_class = 0;

wgqed_status fail(int error_class, const std::string& message) {
    g_error_class = error_class;
    g_error_message = message;
    return static_cast<wgqed_status>(error_class);
}

template <typename Fn>
wgqed_status guarded(Fn&& fn) {
    try {
        fn();
        return WGQED_OK;
    } catch (const wgqed::Error& e) {
        return fail(static_cast<int>(e.error_class()), e.what());
    } catch (const std::exception& e) {
        return fail(WGQED_ERR_NUMERICAL, e.what());
    }
}

wgqed_status require(bool condition, const char* message) {
    return condition ? WGQED_OK : fail(WGQED_ERR_PARSE, message);
}

std::vector<double> to_vector(const double* data, size_t n) {
    return {data, data + n};
}

wgqed::SpectrumChannel to_channel(wgqed_channel channel) {
    switch (channel) {
        case WGQED_CHANNEL_TRANSMISSION: return wgqed::SpectrumChannel::Transmission;
        case WGQED_CHANNEL_REFLECTION: return wgqed::SpectrumChannel::Reflection;
        case WGQED_CHANNEL_PSB: return wgqed::SpectrumChannel::Psb;
    }
    throw wgqed::ParseError("unknown channel code");
}

} // namespace

struct wgqed_fit_result {
    wgqed::FitResult result;
    std::vector<std::pair<std::string, double>> extras; // stable index order
};

struct wgqed_noise {
    wgqed::NoiseSource source;
};

extern "C" {

const char* wgqed_last_error_message(void) { return g_error_message.c_str(); }

int wgqed_last_error_class(void) { return g_error_class; }

wgqed_status wgqed_transmission(double beta, double gamma_total, double mean_photon_number,
                                double detuning, double* out) {
    if (auto s = require(out != nullptr, "null output pointer")) return s;
    return guarded([&] {
        wgqed::EmitterWaveguideParams params;
        params.beta = beta;
        params.gamma_total = gamma_total;
        wgqed::DriveParams drive;
        drive.mean_photon_number = mean_photon_number;
        drive.detuning = detuning;
        *out = wgqed::transmission(params, drive);
    });
}

wgqed_status wgqed_transmission_contrast(double beta, double gamma_dephasing, double gamma_total,
                                         double* out) {
    if (auto s = require(out != nullptr, "null output pointer")) return s;
    return guarded(
        [&] { *out = wgqed::transmission_contrast(beta, gamma_dephasing, gamma_total); });
}

wgqed_status wgqed_beta_from_contrast(double contrast, double* out) {
    if (auto s = require(out != nullptr, "null output pointer")) return s;
    return guarded([&] { *out = wgqed::beta_from_contrast(contrast); });
}

wgqed_status wgqed_reflection(double xi, double phi, double gamma_total, double detuning,
                              double* out) {
    if (auto s = require(out != nullptr, "null output pointer")) return s;
    return guarded([&] {
        wgqed::ReflectionParams params;
        params.xi = xi;
        params.phi = phi;
        params.gamma_total = gamma_total;
        *out = wgqed::reflection(params, detuning);
    });
}

wgqed_status wgqed_critical_photon_number(double beta, double* out) {
    if (auto s = require(out != nullptr, "null output pointer")) return s;
    return guarded([&] { *out = wgqed::critical_photon_number(beta); });
}

wgqed_status wgqed_coupling_efficiency(double critical_power_watts, double n_c,
                                       double linewidth_hz, double optical_frequency_hz,
                                       double* out) {
    if (auto s = require(out != nullptr, "null output pointer")) return s;
    return guarded([&] {
        *out = wgqed::coupling_efficiency_from_critical_power(critical_power_watts, n_c,
                                                              linewidth_hz, optical_frequency_hz);
    });
}

wgqed_status wgqed_cooperativity(double beta, double* out) {
    if (auto s = require(out != nullptr, "null output pointer")) return s;
    return guarded([&] { *out = wgqed::cooperativity(beta); });
}

wgqed_status wgqed_resonant_g2_value(double tau, double gamma_decay, double omega_rabi,
                                     double offset, double* out) {
    if (auto s = require(out != nullptr, "null output pointer")) return s;
    return guarded([&] { *out = wgqed::resonant_g2(tau, gamma_decay, omega_rabi, offset); });
}

wgqed_status wgqed_rate_conversions(double* lifetime_s, double* decay_rate,
                                    double* linewidth_hz) {
    if (auto s = require(lifetime_s && decay_rate && linewidth_hz, "null conversion pointer")) {
        return s;
    }
    const int positives = (*lifetime_s > 0.0) + (*decay_rate > 0.0) + (*linewidth_hz > 0.0);
    if (positives != 1) {
        return fail(WGQED_ERR_PARSE, "exactly one of lifetime, decay rate, linewidth must be set");
    }
    return guarded([&] {
        wgqed::RateConversions r{};
        if (*lifetime_s > 0.0) {
            r = wgqed::rates_from_lifetime(*lifetime_s);
        } else if (*decay_rate > 0.0) {
            r = wgqed::rates_from_decay_rate(*decay_rate);
        } else {
            r = wgqed::rates_from_linewidth(*linewidth_hz);
        }
        *lifetime_s = r.lifetime_s;
        *decay_rate = r.decay_rate;
        *linewidth_hz = r.linewidth_hz;
    });
}

wgqed_status wgqed_effective_beta(double beta_ideal, double radiative_efficiency, double* out) {
    if (auto s = require(out != nullptr, "null output pointer")) return s;
    return guarded([&] { *out = wgqed::effective_beta(beta_ideal, radiative_efficiency); });
}

wgqed_status wgqed_lorentzian_curve(double center, double fwhm, double height, double offset,
                                    const double* x, size_t n, double* out) {
    if (auto s = require(x && out, "null array pointer")) return s;
    return guarded([&] {
        for (size_t k = 0; k < n; ++k) {
            out[k] = wgqed::lorentzian_model(x[k], center, fwhm, height, offset);
        }
    });
}

wgqed_status wgqed_saturation_curve(double beta, double critical_power, const double* power,
                                    size_t n, double* out) {
    if (auto s = require(power && out, "null array pointer")) return s;
    return guarded([&] {
        for (size_t k = 0; k < n; ++k) {
            out[k] = wgqed::saturation_model(power[k], beta, critical_power);
        }
    });
}

wgqed_status wgqed_reflection_curve(double scale, double center, double gamma_total, double xi,
                                    double phi, const double* x, size_t n, double* out) {
    if (auto s = require(x && out, "null array pointer")) return s;
    return guarded([&] {
        wgqed::ReflectionParams params;
        params.xi = xi;
        params.phi = phi;
        params.gamma_total = gamma_total;
        for (size_t k = 0; k < n; ++k) {
            out[k] = scale * wgqed::reflection(params, x[k] - center);
        }
    });
}

wgqed_status wgqed_resonant_g2_curve(double gamma_decay, double omega_rabi, double offset,
                                     const double* tau, size_t n, double* out) {
    if (auto s = require(tau && out, "null array pointer")) return s;
    return guarded([&] {
        for (size_t k = 0; k < n; ++k) {
            out[k] = wgqed::resonant_g2(tau[k], gamma_decay, omega_rabi, offset);
        }
    });
}

wgqed_status wgqed_spectrum(double beta, double drive_fraction, wgqed_channel channel, double xi,
                            double phi, const double* detuning, size_t n, double* out) {
    if (auto s = require(detuning && out, "null array pointer")) return s;
    if (auto s = require(n > 0, "empty detuning grid")) return s;
    return guarded([&] {
        auto config = wgqed::ThreeModeConfig::for_beta(beta, drive_fraction);
        wgqed::Complex alpha(0.0, 0.0);
        if (to_channel(channel) == wgqed::SpectrumChannel::Reflection) {
            alpha = wgqed::displacement_for_xi(config, xi, phi);
        }
        auto trace =
            wgqed::spectrum_sweep(config, to_vector(detuning, n), to_channel(channel), alpha);
        for (size_t k = 0; k < n; ++k) out[k] = trace.y[k];
    });
}

wgqed_status wgqed_g2(double beta, double drive_fraction, wgqed_channel channel_1,
                      wgqed_channel channel_2, double xi, double phi, const double* tau, size_t n,
                      double* out) {
    if (auto s = require(tau && out, "null array pointer")) return s;
    if (auto s = require(n > 0, "empty delay grid")) return s;
    return guarded([&] {
        auto config = wgqed::ThreeModeConfig::for_beta(beta, drive_fraction);
        const auto ch1 = to_channel(channel_1);
        const auto ch2 = to_channel(channel_2);
        const bool reflective = ch1 == wgqed::SpectrumChannel::Reflection ||
                                ch2 == wgqed::SpectrumChannel::Reflection;
        wgqed::CorrelationTrace trace;
        if (reflective) {
            // The displaced frame populates high Fock states of the output
            // mode, so the full model (with its truncation guard) is used.
            const wgqed::Complex alpha = wgqed::displacement_for_xi(config, xi, phi);
            trace = wgqed::g2(config, ch1, ch2, to_vector(tau, n), alpha);
        } else {
            // In the weak-drive regime three total excitations reproduce the
            // full model to solver precision at a fraction of the cost.
            auto full = wgqed::build_system(config);
            auto restricted = wgqed::restrict_excitations(full, 3);
            auto op = [&](wgqed::SpectrumChannel ch) {
                switch (ch) {
                    case wgqed::SpectrumChannel::Transmission: return restricted.transmission_op;
                    case wgqed::SpectrumChannel::Reflection: return restricted.reflection_op;
                    case wgqed::SpectrumChannel::Psb: return restricted.psb_op;
                }
                throw wgqed::ParseError("unknown channel code");
            };
            trace = wgqed::g2_correlation(restricted, op(ch1), op(ch2), to_vector(tau, n));
        }
        // Trace values follow the sorted delay order; map back to the input.
        for (size_t k = 0; k < n; ++k) {
            for (size_t j = 0; j < trace.tau.size(); ++j) {
                if (trace.tau[j] == tau[k]) {
                    out[k] = trace.values[j];
                    break;
                }
            }
        }
    });
}

namespace {

wgqed_status finish_fit(wgqed::FitResult&& result, wgqed_fit_result** out) {
    auto* handle = new wgqed_fit_result{std::move(result), {}};
    for (const auto& [name, value] : handle->result.extras) {
        handle->extras.emplace_back(name, value);
    }
    *out = handle;
    return WGQED_OK;
}

std::vector<double> sigma_vector(const double* sigma, size_t n) {
    return sigma ? std::vector<double>(sigma, sigma + n) : std::vector<double>{};
}

} // namespace

wgqed_status wgqed_fit_lorentzian(const double* x, const double* y, const double* sigma, size_t n,
                                  wgqed_fit_result** out) {
    if (auto s = require(x && y && out, "null fit argument")) return s;
    return guarded([&] {
        wgqed::SpectrumTrace trace{to_vector(x, n), to_vector(y, n), sigma_vector(sigma, n)};
        finish_fit(wgqed::fit_lorentzian(trace), out);
    });
}

wgqed_status wgqed_fit_saturation(const double* power, const double* contrast, const double* sigma,
                                  size_t n, wgqed_fit_result** out) {
    if (auto s = require(power && contrast && out, "null fit argument")) return s;
    return guarded([&] {
        finish_fit(wgqed::fit_saturation(to_vector(power, n), to_vector(contrast, n),
                                         sigma_vector(sigma, n)),
                   out);
    });
}

wgqed_status wgqed_fit_reflection(const double* x, const double* y, const double* sigma, size_t n,
                                  wgqed_fit_result** out) {
    if (auto s = require(x && y && out, "null fit argument")) return s;
    return guarded([&] {
        wgqed::SpectrumTrace trace{to_vector(x, n), to_vector(y, n), sigma_vector(sigma, n)};
        finish_fit(wgqed::fit_reflection(trace), out);
    });
}

wgqed_status wgqed_fit_resonant_g2(const double* tau, const double* value, const double* sigma,
                                   size_t n, wgqed_fit_result** out) {
    if (auto s = require(tau && value && out, "null fit argument")) return s;
    return guarded([&] {
        finish_fit(wgqed::fit_resonant_g2(to_vector(tau, n), to_vector(value, n),
                                          sigma_vector(sigma, n)),
                   out);
    });
}

size_t wgqed_fit_result_param_count(const wgqed_fit_result* result) {
    return result ? result->result.names.size() : 0;
}

const char* wgqed_fit_result_param_name(const wgqed_fit_result* result, size_t index) {
    if (!result || index >= result->result.names.size()) return nullptr;
    return result->result.names[index].c_str();
}

double wgqed_fit_result_param_value(const wgqed_fit_result* result, size_t index) {
    if (!result || index >= result->result.names.size()) return NAN;
    return result->result.values(static_cast<Eigen::Index>(index));
}

double wgqed_fit_result_param_sigma(const wgqed_fit_result* result, size_t index) {
    if (!result || index >= result->result.names.size()) return NAN;
    return result->result.sigmas(static_cast<Eigen::Index>(index));
}

double wgqed_fit_result_reduced_chi_square(const wgqed_fit_result* result) {
    return result ? result->result.reduced_chi_square : NAN;
}

int wgqed_fit_result_converged(const wgqed_fit_result* result) {
    return result && result->result.converged ? 1 : 0;
}

int wgqed_fit_result_iterations(const wgqed_fit_result* result) {
    return result ? result->result.iterations : 0;
}

size_t wgqed_fit_result_flag_count(const wgqed_fit_result* result) {
    return result ? result->result.flags.size() : 0;
}

const char* wgqed_fit_result_flag(const wgqed_fit_result* result, size_t index) {
    if (!result || index >= result->result.flags.size()) return nullptr;
    return result->result.flags[index].c_str();
}

size_t wgqed_fit_result_extra_count(const wgqed_fit_result* result) {
    return result ? result->extras.size() : 0;
}

const char* wgqed_fit_result_extra_name(const wgqed_fit_result* result, size_t index) {
    if (!result || index >= result->extras.size()) return nullptr;
    return result->extras[index].first.c_str();
}

double wgqed_fit_result_extra_value(const wgqed_fit_result* result, size_t index) {
    if (!result || index >= result->extras.size()) return NAN;
    return result->extras[index].second;
}

void wgqed_fit_result_free(wgqed_fit_result* result) { delete result; }

wgqed_status wgqed_polarization_map(const double* grid1, size_t n1, const double* grid2, size_t n2,
                                    double scale, double* out) {
    if (auto s = require(grid1 && grid2 && out, "null array pointer")) return s;
    return guarded([&] {
        auto surface =
            wgqed::polarization_map(to_vector(grid1, n1), to_vector(grid2, n2), scale);
        for (size_t r = 0; r < n1; ++r) {
            for (size_t c = 0; c < n2; ++c) {
                out[r * n2 + c] =
                    surface(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
        }
    });
}

wgqed_noise* wgqed_noise_create(uint64_t seed) { return new wgqed_noise{wgqed::NoiseSource(seed)}; }

void wgqed_noise_free(wgqed_noise* noise) { delete noise; }

double wgqed_noise_uniform(wgqed_noise* noise) { return noise->source.uniform(); }

double wgqed_noise_gaussian(wgqed_noise* noise, double mean, double sigma) {
    return noise->source.gaussian(mean, sigma);
}

long long wgqed_noise_poisson(wgqed_noise* noise, double mean) {
    return static_cast<long long>(noise->source.poisson(mean));
}

} // extern "C"
