#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wgqed/errors.hpp"
#include "wgqed/fitmodels.hpp"
#include "wgqed/noise.hpp"
#include "wgqed/waveguide.hpp"

using namespace wgqed;

namespace {

constexpr double kPi = std::numbers::pi;

SpectrumTrace make_lorentzian_trace(double center, double fwhm, double height, double offset,
                                    double span, int points) {
    SpectrumTrace t;
    for (int i = 0; i < points; ++i) {
        const double x = center - span / 2 + span * i / (points - 1);
        t.x.push_back(x);
        t.y.push_back(lorentzian_model(x, center, fwhm, height, offset));
    }
    return t;
}

} // namespace

TEST_CASE("noise-free Lorentzian is recovered to machine-level accuracy") {
    auto t = make_lorentzian_trace(0.0, 32.1, 100.0, 2.0, 300.0, 151);
    auto r = fit_lorentzian(t);
    CHECK(r.converged);
    CHECK(r.value("center") == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(r.value("fwhm") == doctest::Approx(32.1).epsilon(1e-8));
    CHECK(r.value("height") == doctest::Approx(100.0).epsilon(1e-8));
    CHECK(r.value("offset") == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("flat traces raise NoPeakError") {
    SpectrumTrace t;
    for (int i = 0; i < 20; ++i) {
        t.x.push_back(i);
        t.y.push_back(3.5);
    }
    CHECK_THROWS_AS(fit_lorentzian(t), NoPeakError);
}

TEST_CASE("center-jittered line sum fits to a diffusion-broadened width") {
    // 200 unit Lorentzians of 32.1 MHz width, centers drawn from a 7 MHz
    // Gaussian: the integrated line should fit between 36 and 40 MHz.
    NoiseSource noise(1234);
    const int points = 241;
    const double span = 360.0;
    SpectrumTrace sum;
    for (int i = 0; i < points; ++i) {
        sum.x.push_back(-span / 2 + span * i / (points - 1));
        sum.y.push_back(0.0);
    }
    for (int scan = 0; scan < 200; ++scan) {
        const double c = noise.gaussian(0.0, 7.0);
        for (int i = 0; i < points; ++i) {
            sum.y[i] += lorentzian_model(sum.x[i], c, 32.1, 1.0, 0.0);
        }
    }
    auto r = fit_lorentzian(sum);
    CHECK(r.converged);
    CHECK(r.value("fwhm") > 36.0);
    CHECK(r.value("fwhm") < 40.0);
}

TEST_CASE("noise-free saturation data inverts exactly") {
    const double beta = 0.143;
    const double pc = 0.32e-9;
    std::vector<double> powers, contrasts;
    for (int i = 0; i < 12; ++i) {
        const double p = 0.01e-9 * std::pow(30.0 / 0.01, i / 11.0);
        powers.push_back(p);
        contrasts.push_back(saturation_model(p, beta, pc));
    }
    auto r = fit_saturation(powers, contrasts, {});
    CHECK(r.converged);
    CHECK(r.value("beta") == doctest::Approx(beta).epsilon(1e-6));
    CHECK(r.value("P_c") == doctest::Approx(pc).epsilon(1e-6));
}

TEST_CASE("noisy saturation data recovers beta and P_c within tolerance") {
    const double beta = 0.143;
    const double pc = 0.32e-9;
    NoiseSource noise(77);
    std::vector<double> powers, contrasts, sigmas;
    for (int i = 0; i < 12; ++i) {
        const double p = 0.01e-9 * std::pow(30.0 / 0.01, i / 11.0);
        const double c = saturation_model(p, beta, pc);
        powers.push_back(p);
        contrasts.push_back(c * (1.0 + noise.gaussian(0.0, 0.01)));
        sigmas.push_back(0.01 * c);
    }
    auto r = fit_saturation(powers, contrasts, sigmas);
    CHECK(r.converged);
    CHECK(std::abs(r.value("beta") - beta) / beta < 0.05);
    CHECK(std::abs(r.value("P_c") - pc) / pc < 0.10);
}

TEST_CASE("saturation model limits agree with the contrast formula") {
    const double beta = 0.27;
    CHECK(saturation_model(0.0, beta, 1e-9) ==
          doctest::Approx(transmission_contrast(beta, 0.0, 1.0)).epsilon(1e-12));
    std::vector<double> powers, contrasts;
    for (int i = 0; i < 5; ++i) {
        powers.push_back(1e-9 * std::pow(10.0, i - 2));
        contrasts.push_back(-1.0);
    }
    CHECK_THROWS_AS(fit_saturation(powers, contrasts, {}), NoSignalError);
}

namespace {

SpectrumTrace make_reflection_trace(double xi, double phi, double gamma, double center,
                                    double scale, double noise_frac, NoiseSource* noise) {
    SpectrumTrace t;
    const int points = 121;
    const double span = 12.0 * gamma;
    for (int i = 0; i < points; ++i) {
        const double x = center - span / 2 + span * i / (points - 1);
        double y = scale * reflection({xi, phi, gamma}, x - center);
        if (noise) y *= 1.0 + noise->gaussian(0.0, noise_frac);
        t.x.push_back(x);
        t.y.push_back(y);
    }
    return t;
}

} // namespace

TEST_CASE("reflection fit recovers all parameters from a noisy trace") {
    const double gamma = 2.0 * kPi * 30e6;
    NoiseSource noise(31);
    auto t = make_reflection_trace(0.6, kPi / 2, gamma, 0.0, 1.0, 0.02, &noise);
    auto r = fit_reflection(t);
    CHECK(r.converged);
    CHECK(std::abs(r.value("xi") - 0.6) / 0.6 < 0.10);
    CHECK(std::abs(r.extras.at("phi_canonical") - kPi / 2) < 0.10 * kPi / 2);
    CHECK(std::abs(r.value("gamma_total") - gamma) / gamma < 0.10);
    CHECK(std::abs(r.value("scale") - 1.0) < 0.10);
}

TEST_CASE("a flat reflection trace is flagged") {
    NoiseSource noise(8);
    auto t = make_reflection_trace(0.0, 0.0, 2.0 * kPi * 30e6, 0.0, 1.0, 0.01, &noise);
    auto r = fit_reflection(t);
    CHECK(r.has_flag("FlatReflection"));
}

TEST_CASE("interference regimes at phi = 6.28, 1.57, 3.41 are told apart") {
    const double gamma = 2.0 * kPi * 30e6;
    for (double phi_true : {6.28, 1.57, 3.41}) {
        NoiseSource noise(101 + static_cast<std::uint64_t>(phi_true * 100));
        auto t = make_reflection_trace(0.6, phi_true, gamma, 0.0, 1.0, 0.01, &noise);
        auto r = fit_reflection(t);
        double d = std::abs(r.extras.at("phi_canonical") - phi_true);
        d = std::min(d, 2.0 * kPi - d); // circular distance
        CHECK(d < 0.1);
    }
}

TEST_CASE("unwrapping keeps a monotone phase sweep monotone") {
    std::vector<double> wrapped;
    for (int i = 0; i < 30; ++i) {
        const double truth = 0.5 + 0.45 * i; // sweeps past 2*pi several times
        wrapped.push_back(std::fmod(truth, 2.0 * kPi));
    }
    auto unwrapped = unwrap_phases(wrapped);
    for (size_t i = 1; i < unwrapped.size(); ++i) {
        CHECK(unwrapped[i] > unwrapped[i - 1]);
    }
}

TEST_CASE("noise-free damped-Rabi correlation inverts exactly") {
    const double gamma = 1.68e8;
    const double omega = 2.0 * kPi * 60e6;
    const double offset = 0.03;
    std::vector<double> tau, values;
    for (int i = -120; i <= 120; ++i) {
        const double t = i * 0.25e-9;
        tau.push_back(t);
        values.push_back(resonant_g2(t, gamma, omega, offset));
    }
    auto r = fit_resonant_g2(tau, values, {});
    CHECK(r.converged);
    CHECK(r.value("Gamma") == doctest::Approx(gamma).epsilon(1e-6));
    CHECK(r.value("Omega") == doctest::Approx(omega).epsilon(1e-6));
    CHECK(r.value("offset") == doctest::Approx(offset).epsilon(1e-5));
}

TEST_CASE("noisy damped-Rabi correlation recovers Gamma and Omega within 3%") {
    const double gamma = 1.68e8;
    const double omega = 2.0 * kPi * 60e6;
    NoiseSource noise(55);
    std::vector<double> tau, values, sigmas;
    for (int i = -120; i <= 120; ++i) {
        const double t = i * 0.25e-9;
        const double v = resonant_g2(t, gamma, omega, 0.03);
        tau.push_back(t);
        values.push_back(v + noise.gaussian(0.0, 0.03));
        sigmas.push_back(0.03);
    }
    auto r = fit_resonant_g2(tau, values, sigmas);
    CHECK(r.converged);
    CHECK(std::abs(r.value("Gamma") - gamma) / gamma < 0.03);
    CHECK(std::abs(r.value("Omega") - omega) / omega < 0.03);
}

TEST_CASE("inverse-variance weighted mean of decay-rate estimates") {
    auto wm = weighted_mean({168.0, 170.0, 166.0}, {3.0, 4.0, 5.0});
    // Direct arithmetic: weights 1/9, 1/16, 1/25 give 168.22.
    CHECK(wm.mean == doctest::Approx(168.22).epsilon(1e-3));
    CHECK(wm.sigma == doctest::Approx(1.0 / std::sqrt(1.0 / 9 + 1.0 / 16 + 1.0 / 25)).epsilon(1e-12));
}

TEST_CASE("Rabi frequency scales as the square root of power") {
    const double k = 3.7e8;
    std::vector<double> powers, omegas;
    for (double p : {0.1e-9, 0.4e-9, 1.0e-9, 2.5e-9, 6.3e-9}) {
        powers.push_back(p);
        omegas.push_back(k * std::sqrt(p));
    }
    auto r = fit_rabi_power_scaling(powers, omegas, {});
    CHECK(r.value("slope") == doctest::Approx(k).epsilon(1e-10));
    // Quadrupling the power doubles the predicted Rabi frequency.
    CHECK(r.value("slope") * std::sqrt(4.0e-9) ==
          doctest::Approx(2.0 * r.value("slope") * std::sqrt(1.0e-9)).epsilon(1e-12));

    NoiseSource noise(21);
    std::vector<double> noisy, sigmas;
    for (size_t i = 0; i < omegas.size(); ++i) {
        noisy.push_back(omegas[i] * (1.0 + noise.gaussian(0.0, 0.05)));
        sigmas.push_back(0.05 * omegas[i]);
    }
    auto rn = fit_rabi_power_scaling(powers, noisy, sigmas);
    CHECK(std::abs(rn.value("slope") - k) / k < 0.05);
    CHECK(std::abs(rn.extras.at("intercept")) < 2.0 * rn.extras.at("intercept_sigma"));
}

TEST_CASE("phase vs displacement line implies a half-wavelength period") {
    const double lambda = 619e-9;
    const double slope = 2.0 * kPi / (lambda / 2.0);
    std::vector<double> z, phi;
    for (int i = 0; i < 8; ++i) {
        z.push_back(i * 40e-9);
        phi.push_back(0.3 + slope * z.back());
    }
    auto r = fit_phase_vs_displacement(z, phi);
    CHECK(r.value("slope") == doctest::Approx(slope).epsilon(1e-10));
    CHECK(r.extras.at("implied_period_m") == doctest::Approx(309.5e-9).epsilon(1e-3));

    std::vector<double> flat(8, 1.0);
    auto rf = fit_phase_vs_displacement(z, flat);
    CHECK(rf.has_flag("InfinitePeriod"));

    NoiseSource noise(9);
    std::vector<double> noisy;
    for (double p : phi) noisy.push_back(p + noise.gaussian(0.0, 0.1));
    auto rn = fit_phase_vs_displacement(z, noisy);
    CHECK(std::abs(rn.value("slope") - slope) / slope < 0.05);
}

namespace {

FieldTrace make_field_trace(double a1, double k1, double a2, double k2, double dipole_im,
                            double z0 = 0.0, double sign = 1.0) {
    FieldTrace t;
    for (int i = 0; i < 120; ++i) {
        const double z = z0 + i * 20e-9;
        const double im = sign * (a1 * std::sin(k1 * z + 0.4) + a2 * std::sin(k2 * z + 1.1));
        t.z_positions.push_back(z);
        t.field.emplace_back(0.1 * im, im);
    }
    t.dipole_field = {0.0, dipole_im};
    return t;
}

} // namespace

TEST_CASE("single-mode field trace gives the direct amplitude ratio") {
    const double k1 = 2.0 * kPi / 250e-9;
    auto t = make_field_trace(1.0, k1, 0.0, 0.0, 2.0);
    auto r = beta_from_field_trace(t);
    CHECK(r.beta_ideal == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("two-mode field trace recovers the dominant amplitude within 2%") {
    const double k1 = 2.0 * kPi / 250e-9;
    const double k2 = 2.0 * kPi / 180e-9;
    auto t = make_field_trace(0.9, k1, 0.1, k2, 1.0);
    auto r = beta_from_field_trace(t);
    REQUIRE(r.modes.size() == 2);
    CHECK(std::abs(r.modes[0].amplitude - 0.9) / 0.9 < 0.02);
    CHECK(r.beta_ideal == doctest::Approx(0.9).epsilon(0.02));
}

TEST_CASE("field-trace beta ignores global sign and z-offset") {
    const double k1 = 2.0 * kPi / 250e-9;
    const double k2 = 2.0 * kPi / 180e-9;
    auto base = beta_from_field_trace(make_field_trace(0.8, k1, 0.15, k2, 1.6));
    auto flipped = beta_from_field_trace(make_field_trace(0.8, k1, 0.15, k2, 1.6, 0.0, -1.0));
    auto shifted = beta_from_field_trace(make_field_trace(0.8, k1, 0.15, k2, 1.6, 333e-9));
    CHECK(flipped.beta_ideal == doctest::Approx(base.beta_ideal).epsilon(1e-6));
    CHECK(shifted.beta_ideal == doctest::Approx(base.beta_ideal).epsilon(1e-4));
}

TEST_CASE("effective beta scales the ideal value by the radiative efficiency") {
    CHECK(effective_beta(0.507, 0.37) == doctest::Approx(0.187).epsilon(2e-3));
    CHECK(effective_beta(0.403, 0.37) == doctest::Approx(0.149).epsilon(2e-3));
    CHECK(effective_beta(0.73, 1.0) == doctest::Approx(0.73));
}

TEST_CASE("fit uncertainties shrink as one over root N") {
    NoiseSource noise(4242);
    std::vector<double> sigma_by_n;
    for (int n : {50, 200, 800}) {
        SpectrumTrace t;
        const double span = 300.0;
        for (int i = 0; i < n; ++i) {
            const double x = -span / 2 + span * i / (n - 1);
            t.x.push_back(x);
            t.y.push_back(lorentzian_model(x, 0.0, 32.1, 100.0, 2.0) + noise.gaussian(0.0, 1.0));
            t.sigma.push_back(1.0);
        }
        sigma_by_n.push_back(fit_lorentzian(t).sigma("fwhm"));
    }
    const double ratio1 = sigma_by_n[0] / sigma_by_n[1];
    const double ratio2 = sigma_by_n[1] / sigma_by_n[2];
    CHECK(ratio1 == doctest::Approx(2.0).epsilon(0.5));
    CHECK(ratio2 == doctest::Approx(2.0).epsilon(0.5));
}

TEST_CASE("fits invert their own noise-free models over random parameter draws") {
    NoiseSource noise(606);
    for (int trial = 0; trial < 10; ++trial) {
        const double center = noise.gaussian(0.0, 20.0);
        const double fwhm = 20.0 + 30.0 * noise.uniform();
        const double height = 10.0 + 200.0 * noise.uniform();
        const double offset = 5.0 * noise.uniform();
        auto t = make_lorentzian_trace(center, fwhm, height, offset, 12.0 * fwhm, 101);
        auto r = fit_lorentzian(t);
        CHECK(std::abs(r.value("fwhm") - fwhm) / fwhm < 1e-6);
        CHECK(std::abs(r.value("height") - height) / height < 1e-6);
    }
    for (int trial = 0; trial < 10; ++trial) {
        const double beta = 0.05 + 0.6 * noise.uniform();
        const double pc = (0.1 + noise.uniform()) * 1e-9;
        std::vector<double> powers, contrasts;
        for (int i = 0; i < 12; ++i) {
            const double p = 0.01e-9 * std::pow(3000.0, i / 11.0);
            powers.push_back(p);
            contrasts.push_back(saturation_model(p, beta, pc));
        }
        auto r = fit_saturation(powers, contrasts, {});
        CHECK(std::abs(r.value("beta") - beta) / beta < 1e-6);
        CHECK(std::abs(r.value("P_c") - pc) / pc < 1e-5);
    }
}
