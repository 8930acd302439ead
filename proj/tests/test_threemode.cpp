#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include <unsupported/Eigen/MatrixFunctions>

#include "wgqed/errors.hpp"
#include "wgqed/fitmodels.hpp"
#include "wgqed/threemode.hpp"
#include "wgqed/waveguide.hpp"

using namespace wgqed;

namespace {

DensityState solve(const LindbladSystem& system) {
    return steady_state(liouvillian(system.hamiltonian, system.jumps));
}

double flux(const LindbladSystem& system, const QOperator& op, const DensityState& rho) {
    (void)system;
    return expectation(op.adjoint() * op, rho).real();
}

} // namespace

TEST_CASE("config validation rejects bad parameters and warns on soft ones") {
    ThreeModeConfig bad;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidParameters);

    ThreeModeConfig cut = ThreeModeConfig{};
    cut.fock_cutoff = 2;
    CHECK_THROWS_AS(cut.validate(), InvalidParameters);

    ThreeModeConfig soft = ThreeModeConfig{};
    soft.v_in = 2.0; // below the lossy-cavity ordering
    CHECK_FALSE(soft.validate().empty());

    CHECK(ThreeModeConfig::for_beta(0.143).validate().empty());
}

TEST_CASE("for_beta reproduces the matched coupling and a dark output mode") {
    const double beta = 0.143;
    auto config = ThreeModeConfig::for_beta(beta);

    const double c = cooperativity(beta);
    const double kappa_eff = 2.0 * config.kappa_in + config.kappa_out;
    CHECK(config.g == doctest::Approx(0.5 * std::sqrt(c * kappa_eff * config.gamma)).epsilon(1e-12));

    ThreeModeConfig empty = config;
    empty.g = 0.0;
    const auto amps = classical_amplitudes(empty);
    CHECK(std::abs(amps(3)) <= 1e-10 * std::abs(amps(2)));

    // The drive fixes the empty-cavity output flux at 1e-3 n_c per lifetime.
    const double target = 1e-3 * critical_photon_number(beta) * config.gamma;
    CHECK(config.kappa_out * std::norm(amps(1)) == doctest::Approx(target).epsilon(1e-10));
}

TEST_CASE("cross-coupling calibration is drive- and detuning-independent") {
    ThreeModeConfig config;
    config.drive_amplitude = 1.0;
    const double m1 = calibrate_cross_coupling(config).cross_multiplier;

    config.drive_amplitude = 7.0;
    const double m2 = calibrate_cross_coupling(config).cross_multiplier;
    CHECK(m1 == doctest::Approx(m2).epsilon(1e-6));

    config.omega = config.omega_e + 10.0; // detuned probe
    const double m3 = calibrate_cross_coupling(config).cross_multiplier;
    CHECK(m1 == doctest::Approx(m3).epsilon(1e-4));

    ThreeModeConfig undriven;
    CHECK_THROWS_AS(calibrate_cross_coupling(undriven), InvalidParameters);
}

TEST_CASE("hamiltonian terms assemble hermitian and h0 is diagonal") {
    auto config = ThreeModeConfig::for_beta(0.3);
    config.omega = config.omega_e + 1.7;
    auto system = build_system(config);

    CHECK(system.hamiltonian.is_hermitian());
    CHECK(system.terms.h_jc.is_hermitian());
    CHECK(system.terms.h_three_mode.is_hermitian());

    Matrix sum = (system.terms.h0 + system.terms.h_drive + system.terms.h_jc +
                  system.terms.h_three_mode).matrix();
    CHECK((sum - system.hamiltonian.matrix()).cwiseAbs().maxCoeff() < 1e-12);

    Matrix h0 = system.terms.h0.matrix();
    Matrix off = h0 - h0.diagonal().asDiagonal().toDenseMatrix();
    CHECK(off.cwiseAbs().maxCoeff() < 1e-14);
    // |e,0,0,0> sits at detuning omega_e - omega.
    const int dim3 = config.fock_cutoff * config.fock_cutoff * config.fock_cutoff;
    CHECK(h0(dim3, dim3).real() == doctest::Approx(-1.7).epsilon(1e-12));
}

TEST_CASE("undriven isolated emitter-cavity pair shows vacuum Rabi at 2g") {
    ThreeModeConfig config;
    config.g = 20.0;
    config.v_in = config.v_out = 0.0;
    auto system = build_system(config);

    // Unitary evolution of |e, 0, 0, 0>; full population transfer at
    // t = pi / (2 g) and return at pi / g.
    Vector psi0 = Vector::Zero(system.space->dim());
    const int dim3 = config.fock_cutoff * config.fock_cutoff * config.fock_cutoff;
    psi0(dim3) = 1.0;
    const Complex i(0.0, 1.0);
    auto pe_at = [&](double t) {
        Matrix u = (-i * t * system.hamiltonian.matrix()).exp();
        Vector psi = u * psi0;
        return (psi.adjoint() * system.psb_op.matrix() * psi)(0).real();
    };
    const double pi = 3.14159265358979323846;
    CHECK(pe_at(pi / (2.0 * config.g)) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(pe_at(pi / config.g) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("classical amplitudes match the quantum steady state at g = 0") {
    auto config = ThreeModeConfig::for_beta(0.143);
    config.g = 0.0;
    auto system = build_system(config);
    auto rho = solve(system);
    const auto amps = classical_amplitudes(config);

    auto [c, cd] = ladder_operators(system.space, 1);
    auto [ain, aind] = ladder_operators(system.space, 2);
    auto [aout, aoutd] = ladder_operators(system.space, 3);
    CHECK(std::abs(expectation(c, rho) - amps(1)) < 1e-8 * std::abs(amps(1)));
    CHECK(std::abs(expectation(ain, rho) - amps(2)) < 1e-8 * std::abs(amps(2)));
    // The dark output only needs to beat the steady-state solver residual.
    CHECK(std::abs(expectation(aout, rho)) < 1e-8 * std::abs(amps(2)));
}

TEST_CASE("output flux stays quadratic in the drive in the weak regime") {
    // At the default 1e-3 n_c drive the emitter saturation already bends the
    // response by ~1%, so probe linearity two decades lower.
    auto config = ThreeModeConfig::for_beta(0.143, 1e-5);
    auto base = build_system(config);
    const double f1 = flux(base, base.transmission_op, solve(base));

    config.drive_amplitude *= 2.0;
    auto doubled = build_system(config);
    const double f2 = flux(doubled, doubled.transmission_op, solve(doubled));
    CHECK(f2 / f1 == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("g = 0 transmission spectrum is flat at one") {
    auto config = ThreeModeConfig::for_beta(0.2);
    config.g = 0.0;
    auto trace = spectrum_sweep(config, {-3.0, -1.0, 0.0, 2.0}, SpectrumChannel::Transmission);
    for (double v : trace.y) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("resonant transmission dip matches the analytic depth at beta = 0.143") {
    auto config = ThreeModeConfig::for_beta(0.143);
    auto trace = spectrum_sweep(config, {0.0}, SpectrumChannel::Transmission);
    // 1 - beta (2 - beta) at negligible saturation.
    CHECK(trace.y.front() == doctest::Approx(0.734449).epsilon(0.01));
}

TEST_CASE("PSB spectrum is a unit-peak Lorentzian of width gamma") {
    auto config = ThreeModeConfig::for_beta(0.143);
    std::vector<double> grid;
    for (int k = -10; k <= 10; ++k) grid.push_back(0.5 * k);
    auto trace = spectrum_sweep(config, grid, SpectrumChannel::Psb);
    CHECK(*std::max_element(trace.y.begin(), trace.y.end()) == doctest::Approx(1.0));

    // The cavity Purcell-enhances the emitter: total linewidth gamma (1 + C).
    auto fit = fit_lorentzian(trace);
    const double gamma_tot = config.gamma * (1.0 + cooperativity(0.143));
    CHECK(fit.value("fwhm") == doctest::Approx(gamma_tot).epsilon(0.02));
    CHECK(std::abs(fit.value("center")) < 0.02);
}

TEST_CASE("displaced frame shifts the output expectation by alpha") {
    auto config = ThreeModeConfig::for_beta(0.3);
    auto system = build_system(config);
    auto rho = solve(system);
    auto [aout, aoutd] = ladder_operators(system.space, 3);
    const Complex base = expectation(aout, rho);

    const Complex alpha(0.4, -0.25);
    auto displaced = displaced_frame(system, alpha);
    auto rho_d = solve(displaced);
    // Exact in the truncated space: the displaced steady state is the
    // unitary conjugation of the original one.
    auto d = displacement_operator(system.space, 3, alpha);
    auto shifted = d.adjoint() * aout * d;
    CHECK(std::abs(expectation(aout, rho_d) - expectation(shifted, rho)) < 1e-9);
    // a_out + alpha only up to the Fock-truncation error of D(alpha).
    CHECK(std::abs(expectation(aout, rho_d) - (base + alpha)) < 0.05 * std::abs(alpha));

    // The installed reflection channel is bare a_out on the displaced state,
    // which carries the interference already.
    CHECK(std::abs(expectation(displaced.reflection_op, rho_d) - expectation(aout, rho_d)) <
          1e-12);

    auto standard = displaced_frame(system, alpha, ReflectionConvention::StandardConjugation);
    CHECK((standard.reflection_op.matrix() -
           (aout.matrix() - alpha * Matrix::Identity(system.space->dim(), system.space->dim())))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("displacing by alpha then -alpha restores the system") {
    auto config = ThreeModeConfig::for_beta(0.2);
    auto system = build_system(config);
    const Complex alpha(0.3, 0.2);
    auto round_trip = displaced_frame(displaced_frame(system, alpha), -alpha);
    CHECK((round_trip.hamiltonian.matrix() - system.hamiltonian.matrix()).cwiseAbs().maxCoeff() <
          1e-8);
    for (size_t k = 0; k < system.jumps.size(); ++k) {
        CHECK((round_trip.jumps[k].matrix() - system.jumps[k].matrix()).cwiseAbs().maxCoeff() <
              1e-8);
    }
    CHECK(displaced_frame(system, Complex(0.0, 0.0)).hamiltonian.matrix() ==
          system.hamiltonian.matrix());
}

TEST_CASE("displacement_for_xi places the offset at the requested contrast") {
    auto config = ThreeModeConfig::for_beta(0.3);
    const double xi = 0.47, phi = 1.2;
    const Complex alpha = displacement_for_xi(config, xi, phi);

    auto system = build_system(config);
    auto [aout, aoutd] = ladder_operators(system.space, 3);
    const Complex ratio = expectation(aout, solve(system)) / alpha;
    CHECK(std::abs(ratio) == doctest::Approx(xi).epsilon(1e-10));
    CHECK(std::arg(ratio) == doctest::Approx(phi).epsilon(1e-10));
}

TEST_CASE("restricted three-excitation system reproduces the full g2(0)") {
    auto config = ThreeModeConfig::for_beta(0.143);
    auto full = build_system(config);
    // Two excitations are not enough: the two-photon amplitude keeps ~1%
    // corrections from the third sector. Three converge to solver precision.
    auto restricted = restrict_excitations(full, 3);
    CHECK(restricted.space->dim() < full.space->dim());

    auto g2_full = g2_correlation(full, full.transmission_op, full.transmission_op, {0.0}, "TT");
    auto g2_restricted = g2_correlation(restricted, restricted.transmission_op,
                                        restricted.transmission_op, {0.0}, "TT");
    CHECK(g2_full.values.front() == doctest::Approx(g2_restricted.values.front()).epsilon(1e-5));
    CHECK(g2_full.values.front() < 1.0); // transmitted light antibunches
}

TEST_CASE("transmission autocorrelation is symmetric and settles at one") {
    auto config = ThreeModeConfig::for_beta(0.143);
    auto system = restrict_excitations(build_system(config), 2);
    auto trace = g2_correlation(system, system.transmission_op, system.transmission_op,
                                {-2.0, -1.0, 0.0, 1.0, 2.0, 30.0}, "TT");
    CHECK(trace.channel_pair == "TT");
    auto at = [&](double tau) {
        for (size_t k = 0; k < trace.tau.size(); ++k) {
            if (trace.tau[k] == tau) return trace.values[k];
        }
        FAIL("tau not found");
        return 0.0;
    };
    CHECK(at(-1.0) == doctest::Approx(at(1.0)).epsilon(1e-6));
    CHECK(at(-2.0) == doctest::Approx(at(2.0)).epsilon(1e-6));
    CHECK(at(30.0) == doctest::Approx(1.0).epsilon(1e-4));
    for (double v : trace.values) CHECK(v >= -1e-8);
}

TEST_CASE("channel-level g2 passes the truncation guard and flags dark channels") {
    auto config = ThreeModeConfig::for_beta(0.143);
    auto trace = g2(config, SpectrumChannel::Transmission, SpectrumChannel::Transmission, {0.0});
    CHECK(trace.values.front() < 1.0);
    CHECK(trace.normalization > 0.0);

    // An undriven system carries no flux in any output channel.
    ThreeModeConfig dark = config;
    dark.drive_amplitude = 0.0;
    auto dark_system = build_system(dark);
    CHECK_THROWS_AS(g2_correlation(dark_system, dark_system.transmission_op,
                                   dark_system.transmission_op, {0.0}, "TT"),
                    DarkChannelError);
}

TEST_CASE("projector emitter jump removes the antibunching") {
    auto config = ThreeModeConfig::for_beta(0.143);
    config.emitter_jump = EmitterJumpKind::Projector;
    auto system = build_system(config);
    auto trace = g2_correlation(system, system.transmission_op, system.transmission_op, {0.0});
    // Pure dephasing cannot empty the emitter between detections, so the
    // zero-delay dip is gone.
    auto decay = build_system(ThreeModeConfig::for_beta(0.143));
    auto ref = g2_correlation(decay, decay.transmission_op, decay.transmission_op, {0.0});
    CHECK(trace.values.front() > ref.values.front());
}

TEST_CASE("overdriven configuration trips the truncation guard") {
    ThreeModeConfig config = ThreeModeConfig::for_beta(0.143);
    config.drive_amplitude *= 5e3;
    CHECK_THROWS_AS(build_system(config), TruncationError);
}
