#include "wgqed/threemode.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wgqed/errors.hpp"
#include "wgqed/waveguide.hpp"

namespace wgqed {

namespace {

constexpr int kQubit = 0;
constexpr int kCavity = 1;
constexpr int kModeIn = 2;
constexpr int kModeOut = 3;

SpacePtr make_three_mode_space(int cutoff) {
    return make_space({HilbertSpace::two_level(), HilbertSpace::bosonic_mode(cutoff),
                       HilbertSpace::bosonic_mode(cutoff), HilbertSpace::bosonic_mode(cutoff)});
}

QOperator channel_operator(const LindbladSystem& system, SpectrumChannel ch) {
    switch (ch) {
        case SpectrumChannel::Transmission: return system.transmission_op;
        case SpectrumChannel::Reflection: return system.reflection_op;
        case SpectrumChannel::Psb: return system.psb_op;
    }
    throw InvalidParameters("unknown spectrum channel");
}

char channel_letter(SpectrumChannel ch) {
    switch (ch) {
        case SpectrumChannel::Transmission: return 'T';
        case SpectrumChannel::Reflection: return 'R';
        case SpectrumChannel::Psb: return 'P';
    }
    return '?';
}

double channel_flux(const DensityState& rho, const QOperator& op) {
    return expectation(op.adjoint() * op, rho).real();
}

ThreeModeConfig with_detuning(ThreeModeConfig config, double detuning) {
    // The probe enters as omega_e - omega and omega_c - omega; sweeping the
    // detuning from the emitter shifts the probe, not the hardware.
    config.omega = config.omega_e + detuning;
    return config;
}

} // namespace

std::vector<std::string> ThreeModeConfig::validate() const {
    if (!(gamma > 0.0)) {
        throw InvalidParameters("emitter decay rate must be positive");
    }
    if (kappa_in < 0.0 || kappa_out < 0.0 || v_in < 0.0 || v_out < 0.0 || g < 0.0 ||
        drive_amplitude < 0.0) {
        throw InvalidParameters("rates and couplings must be non-negative");
    }
    if (fock_cutoff < 3) {
        throw InvalidParameters("per-mode Fock cutoff must be at least 3");
    }
    std::vector<std::string> warnings;
    if (kappa_in + kappa_out < 10.0 * gamma || v_in < 10.0 * gamma || v_out < 10.0 * gamma) {
        warnings.push_back(
            "lossy-cavity ordering violated: mode couplings should exceed 10x the emitter decay");
    }
    return warnings;
}

Eigen::Vector4cd classical_amplitudes(const ThreeModeConfig& config) {
    const Complex i(0.0, 1.0);
    const double sk = std::sqrt(config.kappa_in);

    // First-moment drift of (sigma-, c, a_in, a_out); exact for g = 0 where
    // the network is linear.
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 1) = i * config.g;
    m(2, 1) = i * sk * config.v_in;
    m(1, 3) = -i * sk * config.v_out;
    m(2, 3) = -i * config.cross_multiplier * config.v_in * config.v_out;
    m = (m + m.adjoint()).eval();
    m(0, 0) = config.omega_e - config.omega;
    for (int k = 1; k < 4; ++k) m(k, k) = config.omega_c - config.omega;

    Eigen::Vector4d u1(std::sqrt(config.gamma), 0.0, 0.0, 0.0);
    Eigen::Vector4d u2(0.0, std::sqrt(config.kappa_in + config.kappa_out), 0.0, 0.0);
    Eigen::Vector4d u3(0.0, sk, config.v_in, config.v_out);

    Eigen::Matrix4cd drift = -i * m;
    drift -= 0.5 * (u1 * u1.transpose() + u2 * u2.transpose() + u3 * u3.transpose()).cast<Complex>();

    Eigen::Vector4cd b(0.0, 0.0, -config.drive_amplitude, 0.0);
    return drift.partialPivLu().solve(b);
}

ThreeModeConfig calibrate_cross_coupling(ThreeModeConfig config) {
    if (!(config.drive_amplitude > 0.0)) {
        throw InvalidParameters("calibration requires a nonzero drive amplitude");
    }
    ThreeModeConfig probe = config;
    probe.g = 0.0;
    // Off resonance the cavity propagator is complex and no real multiplier
    // darkens the output; the interferometer is balanced on mode resonance.
    probe.omega = probe.omega_c;

    auto out_amp = [&probe](double multiplier) {
        probe.cross_multiplier = multiplier;
        return classical_amplitudes(probe)(kModeOut);
    };

    // Re(alpha_out) is rational in the multiplier (it enters the drift
    // matrix) and decays to zero at large multipliers, so bracket the sign
    // change and bisect instead of chasing the asymptote with a secant.
    const double scan_lo = 0.05, scan_hi = 4.0;
    const int scan_points = 160;
    double m0 = 0.0, m1 = 0.0, f0 = 0.0, f1 = 0.0;
    bool bracketed = false;
    double prev_m = scan_lo;
    double prev_f = out_amp(prev_m).real();
    for (int k = 1; k <= scan_points; ++k) {
        const double m = scan_lo + (scan_hi - scan_lo) * k / scan_points;
        const double f = out_amp(m).real();
        if (std::isfinite(prev_f) && std::isfinite(f) && prev_f * f <= 0.0) {
            m0 = prev_m;
            f0 = prev_f;
            m1 = m;
            f1 = f;
            bracketed = true;
            break;
        }
        prev_m = m;
        prev_f = f;
    }
    if (!bracketed) {
        throw CalibrationError("no dark-output multiplier found in the scan range");
    }
    for (int iter = 0; iter < 200 && m1 - m0 > 0.0; ++iter) {
        const double mid = 0.5 * (m0 + m1);
        const double fm = out_amp(mid).real();
        if (!std::isfinite(fm)) {
            throw CalibrationError("cross-coupling root find diverged");
        }
        if (f0 * fm <= 0.0) {
            m1 = mid;
            f1 = fm;
        } else {
            m0 = mid;
            f0 = fm;
        }
    }
    m1 = 0.5 * (m0 + m1);

    probe.cross_multiplier = m1;
    const auto amps = classical_amplitudes(probe);
    if (std::abs(amps(kModeOut)) > 1e-10 * std::abs(amps(kModeIn))) {
        throw CalibrationError("calibrated output mode is not dark: residual " +
                               std::to_string(std::abs(amps(kModeOut))));
    }
    config.cross_multiplier = m1;
    return config;
}

ThreeModeConfig ThreeModeConfig::for_beta(double beta, double drive_fraction) {
    ThreeModeConfig config;
    const double c = cooperativity(beta);
    // Effective total cavity loss seen by the emitter: the cascaded input
    // channel appears in both the dedicated cavity jump and the collective
    // three-mode jump.
    const double kappa_eff = 2.0 * config.kappa_in + config.kappa_out;
    config.g = cavity_g_from_cooperativity(c, kappa_eff, config.gamma);

    // Calibrate at unit drive, then scale the drive so the empty-cavity
    // output flux is drive_fraction * n_c photons per emitter lifetime.
    config.drive_amplitude = 1.0;
    config = calibrate_cross_coupling(config);

    ThreeModeConfig empty = config;
    empty.g = 0.0;
    const double cavity_amp = std::abs(classical_amplitudes(empty)(kCavity));
    const double n_target = drive_fraction * critical_photon_number(beta);
    config.drive_amplitude =
        std::sqrt(n_target * config.gamma / config.kappa_out) / cavity_amp;
    return config;
}

LindbladSystem build_system(const ThreeModeConfig& config) {
    config.validate();
    auto space = make_three_mode_space(config.fock_cutoff);

    auto [c, cd] = ladder_operators(space, kCavity);
    auto [ain, aind] = ladder_operators(space, kModeIn);
    auto [aout, aoutd] = ladder_operators(space, kModeOut);
    auto sm = lowering_operator(space, kQubit);
    auto sp = raising_operator(space, kQubit);
    auto pe = excited_projector(space, kQubit);

    const Complex i(0.0, 1.0);
    const double sk = std::sqrt(config.kappa_in);

    HamiltonianTerms terms{
        // H0
        Complex(config.omega_e - config.omega) * pe +
            Complex(config.omega_c - config.omega) * (cd * c + aind * ain + aoutd * aout),
        // drive
        (i * config.drive_amplitude) * (aind - ain),
        // Jaynes-Cummings
        (i * config.g) * (c * sp - cd * sm),
        // cascaded three-mode couplings; the phases make the cross term able
        // to cancel the cavity leakage into the output mode exactly.
        QOperator(space, Matrix::Zero(space->dim(), space->dim())),
    };
    QOperator x = (i * sk * config.v_in) * (aind * c) - (i * sk * config.v_out) * (cd * aout) -
                  (i * config.cross_multiplier * config.v_in * config.v_out) * (aind * aout);
    terms.h_three_mode = x + x.adjoint();

    QOperator h = terms.h0 + terms.h_drive + terms.h_jc + terms.h_three_mode;

    QOperator emitter_jump = (config.emitter_jump == EmitterJumpKind::Decay)
        ? Complex(std::sqrt(config.gamma)) * sm
        : Complex(std::sqrt(config.gamma)) * pe;
    std::vector<QOperator> jumps = {
        emitter_jump,
        Complex(std::sqrt(config.kappa_in + config.kappa_out)) * c,
        Complex(sk) * c + Complex(config.v_in) * ain + Complex(config.v_out) * aout,
    };

    // Guard the truncation against the classical mode occupations.
    const auto amps = classical_amplitudes(config);
    double max_occupation = 0.0;
    for (int k = 1; k < 4; ++k) {
        max_occupation = std::max(max_occupation, std::norm(amps(k)));
    }
    if (max_occupation >= config.fock_cutoff - 1.0) {
        throw TruncationError("drive populates the modes beyond the Fock cutoff");
    }

    return {space,
            std::move(h),
            std::move(jumps),
            std::move(terms),
            Complex(std::sqrt(config.kappa_out)) * c,
            aout,
            pe,
            config};
}

SpectrumTrace spectrum_sweep(const ThreeModeConfig& config,
                             const std::vector<double>& detuning_grid, SpectrumChannel channel,
                             Complex alpha) {
    SpectrumTrace trace;
    auto flux_at = [&](const ThreeModeConfig& cfg, double detuning, bool displaced_channel) {
        auto system = build_system(with_detuning(cfg, detuning));
        auto rho = steady_state(liouvillian(system.hamiltonian, system.jumps));
        switch (channel) {
            case SpectrumChannel::Psb:
                return expectation(system.psb_op, rho).real();
            case SpectrumChannel::Transmission:
                return channel_flux(rho, system.transmission_op);
            case SpectrumChannel::Reflection: {
                QOperator r = system.reflection_op;
                if (displaced_channel) {
                    r += alpha * identity_operator(system.space);
                }
                return channel_flux(rho, r);
            }
        }
        throw InvalidParameters("unknown spectrum channel");
    };

    ThreeModeConfig empty = config;
    empty.g = 0.0;

    double reflection_baseline = 1.0;
    if (channel == SpectrumChannel::Reflection) {
        if (std::abs(alpha) == 0.0) {
            throw InvalidParameters(
                "reflection spectra need a coherent displacement to interfere against");
        }
        reflection_baseline = 0.5 * (flux_at(config, 50.0 * config.gamma, true) +
                                     flux_at(config, -50.0 * config.gamma, true));
    }

    for (double detuning : detuning_grid) {
        double value = 0.0;
        switch (channel) {
            case SpectrumChannel::Transmission:
                // Pointwise empty-cavity normalization removes the broad
                // cavity envelope so only the emitter response remains.
                value = flux_at(config, detuning, false) / flux_at(empty, detuning, false);
                break;
            case SpectrumChannel::Reflection:
                value = flux_at(config, detuning, true) / reflection_baseline;
                break;
            case SpectrumChannel::Psb:
                value = flux_at(config, detuning, false);
                break;
        }
        trace.x.push_back(detuning);
        trace.y.push_back(value);
    }

    if (channel == SpectrumChannel::Psb) {
        const double peak = *std::max_element(trace.y.begin(), trace.y.end());
        if (!(peak > 0.0)) {
            throw DarkChannelError("PSB channel carries no signal over the grid");
        }
        for (double& v : trace.y) v /= peak;
    }
    return trace;
}

LindbladSystem displaced_frame(const LindbladSystem& system, Complex alpha,
                               ReflectionConvention convention) {
    if (std::abs(alpha) == 0.0) {
        return system;
    }
    auto d = displacement_operator(system.space, kModeOut, alpha);
    auto dd = d.adjoint();
    auto conjugate = [&](const QOperator& op) { return d * op * dd; };

    LindbladSystem out = system;
    out.hamiltonian = conjugate(system.hamiltonian);
    for (auto& jump : out.jumps) jump = conjugate(jump);
    out.terms.h0 = conjugate(system.terms.h0);
    out.terms.h_drive = conjugate(system.terms.h_drive);
    out.terms.h_jc = conjugate(system.terms.h_jc);
    out.terms.h_three_mode = conjugate(system.terms.h_three_mode);

    auto [aout, aoutd] = ladder_operators(system.space, kModeOut);
    if (convention == ReflectionConvention::DisplacedShift) {
        // The displaced state already carries the offset: bare a_out on it
        // equals a_out + alpha on the original state, which is the physical
        // interference of the scattered field with the coherent background.
        out.reflection_op = aout;
    } else {
        // Literal conjugation D a_out D^dag; on the displaced state this is
        // equivalent to bare a_out on the original state and therefore loses
        // the interference. Kept selectable for auditability.
        out.reflection_op = aout - alpha * identity_operator(system.space);
    }
    return out;
}

Complex displacement_for_xi(const ThreeModeConfig& config, double xi, double phi) {
    if (!(xi > 0.0)) {
        throw InvalidParameters("xi must be positive to place the coherent offset");
    }
    auto system = build_system(config);
    auto rho = steady_state(liouvillian(system.hamiltonian, system.jumps));
    auto [aout, aoutd] = ladder_operators(system.space, kModeOut);
    const Complex scattered = expectation(aout, rho);
    if (!(std::abs(scattered) > 0.0)) {
        throw DarkChannelError("no scattered field in the output mode");
    }
    // phi is the phase of the scattered field relative to the offset, so the
    // offset carries the scattered field's own phase: <a_out>/alpha = xi e^{i phi}.
    return scattered / (xi * std::polar(1.0, phi));
}

CorrelationTrace g2_correlation(const LindbladSystem& system, const QOperator& o1,
                                const QOperator& o2, const std::vector<double>& tau_grid,
                                const std::string& label) {
    auto generator = liouvillian(system.hamiltonian, system.jumps);
    auto rho = steady_state(generator);

    auto evaluate_branch = [&](const QOperator& first, const QOperator& second,
                               const std::vector<double>& taus, std::map<double, double>& out) {
        if (taus.empty()) return;
        const Matrix seeded = first.matrix() * rho.matrix() * first.matrix().adjoint();
        const double n1 = seeded.trace().real();
        const Matrix detector = second.matrix().adjoint() * second.matrix();
        const double n2 = (detector * rho.matrix()).trace().real();
        if (!(n1 > 1e-250) || !(n2 > 1e-250)) {
            throw DarkChannelError("correlation channel has vanishing steady-state flux");
        }

        std::vector<double> sorted = taus;
        std::sort(sorted.begin(), sorted.end());
        std::map<double, Matrix> step_cache;
        Vector b = vectorize(seeded);
        double reached = 0.0;
        for (double t : sorted) {
            const double gap = t - reached;
            if (gap > 0.0) {
                auto it = step_cache.find(gap);
                if (it == step_cache.end()) {
                    it = step_cache.emplace(gap, propagator(generator, gap)).first;
                }
                b = it->second * b;
                reached = t;
            }
            const Matrix bt = unvectorize(b, system.space->dim());
            out[t] = (detector * bt).trace().real() / (n1 * n2);
        }
    };

    std::vector<double> forward, backward;
    for (double t : tau_grid) {
        (t >= 0.0 ? forward : backward).push_back(std::abs(t));
    }
    std::map<double, double> fwd_values, bwd_values;
    evaluate_branch(o1, o2, forward, fwd_values);
    // Negative delays swap the operator roles: g2_XY(-tau) = g2_YX(tau).
    evaluate_branch(o2, o1, backward, bwd_values);

    CorrelationTrace trace;
    trace.channel_pair = label;
    std::vector<double> taus = tau_grid;
    std::sort(taus.begin(), taus.end());
    for (double t : taus) {
        const double v = (t >= 0.0) ? fwd_values.at(t) : bwd_values.at(-t);
        if (v < -1e-8) {
            throw NumericalError("correlation value significantly negative");
        }
        trace.tau.push_back(t);
        trace.values.push_back(v);
    }
    {
        // Record the forward-branch denominator for diagnostics.
        const Matrix seeded = o1.matrix() * rho.matrix() * o1.matrix().adjoint();
        const Matrix detector = o2.matrix().adjoint() * o2.matrix();
        trace.normalization =
            seeded.trace().real() * (detector * rho.matrix()).trace().real();
    }
    return trace;
}

CorrelationTrace g2(const ThreeModeConfig& config, SpectrumChannel ch1, SpectrumChannel ch2,
                    const std::vector<double>& tau_grid, Complex alpha, bool truncation_guard) {
    auto build_channelled = [&](int cutoff) {
        ThreeModeConfig cfg = config;
        cfg.fock_cutoff = cutoff;
        LindbladSystem system = build_system(cfg);
        const bool wants_reflection =
            ch1 == SpectrumChannel::Reflection || ch2 == SpectrumChannel::Reflection;
        if (wants_reflection && std::abs(alpha) > 0.0) {
            system = displaced_frame(system, alpha);
        }
        return system;
    };

    auto system = build_channelled(config.fock_cutoff);
    const std::string label =
        std::string(1, channel_letter(ch1)) + std::string(1, channel_letter(ch2));
    auto trace = g2_correlation(system, channel_operator(system, ch1),
                                channel_operator(system, ch2), tau_grid, label);

    if (truncation_guard) {
        auto zero_value = [&](const LindbladSystem& sys) {
            auto t = g2_correlation(sys, channel_operator(sys, ch1), channel_operator(sys, ch2),
                                    {0.0}, label);
            return t.values.front();
        };
        const double coarse = zero_value(system);
        const double fine = zero_value(build_channelled(config.fock_cutoff + 1));
        if (std::abs(fine - coarse) >= 1e-3) {
            throw TruncationError("zero-delay correlation shifts by " +
                                  std::to_string(std::abs(fine - coarse)) +
                                  " when the Fock cutoff is raised");
        }
    }
    return trace;
}

LindbladSystem restrict_excitations(const LindbladSystem& system, int max_excitations) {
    const auto kept = excitation_subspace(*system.space, max_excitations);
    const int n = static_cast<int>(kept.size());
    if (n < 2) {
        throw InvalidParameters("excitation restriction leaves fewer than two states");
    }
    // The reduced space is no longer a tensor product; a single placeholder
    // subsystem carries its dimension.
    auto reduced_space = make_space({HilbertSpace::bosonic_mode(n)});
    auto project = [&](const QOperator& op) {
        Matrix m(n, n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                m(r, c) = op.matrix()(kept[static_cast<size_t>(r)], kept[static_cast<size_t>(c)]);
            }
        }
        return QOperator(reduced_space, std::move(m));
    };

    LindbladSystem out = system;
    out.space = reduced_space;
    out.hamiltonian = project(system.hamiltonian);
    out.jumps.clear();
    for (const auto& jump : system.jumps) out.jumps.push_back(project(jump));
    out.terms = {project(system.terms.h0), project(system.terms.h_drive),
                 project(system.terms.h_jc), project(system.terms.h_three_mode)};
    out.transmission_op = project(system.transmission_op);
    out.reflection_op = project(system.reflection_op);
    out.psb_op = project(system.psb_op);
    return out;
}

} // namespace wgqed
