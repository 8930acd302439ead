#ifndef WGQED_THREEMODE_HPP
#define WGQED_THREEMODE_HPP

#include <string>
#include <vector>

#include "wgqed/core.hpp"
#include "wgqed/fitmodels.hpp"

namespace wgqed {

// Emitter decay channel. Decay is the physical |g><e| quantum jump; the
// projector variant sqrt(gamma)|e><e| is a dephasing-type operator kept
// selectable for auditability — it does not produce antibunching.
enum class EmitterJumpKind { Decay, Projector };

// Reflection channel convention in the displaced frame. DisplacedShift
// measures bare a_out on the displaced state, equivalent to a_out + alpha on
// the original state (interference of the scattered field with the coherent
// offset); StandardConjugation measures D a_out D^dag = a_out - alpha, which
// on the displaced state reduces to bare a_out on the original state and
// loses the interference.
enum class ReflectionConvention { DisplacedShift, StandardConjugation };

enum class SpectrumChannel { Transmission, Reflection, Psb };

// Lossy-cavity stand-in for the waveguide-coupled emitter: a driven input
// mode cascaded through a fast cavity into an output mode, with the emitter
// Jaynes-Cummings-coupled to the cavity. All rates are angular, in units of
// the emitter decay rate unless stated otherwise.
struct ThreeModeConfig {
    double omega_e = 0.0;  // emitter frequency
    double omega_c = 0.0;  // shared frequency of the three optical modes
    double omega = 0.0;    // probe (rotating-frame) frequency
    double g = 0.0;        // emitter-cavity coupling
    double kappa_in = 200.0;
    double kappa_out = 200.0;
    double v_in = 100.0;
    double v_out = 100.0;
    double drive_amplitude = 0.0; // coherent drive on the input mode
    double gamma = 1.0;           // emitter decay rate
    int fock_cutoff = 3;
    // Multiplier on the a_in^dag a_out cross-coupling; calibrated so the
    // empty cavity leaks nothing into the output mode.
    double cross_multiplier = 1.0;
    EmitterJumpKind emitter_jump = EmitterJumpKind::Decay;

    // Throws on hard violations; returns soft warnings (e.g. the lossy-cavity
    // ordering kappa, v >> gamma not holding).
    std::vector<std::string> validate() const;

    // Defaults reproducing a waveguide coupling factor beta: g from the
    // matched cooperativity, drive set so the empty-cavity output flux is
    // drive_fraction * n_c photons per emitter lifetime, cross-coupling
    // calibrated.
    static ThreeModeConfig for_beta(double beta, double drive_fraction = 1e-3);
};

struct HamiltonianTerms {
    QOperator h0;          // detunings
    QOperator h_drive;     // i zeta (a_in^dag - a_in)
    QOperator h_jc;        // i g (c sigma+ - c^dag sigma-)
    QOperator h_three_mode; // cascaded mode couplings incl. the cross term
};

struct LindbladSystem {
    SpacePtr space; // TwoLevel (x) c (x) a_in (x) a_out
    QOperator hamiltonian;
    std::vector<QOperator> jumps; // emitter, cavity, three-mode collective
    HamiltonianTerms terms;
    QOperator transmission_op; // sqrt(kappa_out) c
    QOperator reflection_op;   // a_out (+ alpha after displacement)
    QOperator psb_op;          // |e><e|
    ThreeModeConfig config;
};

struct CorrelationTrace {
    std::vector<double> tau;
    std::vector<double> values;
    std::string channel_pair; // e.g. "TT", "PT", "RR"
    double normalization = 0.0; // product of the steady-state denominators
};

LindbladSystem build_system(const ThreeModeConfig& config);

// Tunes cross_multiplier so the calibrated empty cavity (g = 0) leaves the
// output mode dark; secant root find on the classical output amplitude,
// which is exact for the linear g = 0 network.
ThreeModeConfig calibrate_cross_coupling(ThreeModeConfig config);

// Classical (first-moment) steady amplitudes <sigma->, <c>, <a_in>, <a_out>
// of the linearized network; exact at g = 0.
Eigen::Vector4cd classical_amplitudes(const ThreeModeConfig& config);

// Steady-state channel spectrum over probe detunings from the emitter.
// Transmission is normalized pointwise against the g = 0 system (removing
// the cavity envelope), reflection against its far-detuned baseline, and the
// PSB signal against its own maximum.
SpectrumTrace spectrum_sweep(const ThreeModeConfig& config,
                             const std::vector<double>& detuning_grid, SpectrumChannel channel,
                             Complex alpha = Complex(0.0, 0.0));

// Conjugates the Hamiltonian and jumps by D(alpha) on the output mode and
// installs the reflection channel operator per the chosen convention.
LindbladSystem displaced_frame(const LindbladSystem& system, Complex alpha,
                               ReflectionConvention convention = ReflectionConvention::DisplacedShift);

// Coherent offset alpha such that the resonant emitter-scattered output
// amplitude satisfies <a_out> / alpha = xi e^{i phi}: the contrast is xi and
// phi is the scattered field's phase relative to the offset.
Complex displacement_for_xi(const ThreeModeConfig& config, double xi, double phi);

// Two-time correlation by the regression formula
//   g2(tau) = Tr{O2^dag O2 e^{tau L}(O1 rho O1^dag)} / (Tr{O1 rho O1^dag} Tr{O2^dag O2 rho});
// negative tau swaps the operator roles. No truncation guard.
CorrelationTrace g2_correlation(const LindbladSystem& system, const QOperator& o1,
                                const QOperator& o2, const std::vector<double>& tau_grid,
                                const std::string& label = "");

// Channel-level g2 with the truncation guard: the zero-delay value is
// recomputed at fock_cutoff + 1 and must agree within 1e-3.
CorrelationTrace g2(const ThreeModeConfig& config, SpectrumChannel ch1, SpectrumChannel ch2,
                    const std::vector<double>& tau_grid, Complex alpha = Complex(0.0, 0.0),
                    bool truncation_guard = true);

// Projection of the system onto total excitation number <= max_excitations
// (the emitter counts one). Valid in the weak-drive regime; dramatically
// cheaper for tau propagation.
LindbladSystem restrict_excitations(const LindbladSystem& system, int max_excitations);

} // namespace wgqed

#endif
