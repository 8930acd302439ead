#ifndef WGQED_JONES_HPP
#define WGQED_JONES_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace wgqed {

enum class WaveplateKind { HalfWave, QuarterWave };

struct JonesMatrix {
    Eigen::Matrix2cd matrix;
    WaveplateKind retardance_kind;
    double rotation_angle; // radians
};

// Rotated waveplate matrices, including their global phase factors
// (e^{-i pi/2} for half-wave, e^{-i pi/4} for quarter-wave).
JonesMatrix waveplate(WaveplateKind kind, double angle);

// Normalized phonon-sideband counts after a quarter-wave plate at phi1
// followed by a half-wave plate at phi2, projected back onto the input basis:
// h = |<H| M_half(phi2) M_quarter(phi1) |H>|
//   = sqrt(cos(4(phi1 - phi2)) + cos(4 phi2) + 2) / 2.
double psb_counts_model(double phi1, double phi2);

// Same quantity evaluated through the explicit matrix product; agrees with
// the closed form to machine precision and exists for cross-checking.
double psb_counts_matrix(double phi1, double phi2);

// scale * h over the outer product of the two angle grids; rows follow
// grid1, columns grid2.
Eigen::MatrixXd polarization_map(const std::vector<double>& grid1,
                                 const std::vector<double>& grid2, double scale);

} // namespace wgqed

#endif
