#include "wgqed/jones.hpp"

#include <cmath>
#include <numbers>

#include "wgqed/errors.hpp"

namespace wgqed {

JonesMatrix waveplate(WaveplateKind kind, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const std::complex<double> i(0.0, 1.0);
    Eigen::Matrix2cd m;
    if (kind == WaveplateKind::HalfWave) {
        m << c * c - s * s, 2.0 * c * s,
             2.0 * c * s, s * s - c * c;
        m *= std::polar(1.0, -std::numbers::pi / 2.0);
    } else {
        m << c * c + i * s * s, (1.0 - i) * s * c,
             (1.0 - i) * s * c, s * s + i * c * c;
        m *= std::polar(1.0, -std::numbers::pi / 4.0);
    }
    return {m, kind, angle};
}

double psb_counts_model(double phi1, double phi2) {
    const double arg = std::cos(4.0 * (phi1 - phi2)) + std::cos(4.0 * phi2) + 2.0;
    return 0.5 * std::sqrt(std::max(arg, 0.0));
}

double psb_counts_matrix(double phi1, double phi2) {
    // The standalone cos(4 phi2) term of the closed form pins phi2 to the
    // half-wave plate: |(M_half(a) M_quarter(b))_00| expands to
    // sqrt(cos(4(a-b)) + cos(4a) + 2)/2, with the lone cosine carrying the
    // half-wave angle.
    const Eigen::Vector2cd h(1.0, 0.0);
    const Eigen::Matrix2cd m =
        waveplate(WaveplateKind::HalfWave, phi2).matrix *
        waveplate(WaveplateKind::QuarterWave, phi1).matrix;
    return std::abs(h.dot(m * h));
}

Eigen::MatrixXd polarization_map(const std::vector<double>& grid1,
                                 const std::vector<double>& grid2, double scale) {
    for (double g : grid1) {
        if (!std::isfinite(g)) throw InvalidParameters("grid angles must be finite");
    }
    for (double g : grid2) {
        if (!std::isfinite(g)) throw InvalidParameters("grid angles must be finite");
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(grid1.size()),
                        static_cast<Eigen::Index>(grid2.size()));
    for (size_t r = 0; r < grid1.size(); ++r) {
        for (size_t c = 0; c < grid2.size(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                scale * psb_counts_model(grid1[r], grid2[c]);
        }
    }
    return out;
}

} // namespace wgqed
