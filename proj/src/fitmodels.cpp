#include "wgqed/fitmodels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wgqed/errors.hpp"
#include "wgqed/waveguide.hpp"

namespace wgqed {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_trace(const SpectrumTrace& trace, size_t min_points, const char* what) {
    if (trace.x.size() != trace.y.size() ||
        (!trace.sigma.empty() && trace.sigma.size() != trace.y.size())) {
        throw InvalidParameters(std::string(what) + ": mismatched trace column lengths");
    }
    if (trace.x.size() < min_points) {
        throw InvalidParameters(std::string(what) + ": too few points");
    }
}

double weight_at(const std::vector<double>& sigmas, size_t i) {
    if (sigmas.empty()) return 1.0;
    if (!(sigmas[i] > 0.0)) {
        throw InvalidParameters("per-point sigmas must be positive");
    }
    return 1.0 / sigmas[i];
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Weighted straight-line fit y = slope*x + intercept, covariance scaled by
// the reduced chi-square when sigmas are absent.
FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& sigmas, bool through_origin) {
    const size_t n = x.size();
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double w = weight_at(sigmas, i);
        const double w2 = w * w;
        sw += w2;
        sx += w2 * x[i];
        sy += w2 * y[i];
        sxx += w2 * x[i] * x[i];
        sxy += w2 * x[i] * y[i];
    }

    FitResult out;
    out.converged = true;
    out.iterations = 1;
    Eigen::VectorXd res(static_cast<Eigen::Index>(n));

    if (through_origin) {
        if (!(sxx > 0.0)) {
            throw InvalidParameters("degenerate abscissa in linear fit");
        }
        const double slope = sxy / sxx;
        for (size_t i = 0; i < n; ++i) {
            res(static_cast<Eigen::Index>(i)) = weight_at(sigmas, i) * (slope * x[i] - y[i]);
        }
        const double dof = std::max<double>(1.0, static_cast<double>(n) - 1.0);
        out.reduced_chi_square = res.squaredNorm() / dof;
        double var = 1.0 / sxx;
        if (sigmas.empty()) var *= out.reduced_chi_square;
        out.names = {"slope"};
        out.values = Eigen::VectorXd::Constant(1, slope);
        out.covariance = Eigen::MatrixXd::Constant(1, 1, var);
        out.sigmas = Eigen::VectorXd::Constant(1, std::sqrt(var));
    } else {
        const double det = sw * sxx - sx * sx;
        if (!(det > 0.0)) {
            throw InvalidParameters("degenerate abscissa in linear fit");
        }
        const double slope = (sw * sxy - sx * sy) / det;
        const double intercept = (sxx * sy - sx * sxy) / det;
        for (size_t i = 0; i < n; ++i) {
            res(static_cast<Eigen::Index>(i)) =
                weight_at(sigmas, i) * (slope * x[i] + intercept - y[i]);
        }
        const double dof = std::max<double>(1.0, static_cast<double>(n) - 2.0);
        out.reduced_chi_square = res.squaredNorm() / dof;
        double scale = sigmas.empty() ? out.reduced_chi_square : 1.0;
        Eigen::MatrixXd cov(2, 2);
        cov << sw / det, -sx / det, -sx / det, sxx / det;
        cov *= scale;
        out.names = {"slope", "intercept"};
        out.values = Eigen::VectorXd(2);
        out.values << slope, intercept;
        out.covariance = cov;
        out.sigmas = cov.diagonal().cwiseSqrt();
    }
    out.residuals = res;
    return out;
}

} // namespace

double lorentzian_model(double x, double center, double fwhm, double height, double offset) {
    const double u = 2.0 * (x - center) / fwhm;
    return offset + height / (1.0 + u * u);
}

FitResult fit_lorentzian(const SpectrumTrace& trace) {
    check_trace(trace, 8, "fit_lorentzian");
    const size_t n = trace.x.size();

    const double ymax = *std::max_element(trace.y.begin(), trace.y.end());
    const double ymin = *std::min_element(trace.y.begin(), trace.y.end());
    const double yscale = std::max({std::abs(ymax), std::abs(ymin), 1e-300});
    if (ymax - ymin <= 1e-12 * std::max(1.0, yscale)) {
        throw NoPeakError("trace is flat: no peak to fit");
    }

    // Deterministic starting point: edge median for the offset, largest
    // deviation from it for the center (handles both peaks and dips),
    // half-deviation crossings for the width.
    const size_t edge = std::max<size_t>(1, n / 10);
    std::vector<double> edges;
    for (size_t i = 0; i < edge; ++i) {
        edges.push_back(trace.y[i]);
        edges.push_back(trace.y[n - 1 - i]);
    }
    const double offset0 = median_of(edges);
    size_t imax = 0;
    for (size_t i = 1; i < n; ++i) {
        if (std::abs(trace.y[i] - offset0) > std::abs(trace.y[imax] - offset0)) imax = i;
    }
    const double height0 = trace.y[imax] - offset0;
    const double half_dev = 0.5 * std::abs(height0);
    double xlo = trace.x.front();
    double xhi = trace.x.back();
    for (size_t i = imax; i-- > 0;) {
        if (std::abs(trace.y[i] - offset0) < half_dev) {
            xlo = trace.x[i];
            break;
        }
    }
    for (size_t i = imax + 1; i < n; ++i) {
        if (std::abs(trace.y[i] - offset0) < half_dev) {
            xhi = trace.x[i];
            break;
        }
    }
    double fwhm0 = std::abs(xhi - xlo);
    if (fwhm0 <= 0.0) fwhm0 = std::abs(trace.x.back() - trace.x.front()) / 4.0;

    auto residuals = [&trace, n](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (size_t i = 0; i < n; ++i) {
            r(static_cast<Eigen::Index>(i)) =
                weight_at(trace.sigma, i) *
                (lorentzian_model(trace.x[i], p(0), p(1), p(2), p(3)) - trace.y[i]);
        }
        return r;
    };
    auto jacobian = [&trace, n](const Eigen::VectorXd& p) {
        Eigen::MatrixXd j(static_cast<Eigen::Index>(n), 4);
        for (size_t i = 0; i < n; ++i) {
            const double w = weight_at(trace.sigma, i);
            const double u = 2.0 * (trace.x[i] - p(0)) / p(1);
            const double den = 1.0 + u * u;
            const double den2 = den * den;
            j(static_cast<Eigen::Index>(i), 0) = w * 4.0 * p(2) * u / (p(1) * den2);
            j(static_cast<Eigen::Index>(i), 1) = w * 2.0 * p(2) * u * u / (p(1) * den2);
            j(static_cast<Eigen::Index>(i), 2) = w / den;
            j(static_cast<Eigen::Index>(i), 3) = w;
        }
        return j;
    };

    Eigen::VectorXd p0(4);
    p0 << trace.x[imax], fwhm0, height0, offset0;
    FitOptions opts;
    opts.scale_covariance_by_chi2 = trace.sigma.empty();
    auto out = levenberg_marquardt(residuals, jacobian, p0, {"center", "fwhm", "height", "offset"},
                                   opts);
    // The model is even in fwhm; report the positive branch.
    if (out.values(1) < 0.0) out.values(1) = -out.values(1);
    return out;
}

double saturation_model(double power, double beta, double critical_power) {
    const double a = beta / (1.0 + power / critical_power);
    return 2.0 * a - a * a;
}

FitResult fit_saturation(const std::vector<double>& powers, const std::vector<double>& contrasts,
                         const std::vector<double>& sigmas) {
    if (powers.size() != contrasts.size() || (!sigmas.empty() && sigmas.size() != powers.size())) {
        throw InvalidParameters("fit_saturation: mismatched column lengths");
    }
    if (powers.size() < 5) {
        throw InvalidParameters("fit_saturation: need at least 5 power points");
    }
    const auto [pmin_it, pmax_it] = std::minmax_element(powers.begin(), powers.end());
    if (!(*pmin_it > 0.0) || *pmax_it / *pmin_it < 10.0) {
        throw InvalidParameters("fit_saturation: powers must be positive and span a decade");
    }
    if (*std::max_element(contrasts.begin(), contrasts.end()) <= 0.0) {
        throw NoSignalError("all contrasts are non-positive");
    }

    // Low-power contrast fixes beta; the half-contrast crossing fixes P_c.
    const size_t ilow = static_cast<size_t>(
        std::distance(powers.begin(), std::min_element(powers.begin(), powers.end())));
    const double c0 = std::clamp(contrasts[ilow], 1e-6, 0.999);
    const double beta0 = beta_from_contrast(c0);
    const double cmax = *std::max_element(contrasts.begin(), contrasts.end());
    double pc0 = median_of(powers);
    for (size_t i = 0; i < powers.size(); ++i) {
        if (contrasts[i] < 0.5 * cmax && powers[i] > powers[ilow]) {
            pc0 = powers[i];
            break;
        }
    }

    const size_t n = powers.size();
    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (size_t i = 0; i < n; ++i) {
            r(static_cast<Eigen::Index>(i)) =
                weight_at(sigmas, i) * (saturation_model(powers[i], p(0), p(1)) - contrasts[i]);
        }
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& p) {
        Eigen::MatrixXd j(static_cast<Eigen::Index>(n), 2);
        for (size_t i = 0; i < n; ++i) {
            const double w = weight_at(sigmas, i);
            const double x = powers[i] / p(1);
            const double a = p(0) / (1.0 + x);
            const double dfda = 2.0 - 2.0 * a;
            j(static_cast<Eigen::Index>(i), 0) = w * dfda / (1.0 + x);
            j(static_cast<Eigen::Index>(i), 1) = w * dfda * p(0) * x / (p(1) * (1.0 + x) * (1.0 + x));
        }
        return j;
    };

    Eigen::VectorXd p0(2);
    p0 << beta0, pc0;
    FitOptions opts;
    opts.scale_covariance_by_chi2 = sigmas.empty();
    auto out = levenberg_marquardt(residuals, jacobian, p0, {"beta", "P_c"}, opts);
    out.values(0) = std::clamp(out.values(0), 0.0, 1.0);
    return out;
}

FitResult fit_reflection(const SpectrumTrace& trace) {
    check_trace(trace, 15, "fit_reflection");
    const size_t n = trace.x.size();

    // Background scale from the trace edges.
    const size_t edge = std::max<size_t>(2, n / 10);
    std::vector<double> edges;
    for (size_t i = 0; i < edge; ++i) {
        edges.push_back(trace.y[i]);
        edges.push_back(trace.y[n - 1 - i]);
    }
    const double scale0 = std::max(median_of(edges), 1e-12);

    // Resonance position and width from the deviation |y/scale - 1|.
    std::vector<double> dev(n);
    for (size_t i = 0; i < n; ++i) dev[i] = std::abs(trace.y[i] / scale0 - 1.0);
    const size_t ipk = static_cast<size_t>(
        std::distance(dev.begin(), std::max_element(dev.begin(), dev.end())));
    const double center0 = trace.x[ipk];
    const double half = 0.5 * dev[ipk];
    double xlo = trace.x.front(), xhi = trace.x.back();
    for (size_t i = ipk; i-- > 0;) {
        if (dev[i] < half) {
            xlo = trace.x[i];
            break;
        }
    }
    for (size_t i = ipk + 1; i < n; ++i) {
        if (dev[i] < half) {
            xhi = trace.x[i];
            break;
        }
    }
    double gamma0 = std::abs(xhi - xlo);
    if (gamma0 <= 0.0) gamma0 = std::abs(trace.x.back() - trace.x.front()) / 6.0;
    const double xi0 = std::clamp(dev[ipk], 0.05, 3.0);

    auto model = [&](const Eigen::VectorXd& p, double x) {
        return p(4) * reflection({std::abs(p(0)), p(1), std::abs(p(2))}, x - p(3));
    };
    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (size_t i = 0; i < n; ++i) {
            r(static_cast<Eigen::Index>(i)) =
                weight_at(trace.sigma, i) * (model(p, trace.x[i]) - trace.y[i]);
        }
        return r;
    };

    FitOptions opts;
    opts.scale_covariance_by_chi2 = trace.sigma.empty();
    const std::vector<std::string> names = {"xi", "phi", "gamma_total", "center", "scale"};

    // The phase start is ambiguous from moments alone; race four deterministic
    // candidates and keep the best converged fit.
    FitResult best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (double phi0 : {0.0, 0.5 * std::numbers::pi, std::numbers::pi, 1.5 * std::numbers::pi}) {
        Eigen::VectorXd p0(5);
        p0 << xi0, phi0, gamma0, center0, scale0;
        auto r = levenberg_marquardt(residuals, numeric_jacobian(residuals), p0, names, opts);
        const double cost = r.residuals.squaredNorm();
        if (cost < best_cost) {
            best_cost = cost;
            best = r;
        }
    }

    // The model already evaluates |xi| and |gamma|; fold the signs away.
    best.values(0) = std::abs(best.values(0));
    best.values(2) = std::abs(best.values(2));

    // The spectrum only constrains A = xi^2 + 2 xi cos(phi) and
    // B = 2 xi sin(phi), which two (xi, phi) pairs reproduce exactly. Pick
    // the small-xi branch: the emitter amplitude is the weak partner of the
    // interference in this regime.
    {
        const double xi = best.values(0);
        const double phi = best.values(1);
        const double a = xi * xi + 2.0 * xi * std::cos(phi);
        const double b = 2.0 * xi * std::sin(phi);
        const double disc = (a + 2.0) * (a + 2.0) - a * a - b * b;
        if (disc > 0.0) {
            const double u_small = (a + 2.0) - std::sqrt(disc);
            if (u_small > 0.0 && xi * xi > u_small * (1.0 + 1e-9)) {
                const double xi_small = std::sqrt(u_small);
                const double rel_sigma = best.sigmas(0) / std::max(xi, 1e-300);
                best.values(0) = xi_small;
                best.values(1) = std::atan2(b, a - u_small);
                best.sigmas(0) = rel_sigma * xi_small;
            }
        }
    }

    double canon = std::fmod(best.values(1), kTwoPi);
    if (canon < 0.0) canon += kTwoPi;
    best.extras["phi_canonical"] = canon;

    // Significance of the resonance feature: compare against a flat
    // (scale-only) fit with an F-like statistic.
    double flat_scale = 0.0, wsum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double w = weight_at(trace.sigma, i);
        flat_scale += w * w * trace.y[i];
        wsum += w * w;
    }
    flat_scale /= wsum;
    double flat_cost = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = weight_at(trace.sigma, i) * (flat_scale - trace.y[i]);
        flat_cost += r * r;
    }
    const double dof = std::max<double>(1.0, static_cast<double>(n) - 5.0);
    const double f_stat = ((flat_cost - best_cost) / 4.0) / std::max(best_cost / dof, 1e-300);
    if (best.values(0) < 2.0 * best.sigmas(0) || f_stat < 5.0) {
        best.flags.push_back("FlatReflection");
    }
    return best;
}

FitResult fit_resonant_g2(const std::vector<double>& tau, const std::vector<double>& values,
                          const std::vector<double>& sigmas) {
    if (tau.size() != values.size() || (!sigmas.empty() && sigmas.size() != tau.size())) {
        throw InvalidParameters("fit_resonant_g2: mismatched column lengths");
    }
    if (tau.size() < 8) {
        throw InvalidParameters("fit_resonant_g2: too few delay points");
    }
    const size_t n = tau.size();

    // Sort |tau| to locate the zero-delay value, the plateau, and the first
    // oscillation maximum for deterministic starts.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return std::abs(tau[a]) < std::abs(tau[b]); });
    const double offset0 = std::max(values[order.front()], 0.0);
    double plateau = 0.0;
    const size_t tail = std::max<size_t>(2, n / 5);
    for (size_t i = n - tail; i < n; ++i) plateau += values[order[i]];
    plateau /= static_cast<double>(tail);

    double tau_peak = -1.0;
    for (size_t k = 1; k + 1 < n; ++k) {
        const size_t i = order[k];
        if (values[i] > values[order[k - 1]] && values[i] >= values[order[k + 1]] &&
            values[i] > plateau) {
            tau_peak = std::abs(tau[i]);
            break;
        }
    }
    double gamma0, omega0;
    if (tau_peak > 0.0) {
        omega0 = std::numbers::pi / tau_peak; // first Rabi maximum near Omega*tau = pi
        gamma0 = omega0 / 2.0;
    } else {
        // Overdamped: rise time to (1 - 1/e) of the plateau sets Gamma.
        double tau_rise = std::abs(tau[order[n / 2]]);
        for (size_t k = 0; k < n; ++k) {
            const size_t i = order[k];
            if (values[i] > offset0 + (plateau - offset0) * 0.632) {
                tau_rise = std::max(std::abs(tau[i]), 1e-300);
                break;
            }
        }
        gamma0 = 4.0 / (3.0 * tau_rise);
        omega0 = 0.1 * gamma0;
    }

    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (size_t i = 0; i < n; ++i) {
            r(static_cast<Eigen::Index>(i)) =
                weight_at(sigmas, i) *
                (resonant_g2(tau[i], std::abs(p(0)), std::abs(p(1)), p(2)) - values[i]);
        }
        return r;
    };

    Eigen::VectorXd p0(3);
    p0 << gamma0, omega0, offset0;
    FitOptions opts;
    opts.scale_covariance_by_chi2 = sigmas.empty();
    auto out = levenberg_marquardt(residuals, numeric_jacobian(residuals), p0,
                                   {"Gamma", "Omega", "offset"}, opts);
    // The model is even in Omega; report the positive branch.
    out.values(0) = std::abs(out.values(0));
    out.values(1) = std::abs(out.values(1));
    return out;
}

FitResult fit_rabi_power_scaling(const std::vector<double>& powers,
                                 const std::vector<double>& omegas,
                                 const std::vector<double>& sigmas) {
    if (powers.size() != omegas.size() || (!sigmas.empty() && sigmas.size() != powers.size())) {
        throw InvalidParameters("fit_rabi_power_scaling: mismatched column lengths");
    }
    if (powers.size() < 3) {
        throw InvalidParameters("fit_rabi_power_scaling: need at least 3 points");
    }
    std::vector<double> roots(powers.size());
    for (size_t i = 0; i < powers.size(); ++i) {
        if (!(powers[i] >= 0.0)) {
            throw InvalidParameters("powers must be non-negative");
        }
        roots[i] = std::sqrt(powers[i]);
    }
    auto out = linear_fit(roots, omegas, sigmas, /*through_origin=*/true);
    // Free-intercept diagnostic: a significantly non-zero intercept signals a
    // breakdown of the sqrt-power law.
    auto diag = linear_fit(roots, omegas, sigmas, /*through_origin=*/false);
    out.extras["intercept"] = diag.value("intercept");
    out.extras["intercept_sigma"] = diag.sigma("intercept");
    return out;
}

FitResult fit_phase_vs_displacement(const std::vector<double>& displacements,
                                    const std::vector<double>& phases) {
    if (displacements.size() != phases.size()) {
        throw InvalidParameters("fit_phase_vs_displacement: mismatched column lengths");
    }
    if (displacements.size() < 4) {
        throw InvalidParameters("fit_phase_vs_displacement: need at least 4 points");
    }
    auto out = linear_fit(displacements, phases, {}, /*through_origin=*/false);
    const double slope = out.value("slope");
    if (slope == 0.0) {
        out.extras["implied_period_m"] = std::numeric_limits<double>::infinity();
        out.flags.push_back("InfinitePeriod");
    } else {
        out.extras["implied_period_m"] = kTwoPi / std::abs(slope);
    }
    return out;
}

namespace {

// Linear least squares of y ~ a sin(kz) + b cos(kz) at fixed wavenumbers;
// returns the residual norm and the coefficients.
double sinusoid_lsq(const std::vector<double>& z, const Eigen::VectorXd& y,
                    const std::vector<double>& ks, Eigen::VectorXd& coeffs) {
    const Eigen::Index n = y.size();
    Eigen::MatrixXd design(n, 2 * static_cast<Eigen::Index>(ks.size()));
    for (size_t m = 0; m < ks.size(); ++m) {
        for (Eigen::Index i = 0; i < n; ++i) {
            design(i, static_cast<Eigen::Index>(2 * m)) = std::sin(ks[m] * z[static_cast<size_t>(i)]);
            design(i, static_cast<Eigen::Index>(2 * m + 1)) =
                std::cos(ks[m] * z[static_cast<size_t>(i)]);
        }
    }
    coeffs = design.colPivHouseholderQr().solve(y);
    return (design * coeffs - y).norm();
}

} // namespace

FieldBetaResult beta_from_field_trace(const FieldTrace& trace) {
    const size_t n = trace.z_positions.size();
    if (n < 20 || trace.field.size() != n) {
        throw InvalidParameters("field trace needs at least 20 matched samples");
    }
    if (std::abs(trace.dipole_field.imag()) <= 0.0) {
        throw InvalidParameters("dipole field has no imaginary part to normalize against");
    }

    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = trace.field[i].imag();
    const double signal_rms = y.norm() / std::sqrt(static_cast<double>(n));
    if (!(signal_rms > 0.0)) {
        throw ModeFitError("field trace is identically zero");
    }

    const auto [zmin, zmax] =
        std::minmax_element(trace.z_positions.begin(), trace.z_positions.end());
    const double span = *zmax - *zmin;
    if (!(span > 0.0)) {
        throw InvalidParameters("field trace spans zero length");
    }
    double dz_min = span;
    std::vector<double> zs = trace.z_positions;
    std::sort(zs.begin(), zs.end());
    for (size_t i = 1; i < n; ++i) dz_min = std::min(dz_min, zs[i] - zs[i - 1]);

    // Coarse wavenumber scan between two periods over the span and Nyquist,
    // then a joint nonlinear refinement.
    const double k_lo = 2.0 * kTwoPi / span;
    const double k_hi = std::numbers::pi / std::max(dz_min, 1e-12);
    if (!(k_hi > k_lo)) {
        throw ModeFitError("sampling too coarse for the requested wavenumber range");
    }
    auto scan_best_k = [&](const Eigen::VectorXd& target) {
        double best_k = k_lo;
        double best_res = std::numeric_limits<double>::infinity();
        const int grid = 2000;
        for (int s = 0; s <= grid; ++s) {
            const double k = k_lo + (k_hi - k_lo) * s / grid;
            Eigen::VectorXd c;
            const double res = sinusoid_lsq(trace.z_positions, target, {k}, c);
            if (res < best_res) {
                best_res = res;
                best_k = k;
            }
        }
        return best_k;
    };

    std::vector<double> ks = {scan_best_k(y)};
    Eigen::VectorXd coeffs;
    double res = sinusoid_lsq(trace.z_positions, y, ks, coeffs);

    // Add a second mode when one sinusoid leaves structure behind.
    if (res > 0.02 * y.norm()) {
        Eigen::MatrixXd design(y.size(), 2);
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            design(i, 0) = std::sin(ks[0] * trace.z_positions[static_cast<size_t>(i)]);
            design(i, 1) = std::cos(ks[0] * trace.z_positions[static_cast<size_t>(i)]);
        }
        Eigen::VectorXd leftover = y - design * coeffs.head(2);
        const double k2 = scan_best_k(leftover);
        if (std::abs(k2 - ks[0]) > 0.02 * ks[0]) {
            ks.push_back(k2);
            res = sinusoid_lsq(trace.z_positions, y, ks, coeffs);
        }
    }

    // Refine wavenumbers together with the linear coefficients.
    auto residuals = [&](const Eigen::VectorXd& p) {
        std::vector<double> kv(ks.size());
        for (size_t m = 0; m < ks.size(); ++m) kv[m] = p(static_cast<Eigen::Index>(m));
        Eigen::VectorXd c;
        sinusoid_lsq(trace.z_positions, y, kv, c);
        Eigen::MatrixXd design(y.size(), 2 * static_cast<Eigen::Index>(kv.size()));
        for (size_t m = 0; m < kv.size(); ++m) {
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                design(i, static_cast<Eigen::Index>(2 * m)) =
                    std::sin(kv[m] * trace.z_positions[static_cast<size_t>(i)]);
                design(i, static_cast<Eigen::Index>(2 * m + 1)) =
                    std::cos(kv[m] * trace.z_positions[static_cast<size_t>(i)]);
            }
        }
        return Eigen::VectorXd(design * c - y);
    };
    Eigen::VectorXd kp(static_cast<Eigen::Index>(ks.size()));
    for (size_t m = 0; m < ks.size(); ++m) kp(static_cast<Eigen::Index>(m)) = ks[m];
    std::vector<std::string> knames;
    for (size_t m = 0; m < ks.size(); ++m) knames.push_back("k" + std::to_string(m));
    auto refined = levenberg_marquardt(residuals, numeric_jacobian(residuals), kp, knames, {});
    for (size_t m = 0; m < ks.size(); ++m) ks[m] = std::abs(refined.values(static_cast<Eigen::Index>(m)));
    res = sinusoid_lsq(trace.z_positions, y, ks, coeffs);

    if (res > 0.10 * y.norm()) {
        throw ModeFitError("sinusoidal mode decomposition leaves >10% residual");
    }

    FieldBetaResult out;
    for (size_t m = 0; m < ks.size(); ++m) {
        const double a = coeffs(static_cast<Eigen::Index>(2 * m));
        const double b = coeffs(static_cast<Eigen::Index>(2 * m + 1));
        out.modes.push_back({std::hypot(a, b), ks[m], std::atan2(b, a)});
    }
    std::sort(out.modes.begin(), out.modes.end(), [](const ModeAmplitude& a, const ModeAmplitude& b) {
        if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
        return a.wavenumber < b.wavenumber;
    });

    if (span * out.modes.front().wavenumber < 2.0 * kTwoPi) {
        throw ModeFitError("trace spans fewer than two wavelengths of the dominant mode");
    }
    out.beta_ideal = out.modes.front().amplitude / std::abs(trace.dipole_field.imag());
    return out;
}

std::vector<double> unwrap_phases(const std::vector<double>& phases) {
    std::vector<double> out = phases;
    for (size_t i = 1; i < out.size(); ++i) {
        double delta = out[i] - out[i - 1];
        while (delta > std::numbers::pi) {
            out[i] -= kTwoPi;
            delta = out[i] - out[i - 1];
        }
        while (delta < -std::numbers::pi) {
            out[i] += kTwoPi;
            delta = out[i] - out[i - 1];
        }
    }
    return out;
}

double effective_beta(double beta_ideal, double radiative_efficiency) {
    if (!(beta_ideal >= 0.0 && beta_ideal <= 1.0) ||
        !(radiative_efficiency >= 0.0 && radiative_efficiency <= 1.0)) {
        throw InvalidParameters("effective_beta inputs must lie in [0, 1]");
    }
    return beta_ideal * radiative_efficiency;
}

} // namespace wgqed
