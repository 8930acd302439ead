#include "wgqed/fit.hpp"

#include <algorithm>
#include <cmath>

#include "wgqed/errors.hpp"

namespace wgqed {

double FitResult::value(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return values(static_cast<Eigen::Index>(i));
    }
    throw InvalidParameters("unknown fit parameter: " + name);
}

double FitResult::sigma(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return sigmas(static_cast<Eigen::Index>(i));
    }
    throw InvalidParameters("unknown fit parameter: " + name);
}

bool FitResult::has_flag(const std::string& flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

JacobianFn numeric_jacobian(const ResidualFn& residuals, double rel_step) {
    return [residuals, rel_step](const Eigen::VectorXd& p) {
        const Eigen::VectorXd r0 = residuals(p);
        Eigen::MatrixXd j(r0.size(), p.size());
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            const double h = rel_step * std::max(1.0, std::abs(p(k)));
            Eigen::VectorXd pk = p;
            pk(k) += h;
            j.col(k) = (residuals(pk) - r0) / h;
        }
        return j;
    };
}

FitResult levenberg_marquardt(const ResidualFn& residuals, const JacobianFn& jacobian,
                              const Eigen::VectorXd& initial,
                              const std::vector<std::string>& names,
                              const FitOptions& options) {
    if (static_cast<size_t>(initial.size()) != names.size()) {
        throw InvalidParameters("parameter names do not match the initial guess length");
    }
    const JacobianFn jac = jacobian ? jacobian : numeric_jacobian(residuals);

    Eigen::VectorXd p = initial;
    Eigen::VectorXd r = residuals(p);
    double cost = r.squaredNorm();
    if (!std::isfinite(cost)) {
        throw ConvergenceError("fit residuals are not finite at the initial guess");
    }

    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    for (; iter < options.max_iterations && !converged; ++iter) {
        const Eigen::MatrixXd j = jac(p);
        const Eigen::MatrixXd a = j.transpose() * j;
        const Eigen::VectorXd g = j.transpose() * r;

        bool stepped = false;
        for (int attempt = 0; attempt < 60; ++attempt) {
            Eigen::MatrixXd damped = a;
            for (Eigen::Index k = 0; k < damped.rows(); ++k) {
                damped(k, k) += lambda * std::max(a(k, k), 1e-12);
            }
            const Eigen::VectorXd delta = damped.ldlt().solve(-g);
            const Eigen::VectorXd candidate = p + delta;
            const Eigen::VectorXd rc = residuals(candidate);
            const double new_cost = rc.squaredNorm();
            if (std::isfinite(new_cost) && new_cost <= cost) {
                const double step_size = delta.norm() / std::max(p.norm(), 1e-300);
                const double cost_drop = (cost - new_cost) / std::max(cost, 1e-300);
                p = candidate;
                r = rc;
                cost = new_cost;
                lambda = std::max(lambda * 0.1, 1e-14);
                stepped = true;
                if (step_size < options.step_tolerance || cost_drop < options.cost_tolerance) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            // No downhill step found at any damping: treat the point as a
            // (possibly flat) minimum.
            converged = true;
        }
    }

    FitResult out;
    out.names = names;
    out.values = p;
    out.residuals = r;
    out.converged = converged;
    out.iterations = iter;

    const Eigen::MatrixXd j = jac(p);
    const Eigen::Index n = r.size();
    const Eigen::Index k = p.size();
    const double dof = std::max<double>(1.0, static_cast<double>(n - k));
    out.reduced_chi_square = cost / dof;

    Eigen::MatrixXd jtj = j.transpose() * j;
    // Pseudo-inverse tolerates directions the data does not constrain.
    Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
    if (options.scale_covariance_by_chi2) {
        cov *= out.reduced_chi_square;
    }
    cov = 0.5 * (cov + cov.transpose()).eval();
    out.covariance = cov;
    out.sigmas = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

WeightedMean weighted_mean(const std::vector<double>& values, const std::vector<double>& sigmas) {
    if (values.empty() || values.size() != sigmas.size()) {
        throw InvalidParameters("weighted mean needs matching non-empty value and sigma lists");
    }
    double wsum = 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        if (!(sigmas[i] > 0.0)) {
            throw InvalidParameters("weighted mean sigmas must be positive");
        }
        const double w = 1.0 / (sigmas[i] * sigmas[i]);
        wsum += w;
        acc += w * values[i];
    }
    return {acc / wsum, 1.0 / std::sqrt(wsum)};
}

} // namespace wgqed
