#ifndef WGQED_FIT_HPP
#define WGQED_FIT_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wgqed {

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd values;
    Eigen::VectorXd sigmas;
    Eigen::MatrixXd covariance;
    Eigen::VectorXd residuals; // weighted, at the solution
    double reduced_chi_square = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> flags;          // e.g. FlatReflection
    std::map<std::string, double> extras;    // derived scalars (implied period, ...)

    double value(const std::string& name) const;
    double sigma(const std::string& name) const;
    bool has_flag(const std::string& flag) const;
};

// Weighted residual vector r(p); the cost is |r|^2 / 2.
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// Optional analytic Jacobian dr/dp.
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct FitOptions {
    int max_iterations = 500;
    double step_tolerance = 1e-10;  // relative parameter step
    double cost_tolerance = 1e-12;  // relative cost change
    // When per-point sigmas were not supplied, the covariance is scaled by the
    // reduced chi-square, the usual spectroscopy convention.
    bool scale_covariance_by_chi2 = true;
};

// Levenberg-Marquardt minimization of |r(p)|^2. Returns point estimates,
// covariance from (J^T J)^{-1} at the solution, and a convergence flag;
// hitting the iteration cap leaves converged = false but still reports.
FitResult levenberg_marquardt(const ResidualFn& residuals, const JacobianFn& jacobian,
                              const Eigen::VectorXd& initial,
                              const std::vector<std::string>& names,
                              const FitOptions& options = {});

// Forward-difference Jacobian for models without a closed form.
JacobianFn numeric_jacobian(const ResidualFn& residuals, double rel_step = 1e-7);

struct WeightedMean {
    double mean;
    double sigma; // 1 / sqrt(sum of inverse variances)
};

// Inverse-variance weighted average of independent estimates.
WeightedMean weighted_mean(const std::vector<double>& values, const std::vector<double>& sigmas);

} // namespace wgqed

#endif
