#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tideh::optimize {

/// Fills `residuals` (size m) and, when `jacobian` is non-empty, the row-major
/// m x n Jacobian at `x`.
using ResidualFn = std::function<void(std::span<const double> x, std::span<double> residuals,
                                      std::span<double> jacobian)>;

struct LmOptions {
    int max_iterations{200};
    double initial_damping{1e-3};
    double cost_tolerance{1e-15};   // relative decrease of the cost
    double step_tolerance{1e-12};   // relative size of the step
    double gradient_tolerance{1e-20};
};

struct LmResult {
    std::vector<double> x;
    double cost{0.0};  // sum of squared residuals
    int iterations{0};
    bool converged{false};
};

/// Levenberg-Marquardt with Marquardt diagonal scaling.
[[nodiscard]] LmResult levenberg_marquardt(const ResidualFn& fn, std::size_t n_residuals,
                                           std::vector<double> x0, const LmOptions& opts = {});

using ObjectiveFn = std::function<double(std::span<const double> x)>;

struct NelderMeadOptions {
    double reflection{1.0};
    double expansion{2.0};
    double contraction{0.5};
    double shrink{0.5};
    double relative_spread{1e-3};
    int max_iterations{200};
    std::vector<double> initial_step;  // per-coordinate; defaults to 0.1 * max(|x0_i|, 1)
};

struct NelderMeadResult {
    std::vector<double> x;
    double value{0.0};
    int iterations{0};
    bool converged{false};
};

/// Downhill simplex minimization. Non-finite objective values count as +inf.
[[nodiscard]] NelderMeadResult nelder_mead(const ObjectiveFn& fn, std::vector<double> x0,
                                           const NelderMeadOptions& opts = {});

} // namespace tideh::optimize
