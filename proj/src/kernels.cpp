#include "tideh/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <omp.h>

#include "tideh/error.hpp"

namespace tideh::kernels {
namespace {

double memory_at(double t, std::span<const Event> events, const KernelParams& k) {
    auto end = std::lower_bound(events.begin(), events.end(), t,
                                [](const Event& e, double v) { return e.time < v; });
    double sum = 0.0;
    for (auto it = events.begin(); it != end; ++it)
        sum += static_cast<double>(it->followers) * memory_kernel(t - it->time, k);
    return sum;
}

void check_system(const VolterraSystem& sys) {
    if (sys.rate.size() != sys.drive.size() || sys.lag_kernel.size() < sys.drive.size())
        throw Error(ErrorCode::invalid_argument, "volterra: grid arrays have mismatched sizes");
    if (!(sys.step > 0.0))
        throw Error(ErrorCode::invalid_argument, "volterra: step must be positive");
    if (!(sys.mean_followers >= 0.0))
        throw Error(ErrorCode::invalid_argument, "volterra: mean follower count must be >= 0");
}

// Returns a negative value to signal a coarse step, NaN for non-finite input.
double solve_diagonal(double history, std::size_t n, const VolterraSystem& sys) {
    const double gain = sys.mean_followers * sys.rate[n];
    if (n == 0) return sys.drive[0];
    const double diag = 1.0 - 0.5 * sys.step * gain * sys.lag_kernel[0];
    if (diag <= 0.0) return -1.0;
    return (sys.drive[n] + gain * sys.step * history) / diag;
}

[[noreturn]] void fail_diagonal(double value, std::size_t n) {
    if (std::isnan(value) || std::isinf(value))
        throw Error(ErrorCode::non_finite,
                    "volterra: non-finite intensity at grid node " + std::to_string(n));
    throw Error(ErrorCode::step_too_coarse,
                "volterra: 1 - (step/2) d_p p(t) phi(0) <= 0 at grid node " + std::to_string(n) +
                    "; reduce the grid step");
}

} // namespace

std::vector<double> observed_memory_serial(std::span<const Event> events,
                                           std::span<const double> times, const KernelParams& k) {
    std::vector<double> out(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) out[j] = memory_at(times[j], events, k);
    return out;
}

std::vector<double> observed_memory(std::span<const Event> events, std::span<const double> times,
                                    const KernelParams& k) {
    std::vector<double> out(times.size());
    const auto n = static_cast<std::ptrdiff_t>(times.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = memory_at(times[j], events, k);
    return out;
}

std::vector<double> kernel_lag_table(std::size_t n, double step, const KernelParams& k) {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = memory_kernel(static_cast<double>(j) * step, k);
    return out;
}

std::vector<double> volterra_trapezoid_serial(const VolterraSystem& sys) {
    check_system(sys);
    const std::size_t n_nodes = sys.drive.size();
    std::vector<double> lambda(n_nodes, 0.0);
    for (std::size_t n = 0; n < n_nodes; ++n) {
        // Gather in the same order the parallel version scatters: node 0 at
        // half weight first, then interior nodes ascending.
        double history = 0.0;
        if (n > 0) {
            history += 0.5 * lambda[0] * sys.lag_kernel[n];
            for (std::size_t j = 1; j < n; ++j) history += lambda[j] * sys.lag_kernel[n - j];
        }
        const double value = solve_diagonal(history, n, sys);
        if (!std::isfinite(value) || value < -0.5) fail_diagonal(value, n);
        lambda[n] = std::max(value, 0.0);
    }
    return lambda;
}

std::vector<double> volterra_trapezoid(const VolterraSystem& sys) {
    check_system(sys);
    const std::size_t n_nodes = sys.drive.size();
    std::vector<double> lambda(n_nodes, 0.0);
    std::vector<double> history(n_nodes, 0.0);
    double failed_value = 0.0;
    std::ptrdiff_t failed_at = -1;

#pragma omp parallel
    {
        for (std::size_t n = 0; n < n_nodes; ++n) {
#pragma omp single
            {
                const double value = solve_diagonal(history[n], n, sys);
                if (!std::isfinite(value) || value < -0.5) {
                    failed_value = value;
                    failed_at = static_cast<std::ptrdiff_t>(n);
                } else {
                    lambda[n] = std::max(value, 0.0);
                }
            }
            if (failed_at >= 0) break;
            const double weighted = (n == 0 ? 0.5 : 1.0) * lambda[n];
            const auto first = static_cast<std::ptrdiff_t>(n + 1);
            const auto last = static_cast<std::ptrdiff_t>(n_nodes);
#pragma omp for schedule(static)
            for (std::ptrdiff_t m = first; m < last; ++m)
                history[m] += weighted * sys.lag_kernel[m - static_cast<std::ptrdiff_t>(n)];
        }
    }
    if (failed_at >= 0) fail_diagonal(failed_value, static_cast<std::size_t>(failed_at));
    return lambda;
}

} // namespace tideh::kernels
