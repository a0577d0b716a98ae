#pragma once

// Data-parallel inner loops of the forecaster. Each kernel has a serial
// reference (`*_serial`) and an OpenMP version; both produce bitwise identical
// results because every output element is accumulated in the same order.

#include <span>
#include <vector>

#include "tideh/model.hpp"

namespace tideh::kernels {

/// S(t_j) = sum over events with time < t_j of d_i * phi(t_j - t_i).
/// `events` must be sorted by time.
[[nodiscard]] std::vector<double> observed_memory_serial(std::span<const Event> events,
                                                         std::span<const double> times,
                                                         const KernelParams& k);
[[nodiscard]] std::vector<double> observed_memory(std::span<const Event> events,
                                                  std::span<const double> times,
                                                  const KernelParams& k);

/// phi(j * step) for j = 0..n-1.
[[nodiscard]] std::vector<double> kernel_lag_table(std::size_t n, double step,
                                                   const KernelParams& k);

struct VolterraSystem {
    std::span<const double> drive;      // f on the grid
    std::span<const double> rate;       // p on the grid
    std::span<const double> lag_kernel; // phi(j * step), at least drive.size() entries
    double mean_followers{0.0};
    double step{0.0};
};

/// Forward trapezoidal solution of
///   lambda(t) = f(t) + d_p p(t) \int_T^t lambda(s) phi(t - s) ds
/// with the diagonal term solved implicitly; negative values are clamped to 0.
/// Throws step_too_coarse when the implicit diagonal is not invertible and
/// non_finite on NaN/inf.
[[nodiscard]] std::vector<double> volterra_trapezoid_serial(const VolterraSystem& sys);
[[nodiscard]] std::vector<double> volterra_trapezoid(const VolterraSystem& sys);

} // namespace tideh::kernels
