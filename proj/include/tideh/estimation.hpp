#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tideh/model.hpp"

namespace tideh {

inline constexpr double kDefaultObservationWindow = 4.0 * kSecondsPerHour;
inline constexpr double kMinDecayTime = 0.5 * kSecondsPerDay;
inline constexpr double kMaxDecayTime = 20.0 * kSecondsPerDay;

/// Maximum-likelihood estimate of a constant infectious rate on (t_st, t_en].
[[nodiscard]] double windowed_mle(const Cascade& c, double t_st, double t_en,
                                  const KernelParams& k = {});

struct RateBin {
    std::size_t index{0};
    double start{0.0};
    double end{0.0};
    double p_hat{0.0};
    std::int64_t events{0};
    double exposure{0.0};  // follower-weighted kernel mass inside the bin
    bool usable{false};    // events > 0 and exposure > 0

    [[nodiscard]] double midpoint() const noexcept { return 0.5 * (start + end); }
};

/// Per-window rate estimates tiling [0, M * window], M = floor(T / window).
struct RateProfile {
    double window{kDefaultObservationWindow};
    double T{0.0};
    std::vector<RateBin> bins;

    [[nodiscard]] std::size_t usable_count() const noexcept;
};

[[nodiscard]] RateProfile rate_profile(const Cascade& c, double T,
                                       double delta_obs = kDefaultObservationWindow,
                                       const KernelParams& k = {});

/// Oscillation and decay parameters of the rate with p0 factored out.
struct RateShape {
    double r0{0.0};
    double phi0{0.0};
    double tau_m{2.0 * kSecondsPerDay};

    friend bool operator==(const RateShape&, const RateShape&) = default;
};

[[nodiscard]] RateShape shape_of(const InfectiousRateParams& q) noexcept;
[[nodiscard]] InfectiousRateParams with_amplitude(const RateShape& s, double p0,
                                                  double Tm = kSecondsPerDay) noexcept;

/// Equivalent parameters with r0 >= 0 and phi0 in [0, Tm).
[[nodiscard]] InfectiousRateParams canonical(InfectiousRateParams q) noexcept;

/// Sum over usable bins of (p_hat_k - p(midpoint_k))^2.
[[nodiscard]] double rate_residual(const RateProfile& profile, const InfectiousRateParams& q);

struct FitResult {
    InfectiousRateParams params;
    double residual{0.0};
    bool converged{false};
    int iterations{0};
};

struct FitOptions {
    double Tm{kSecondsPerDay};
    int phase_starts{8};
    int max_iterations{200};
};

/// Box-constrained Levenberg-Marquardt fit of (p0, r0, phi0, tau_m).
[[nodiscard]] FitResult fit_full(const RateProfile& profile, const FitOptions& opts = {});

/// Closed-form least-squares p0 for a fixed shape, clamped at 0.
[[nodiscard]] double fit_amplitude(const RateProfile& profile, const RateShape& shape,
                                   double Tm = kSecondsPerDay);

/// Constant-rate ("standard Hawkes") estimate over (0, T].
[[nodiscard]] double fit_constant(const Cascade& c, double T, const KernelParams& k = {});

struct TrainingOptions {
    double delta_obs{kDefaultObservationWindow};
    double step{360.0};
    double Tm{kSecondsPerDay};
    int max_iterations{200};
    double relative_spread{1e-3};
    std::vector<RateShape> starts;  // empty: built-in start points
};

struct TrainingResult {
    RateShape shape;
    double objective{0.0};  // mean error per hour over the training cascades
    int iterations{0};
    bool converged{false};
};

/// Nelder-Mead search for the shape minimizing the mean error per hour when each
/// cascade's p0 is refit on its own prefix and its future is forecast to T_max.
[[nodiscard]] TrainingResult train_shape(std::span<const Cascade> training, double T,
                                         double delta_pred, double T_max,
                                         const TrainingOptions& opts = {},
                                         const KernelParams& k = {});

/// Mean error per hour over `training` for one fixed shape (the training objective).
[[nodiscard]] double shape_objective(std::span<const Cascade> training, const RateShape& shape,
                                     double T, double delta_pred, double T_max,
                                     const TrainingOptions& opts = {}, const KernelParams& k = {});

} // namespace tideh
