#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tideh/model.hpp"

namespace tideh {

// ---------------------------------------------------------------------------
// Log-linear regression on the cumulative count (LR) and its extension with
// follower features (LR-N). One coefficient set per target time.

struct LrCoefficients {
    double alpha{0.0};
    double beta_count{1.0};      // exponent of R(T); fixed at 1 for LR
    double beta_exposure{0.0};   // exponent of D(T)
    double beta_origin{0.0};     // exponent of d0
    double sigma2{0.0};
};

struct LrModel {
    bool with_followers{false};
    double T{0.0};
    std::vector<double> target_times;
    std::vector<LrCoefficients> coefficients;  // parallel to target_times
    std::size_t rows_used{0};
    std::size_t rows_excluded{0};

    [[nodiscard]] const LrCoefficients& at(double t) const;
};

/// One training observation of the regression: log-features and log R(t) per target.
struct LrRow {
    double R_T{0.0};
    double D_T{0.0};
    double d0{0.0};
    std::vector<double> R_targets;  // R(t) per target time
};

/// D(T): total followers of events with time < T, origin included.
[[nodiscard]] double cumulative_followers(const Cascade& c, double T);

[[nodiscard]] LrRow lr_row(const Cascade& c, double T, std::span<const double> target_times);

[[nodiscard]] LrModel lr_fit(std::span<const Cascade> training, double T,
                             std::span<const double> target_times);
[[nodiscard]] LrModel lr_fit_rows(std::span<const LrRow> rows, double T,
                                  std::span<const double> target_times);
[[nodiscard]] double lr_predict(const LrModel& m, double R_T, double t);

[[nodiscard]] LrModel lrn_fit(std::span<const Cascade> training, double T,
                              std::span<const double> target_times);
[[nodiscard]] LrModel lrn_fit_rows(std::span<const LrRow> rows, double T,
                                   std::span<const double> target_times);
[[nodiscard]] double lrn_predict(const LrModel& m, double R_T, double D_T, double d0, double t);

/// OLS standard errors of (alpha, beta_count, beta_exposure, beta_origin) for
/// target `index` (residual variance with n - 4 degrees of freedom).
[[nodiscard]] std::array<double, 4> lrn_standard_errors(std::span<const LrRow> rows,
                                                        const LrModel& m, std::size_t index);

// ---------------------------------------------------------------------------
// Reinforced Poisson process: lambda(t) = c t^-gamma r_alpha(R(t-)),
// r_alpha(R) = eps + (1 - e^{-alpha (R + 1)}) / (1 - e^{-alpha}).

inline constexpr double kRppGammaMin = 1.5;
inline constexpr double kRppGammaMax = 3.5;
inline constexpr double kRppAlphaMin = 0.001;
inline constexpr double kRppAlphaMax = 0.1;

struct RppModel {
    double c{1.0};
    double gamma{2.0};
    double alpha{0.01};
    double epsilon{0.1};
    bool converged{false};
    int iterations{0};
    double log_likelihood{0.0};
};

struct RppOptions {
    double epsilon{0.1};
    double learning_rate{1e-5};
    double relative_tolerance{1e-4};
    int max_iterations{100000};
    double t_floor{1.0};
};

/// Event times (origin excluded, clamped below at t_floor) of the retweets in (0, T].
[[nodiscard]] std::vector<double> rpp_event_times(const Cascade& c, double T, double t_floor);

[[nodiscard]] double rpp_log_likelihood(std::span<const double> times, double T,
                                        const RppModel& m, double t_floor = 1.0);
/// Gradient with respect to (c, gamma, alpha).
[[nodiscard]] std::array<double, 3> rpp_gradient(std::span<const double> times, double T,
                                                 const RppModel& m, double t_floor = 1.0);

/// Projected gradient ascent; c is set to its closed-form maximizer after every step.
[[nodiscard]] RppModel rpp_fit(const Cascade& c, double T, const RppOptions& opts = {});
[[nodiscard]] RppModel rpp_fit_times(std::span<const double> times, double T,
                                     const RppOptions& opts = {});

/// Rate of the reinforced process given R(t-) = count.
[[nodiscard]] double rpp_intensity(const RppModel& m, double t, double count);

/// Closed-form expected R(t) for t >= T given R(T).
[[nodiscard]] double rpp_predict(const RppModel& m, double R_T, double T, double t);

// ---------------------------------------------------------------------------
// SEISMIC final-count estimator.

struct SeismicParams {
    double alpha_T{0.326};
    double beta_T{20.0};
    double rate_window{3600.0};  // trailing window for p_hat(T), s
};

struct SeismicEstimate {
    double p_hat{0.0};
    double remaining_exposure{0.0};  // Delta D(T)
    double final_count{0.0};
};

[[nodiscard]] SeismicEstimate seismic_from_rate(const Cascade& c, double T, double p_hat,
                                                const SeismicParams& sp = {},
                                                const KernelParams& k = {});
[[nodiscard]] double seismic_predict_final(const Cascade& c, double T,
                                           const SeismicParams& sp = {},
                                           const KernelParams& k = {});

} // namespace tideh
