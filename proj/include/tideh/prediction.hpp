#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "tideh/model.hpp"

namespace tideh {

inline constexpr double kDefaultHorizon = 168.0 * kSecondsPerHour;
inline constexpr double kDefaultStep = 0.1 * kSecondsPerHour;

/// Uniform grid T, T + step, ..., T_max.
struct ForecastGrid {
    double T{0.0};
    double T_max{kDefaultHorizon};
    double step{kDefaultStep};

    /// Validates T < T_max, step > 0 and that step divides T_max - T.
    void validate() const;
    [[nodiscard]] std::size_t nodes() const;
    [[nodiscard]] double time(std::size_t i) const noexcept {
        return T + static_cast<double>(i) * step;
    }
    [[nodiscard]] std::vector<double> times() const;
};

/// Expected future intensity on a ForecastGrid.
struct Forecast {
    double T{0.0};
    double T_max{kDefaultHorizon};
    double step{kDefaultStep};
    double d_p{0.0};
    std::vector<double> lambda_hat;

    [[nodiscard]] double time(std::size_t i) const noexcept {
        return T + static_cast<double>(i) * step;
    }
    /// Trapezoidal integral of lambda_hat over [T, T_max].
    [[nodiscard]] double integral() const noexcept;
};

/// Contribution of observed events (time < T, and < t) to the intensity at t >= T.
[[nodiscard]] double observed_drive(const Cascade& c, double T, const InfectiousRateParams& rate,
                                    const KernelParams& k, double t);

/// Mean follower count over events with time <= T, origin included.
[[nodiscard]] double mean_followers(const Cascade& c, double T);

/// Shape-independent part of a forecast: the memory sum of the observed
/// events on every grid node, the mean follower count and R(T). Forecasts for
/// any number of rate functions reuse it.
class ObservedMemory {
public:
    ObservedMemory(const Cascade& c, const ForecastGrid& grid, const KernelParams& k = {});

    [[nodiscard]] const ForecastGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> memory() const noexcept { return memory_; }
    [[nodiscard]] double mean_followers() const noexcept { return d_p_; }
    [[nodiscard]] std::int64_t retweets() const noexcept { return retweets_; }

    /// Solves the Volterra equation for `rate`; `d_p` overrides the observed mean.
    [[nodiscard]] Forecast solve(const InfectiousRateParams& rate) const;
    [[nodiscard]] Forecast solve(const InfectiousRateParams& rate, double d_p) const;

private:
    ForecastGrid grid_;
    KernelParams kernel_;
    std::vector<double> memory_;
    std::vector<double> lags_;
    double d_p_{0.0};
    std::int64_t retweets_{0};
};

/// Expected intensity after T given the events observed up to T.
[[nodiscard]] Forecast solve_volterra(const Cascade& c, const InfectiousRateParams& rate,
                                      const KernelParams& k, const ForecastGrid& grid);

/// Bin edges T, T + delta, ..., with the last bin truncated at T_max.
[[nodiscard]] std::vector<double> prediction_edges(double T, double T_max, double delta_pred);

/// Expected event counts per prediction bin (trapezoidal integral of lambda_hat).
struct Activity {
    std::vector<double> edges;   // size = values.size() + 1
    std::vector<double> values;
};

[[nodiscard]] Activity predict_activity(const Forecast& f, double delta_pred);

/// R(T) + integral of lambda_hat over [T, T_max].
[[nodiscard]] double predict_final(const Cascade& c, const Forecast& f);

void write_forecast_csv(std::ostream& os, const Forecast& f);
void write_activity_csv(std::ostream& os, const Activity& a);

} // namespace tideh
