#include "tideh/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "tideh/error.hpp"
#include "tideh/kernels.hpp"
#include "tideh/text_format.hpp"

namespace tideh {
namespace {

// Number of whole steps in `span`, or -1 when span is not a multiple of step.
std::ptrdiff_t whole_steps(double span, double step) {
    const double ratio = span / step;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) return -1;
    return static_cast<std::ptrdiff_t>(rounded);
}

} // namespace

void ForecastGrid::validate() const {
    if (!std::isfinite(T) || !std::isfinite(T_max) || !(T >= 0.0) || !(T < T_max))
        throw Error(ErrorCode::invalid_argument, "forecast grid: need 0 <= T < T_max");
    if (!(step > 0.0) || !std::isfinite(step))
        throw Error(ErrorCode::invalid_argument, "forecast grid: step must be positive");
    if (whole_steps(T_max - T, step) < 1)
        throw Error(ErrorCode::invalid_argument,
                    "forecast grid: step must divide T_max - T (got step=" + std::to_string(step) +
                        ", span=" + std::to_string(T_max - T) + ")");
}

std::size_t ForecastGrid::nodes() const {
    validate();
    return static_cast<std::size_t>(whole_steps(T_max - T, step)) + 1;
}

std::vector<double> ForecastGrid::times() const {
    std::vector<double> out(nodes());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = time(i);
    return out;
}

double Forecast::integral() const noexcept {
    double sum = 0.0;
    for (std::size_t i = 1; i < lambda_hat.size(); ++i)
        sum += 0.5 * step * (lambda_hat[i - 1] + lambda_hat[i]);
    return sum;
}

double observed_drive(const Cascade& c, double T, const InfectiousRateParams& rate,
                      const KernelParams& k, double t) {
    if (!(t >= T)) throw Error(ErrorCode::invalid_argument, "observed_drive: requires t >= T");
    const std::size_t observed = static_cast<std::size_t>(c.retweets_until(T)) + 1;
    const auto active = c.events().first(std::min(observed, c.count_before(t)));
    const double sum = memory_sum(t, active, k);
    return sum == 0.0 ? 0.0 : infectious_rate(t, rate) * sum;
}

double mean_followers(const Cascade& c, double T) {
    if (c.size() == 0 || !(T >= 0.0))
        throw Error(ErrorCode::invalid_argument, "mean_followers: empty prefix");
    const auto n = static_cast<std::size_t>(c.retweets_until(T)) + 1;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += static_cast<double>(c.events()[i].followers);
    return sum / static_cast<double>(n);
}

ObservedMemory::ObservedMemory(const Cascade& c, const ForecastGrid& grid, const KernelParams& k)
    : grid_(grid), kernel_(k) {
    k.validate();
    const std::size_t n = grid.nodes();
    const auto observed = c.events().first(static_cast<std::size_t>(c.retweets_until(grid.T)) + 1);
    memory_ = kernels::observed_memory(observed, grid.times(), k);
    lags_ = kernels::kernel_lag_table(n, grid.step, k);
    d_p_ = tideh::mean_followers(c, grid.T);
    retweets_ = c.retweets_until(grid.T);
}

Forecast ObservedMemory::solve(const InfectiousRateParams& rate) const {
    return solve(rate, d_p_);
}

Forecast ObservedMemory::solve(const InfectiousRateParams& rate, double d_p) const {
    rate.validate();
    const std::size_t n = memory_.size();
    std::vector<double> p(n), drive(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = infectious_rate(grid_.time(i), rate);
        drive[i] = memory_[i] == 0.0 ? 0.0 : p[i] * memory_[i];
    }
    Forecast f;
    f.T = grid_.T;
    f.T_max = grid_.T_max;
    f.step = grid_.step;
    f.d_p = d_p;
    f.lambda_hat = kernels::volterra_trapezoid(
        kernels::VolterraSystem{drive, p, lags_, d_p, grid_.step});
    return f;
}

Forecast solve_volterra(const Cascade& c, const InfectiousRateParams& rate, const KernelParams& k,
                        const ForecastGrid& grid) {
    return ObservedMemory(c, grid, k).solve(rate);
}

std::vector<double> prediction_edges(double T, double T_max, double delta_pred) {
    if (!(delta_pred > 0.0) || !(T < T_max))
        throw Error(ErrorCode::invalid_argument, "prediction bins: need delta > 0 and T < T_max");
    std::vector<double> edges{T};
    for (std::size_t k = 1;; ++k) {
        const double e = T + static_cast<double>(k) * delta_pred;
        if (e >= T_max * (1.0 - 1e-12)) {
            edges.push_back(T_max);
            break;
        }
        edges.push_back(e);
    }
    return edges;
}

Activity predict_activity(const Forecast& f, double delta_pred) {
    if (!(delta_pred >= f.step))
        throw Error(ErrorCode::rebin, "predict_activity: delta_pred must be >= the grid step");
    Activity a;
    a.edges = prediction_edges(f.T, f.T_max, delta_pred);
    const std::size_t last = f.lambda_hat.size() - 1;
    std::vector<std::size_t> nodes;
    for (double e : a.edges) {
        const auto s = whole_steps(e - f.T, f.step);
        if (s < 0 || static_cast<std::size_t>(s) > last)
            throw Error(ErrorCode::rebin, "predict_activity: bin edge " + std::to_string(e) +
                                              " is not on the forecast grid");
        nodes.push_back(static_cast<std::size_t>(s));
    }
    for (std::size_t b = 0; b + 1 < nodes.size(); ++b) {
        double sum = 0.0;
        for (std::size_t i = nodes[b] + 1; i <= nodes[b + 1]; ++i)
            sum += 0.5 * f.step * (f.lambda_hat[i - 1] + f.lambda_hat[i]);
        a.values.push_back(sum);
    }
    return a;
}

double predict_final(const Cascade& c, const Forecast& f) {
    return static_cast<double>(c.retweets_until(f.T)) + f.integral();
}

void write_forecast_csv(std::ostream& os, const Forecast& f) {
    os << "t_seconds,lambda_hat\n";
    for (std::size_t i = 0; i < f.lambda_hat.size(); ++i)
        os << format_double(f.time(i)) << ',' << format_double(f.lambda_hat[i]) << '\n';
}

void write_activity_csv(std::ostream& os, const Activity& a) {
    os << "bin_start_seconds,bin_width_seconds,A_k\n";
    for (std::size_t b = 0; b < a.values.size(); ++b)
        os << format_double(a.edges[b]) << ',' << format_double(a.edges[b + 1] - a.edges[b]) << ','
           << format_double(a.values[b]) << '\n';
}

} // namespace tideh
