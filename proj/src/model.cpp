#include "tideh/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tideh/error.hpp"

namespace tideh {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::causality_violation: return "causality_violation";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::undefined_rate: return "undefined_rate";
    case ErrorCode::no_bins: return "no_bins";
    case ErrorCode::underdetermined: return "underdetermined";
    case ErrorCode::degenerate_shape: return "degenerate_shape";
    case ErrorCode::empty_training: return "empty_training";
    case ErrorCode::objective_failure: return "objective_failure";
    case ErrorCode::step_too_coarse: return "step_too_coarse";
    case ErrorCode::rebin: return "rebin";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::not_fitted: return "not_fitted";
    case ErrorCode::supercritical: return "supercritical";
    case ErrorCode::parse: return "parse";
    case ErrorCode::missing_origin: return "missing_origin";
    case ErrorCode::io: return "io";
    case ErrorCode::bin_misalignment: return "bin_misalignment";
    case ErrorCode::mismatched_sweeps: return "mismatched_sweeps";
    case ErrorCode::inconsistent_results: return "inconsistent_results";
    case ErrorCode::fold_leak: return "fold_leak";
    }
    return "unknown";
}

Cascade::Cascade(std::string id, std::vector<Event> events)
    : id_(std::move(id)), events_(std::move(events)) {
    if (events_.empty())
        throw Error(ErrorCode::missing_origin, "cascade '" + id_ + "' has no events");
    if (events_.front().time != 0.0)
        throw Error(ErrorCode::missing_origin,
                    "cascade '" + id_ + "' does not start with an origin event at time 0");
    double prev = 0.0;
    for (const Event& e : events_) {
        if (!std::isfinite(e.time) || e.time < prev)
            throw Error(ErrorCode::invalid_argument,
                        "cascade '" + id_ + "' has negative, unsorted or non-finite event times");
        if (e.followers < 0)
            throw Error(ErrorCode::invalid_argument,
                        "cascade '" + id_ + "' has a negative follower count");
        prev = e.time;
    }
}

std::int64_t Cascade::retweets_until(double t) const {
    auto it = std::upper_bound(events_.begin(), events_.end(), t,
                               [](double v, const Event& e) { return v < e.time; });
    const auto n = static_cast<std::int64_t>(it - events_.begin());
    return n > 0 ? n - 1 : 0;
}

std::size_t Cascade::count_before(double t) const {
    auto it = std::lower_bound(events_.begin(), events_.end(), t,
                               [](const Event& e, double v) { return e.time < v; });
    return static_cast<std::size_t>(it - events_.begin());
}

Cascade Cascade::prefix(double t) const {
    const auto n = static_cast<std::size_t>(retweets_until(t)) + 1;
    return Cascade(id_, std::vector<Event>(events_.begin(), events_.begin() + n));
}

void KernelParams::validate() const {
    if (!(c0 > 0.0) || !(s0 > 0.0) || !(theta > 0.0) || !std::isfinite(c0) ||
        !std::isfinite(s0) || !std::isfinite(theta))
        throw Error(ErrorCode::invalid_argument, "kernel parameters must be positive and finite");
}

void InfectiousRateParams::validate() const {
    if (!(p0 >= 0.0) || !std::isfinite(p0))
        throw Error(ErrorCode::invalid_argument, "p0 must be finite and non-negative");
    if (!(r0 > -1.0 && r0 < 1.0))
        throw Error(ErrorCode::invalid_argument, "r0 must lie in (-1, 1)");
    if (!std::isfinite(phi0))
        throw Error(ErrorCode::invalid_argument, "phi0 must be finite");
    if (!(tau_m > 0.0))
        throw Error(ErrorCode::invalid_argument, "tau_m must be positive");
    if (!(Tm > 0.0) || !std::isfinite(Tm))
        throw Error(ErrorCode::invalid_argument, "Tm must be positive and finite");
    if (!std::isfinite(t0))
        throw Error(ErrorCode::invalid_argument, "t0 must be finite");
}

InfectiousRateParams InfectiousRateParams::constant(double p0) {
    InfectiousRateParams q;
    q.p0 = p0;
    return q;
}

double rate_shape(double t, const InfectiousRateParams& q) noexcept {
    const double osc = 1.0 - q.r0 * std::sin(2.0 * std::numbers::pi * (t + q.phi0) / q.Tm);
    return osc * std::exp(-(t - q.t0) / q.tau_m);
}

double memory_kernel(double s, const KernelParams& k) noexcept {
    if (s < 0.0) return 0.0;
    if (s <= k.s0) return k.c0;
    return k.c0 * std::pow(s / k.s0, -(1.0 + k.theta));
}

double kernel_integral(double t, const KernelParams& k) noexcept {
    if (t <= 0.0) return 0.0;
    if (t <= k.s0) return k.c0 * t;
    const double plateau = k.c0 * k.s0;
    return plateau + plateau / k.theta * -std::expm1(-k.theta * std::log(t / k.s0));
}

double kernel_total_mass(const KernelParams& k) noexcept {
    return k.c0 * k.s0 * (1.0 + 1.0 / k.theta);
}

double infectious_rate(double t, const InfectiousRateParams& q) noexcept {
    return q.p0 * rate_shape(t, q);
}

double memory_sum(double t, std::span<const Event> events, const KernelParams& k) {
    double sum = 0.0;
    for (const Event& e : events) {
        if (e.time >= t)
            throw Error(ErrorCode::causality_violation,
                        "event at t=" + std::to_string(e.time) +
                            " does not precede evaluation time " + std::to_string(t));
        sum += static_cast<double>(e.followers) * memory_kernel(t - e.time, k);
    }
    return sum;
}

double intensity(double t, std::span<const Event> prefix, const InfectiousRateParams& rate,
                 const KernelParams& k) {
    const double sum = memory_sum(t, prefix, k);
    if (sum == 0.0) return 0.0;
    return infectious_rate(t, rate) * sum;
}

} // namespace tideh
