#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tideh {

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kSecondsPerDay = 86400.0;

[[nodiscard]] constexpr double hours(double h) noexcept { return h * kSecondsPerHour; }
[[nodiscard]] constexpr double days(double d) noexcept { return d * kSecondsPerDay; }

/// One post in a cascade: seconds since the origin post and the poster's follower count.
struct Event {
    double time{0.0};
    std::int64_t followers{0};

    friend bool operator==(const Event&, const Event&) = default;
};

/// An origin post followed by its re-shares, ordered in time.
///
/// The constructor enforces the invariants: at least one event, the first
/// event at time 0, non-decreasing finite times and non-negative followers.
class Cascade {
public:
    Cascade() = default;
    Cascade(std::string id, std::vector<Event> events);

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] std::span<const Event> events() const noexcept { return events_; }
    [[nodiscard]] std::size_t size() const noexcept { return events_.size(); }
    [[nodiscard]] const Event& origin() const { return events_.front(); }
    [[nodiscard]] double last_time() const { return events_.back().time; }

    /// Number of re-shares with time <= t (the origin is not counted).
    [[nodiscard]] std::int64_t retweets_until(double t) const;

    /// Events with time <= t, origin included.
    [[nodiscard]] Cascade prefix(double t) const;

    /// Index one past the last event with time strictly below t.
    [[nodiscard]] std::size_t count_before(double t) const;

    friend bool operator==(const Cascade&, const Cascade&) = default;

private:
    std::string id_;
    std::vector<Event> events_;
};

/// Power-law memory kernel with a constant plateau at short lags.
struct KernelParams {
    double c0{6.49e-4};   // density on the plateau, 1/s
    double s0{300.0};     // plateau cutoff, s
    double theta{0.242};  // tail exponent

    void validate() const;
    friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// Oscillating, exponentially decaying per-follower infectious rate.
///
/// A constant rate is represented with r0 = 0 and tau_m = +inf.
struct InfectiousRateParams {
    double p0{0.0};
    double r0{0.0};
    double phi0{0.0};    // s
    double tau_m{std::numeric_limits<double>::infinity()};  // s
    double Tm{kSecondsPerDay};  // s
    double t0{0.0};

    void validate() const;
    [[nodiscard]] static InfectiousRateParams constant(double p0);
    friend bool operator==(const InfectiousRateParams&, const InfectiousRateParams&) = default;
};

/// Oscillation and decay part of the infectious rate; the rate divided by p0.
[[nodiscard]] double rate_shape(double t, const InfectiousRateParams& q) noexcept;

[[nodiscard]] double memory_kernel(double s, const KernelParams& k) noexcept;

/// Closed-form integral of the kernel over [0, t]; zero for t <= 0.
[[nodiscard]] double kernel_integral(double t, const KernelParams& k) noexcept;

/// Limit of kernel_integral as t grows without bound.
[[nodiscard]] double kernel_total_mass(const KernelParams& k) noexcept;

[[nodiscard]] double infectious_rate(double t, const InfectiousRateParams& q) noexcept;

/// Sum of d_i * phi(t - t_i) over the given events; all events must precede t.
[[nodiscard]] double memory_sum(double t, std::span<const Event> events, const KernelParams& k);

/// Conditional intensity p(t) * sum_i d_i * phi(t - t_i). Throws
/// ErrorCode::causality_violation if any event time is >= t.
[[nodiscard]] double intensity(double t, std::span<const Event> prefix,
                               const InfectiousRateParams& rate, const KernelParams& k);

} // namespace tideh
