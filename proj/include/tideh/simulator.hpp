#pragma once

#include <cstdint>
#include <vector>

#include "tideh/model.hpp"

namespace tideh {

/// Source of follower counts for simulated re-shares.
struct FollowerSampler {
    enum class Mode { replay, empirical, constant };

    Mode mode{Mode::constant};
    std::vector<std::int64_t> values;  // replay / empirical donor counts
    std::int64_t constant_value{0};
    std::uint64_t seed{0};

    [[nodiscard]] static FollowerSampler replay(std::vector<std::int64_t> values);
    [[nodiscard]] static FollowerSampler empirical(std::vector<std::int64_t> donor,
                                                   std::uint64_t seed = 0);
    [[nodiscard]] static FollowerSampler constant(std::int64_t value);

    void validate() const;
};

struct SimulationStats {
    std::uint64_t proposals{0};
    std::uint64_t accepted{0};
};

/// Exact sample of a cascade on [0, horizon] by Ogata thinning.
[[nodiscard]] Cascade simulate(const InfectiousRateParams& rate, const KernelParams& k,
                               std::int64_t origin_followers, const FollowerSampler& fs,
                               double horizon, std::uint64_t seed,
                               SimulationStats* stats = nullptr);

/// Continues an observed cascade: events of `history` with time <= start are
/// kept and new events are sampled on (start, horizon].
[[nodiscard]] Cascade simulate_continuation(const Cascade& history, double start,
                                            const InfectiousRateParams& rate,
                                            const KernelParams& k, const FollowerSampler& fs,
                                            double horizon, std::uint64_t seed,
                                            SimulationStats* stats = nullptr);

/// Seed of realization `index` in a batch started from `base_seed`.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) noexcept;

/// n independent realizations; realization i uses derive_seed(base_seed, i).
[[nodiscard]] std::vector<Cascade> simulate_batch_serial(
    std::size_t n, const InfectiousRateParams& rate, const KernelParams& k,
    std::int64_t origin_followers, const FollowerSampler& fs, double horizon,
    std::uint64_t base_seed);
[[nodiscard]] std::vector<Cascade> simulate_batch(std::size_t n, const InfectiousRateParams& rate,
                                                  const KernelParams& k,
                                                  std::int64_t origin_followers,
                                                  const FollowerSampler& fs, double horizon,
                                                  std::uint64_t base_seed);

} // namespace tideh
