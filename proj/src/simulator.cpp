#include "tideh/simulator.hpp"

#include <cassert>
#include <cmath>
#include <exception>
#include <random>
#include <string>

#include "tideh/error.hpp"

namespace tideh {
namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform on (0, 1]; keeps -log(u) finite.
double uniform_open0(std::mt19937_64& rng) noexcept {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

class FollowerStream {
public:
    FollowerStream(const FollowerSampler& fs, std::uint64_t sim_seed)
        : fs_(fs), rng_(splitmix64(sim_seed ^ splitmix64(fs.seed))) {}

    std::int64_t next() {
        switch (fs_.mode) {
        case FollowerSampler::Mode::constant: return fs_.constant_value;
        case FollowerSampler::Mode::replay: return fs_.values[cursor_++ % fs_.values.size()];
        case FollowerSampler::Mode::empirical: {
            std::uniform_int_distribution<std::size_t> pick(0, fs_.values.size() - 1);
            return fs_.values[pick(rng_)];
        }
        }
        return 0;
    }

private:
    const FollowerSampler& fs_;
    std::mt19937_64 rng_;
    std::size_t cursor_{0};
};

// Ogata thinning from `start`. For t >= t_cur both the decay envelope
// p0 (1 + |r0|) exp(-(t - t0)/tau_m) and the memory sum are non-increasing,
// so their product at t_cur bounds the intensity until the next event.
void thin(std::vector<Event>& events, double start, const InfectiousRateParams& rate,
          const KernelParams& k, const FollowerSampler& fs, double horizon, std::uint64_t seed,
          SimulationStats* stats) {
    std::mt19937_64 rng(splitmix64(seed));
    FollowerStream followers(fs, seed);
    const double envelope_scale = rate.p0 * (1.0 + std::abs(rate.r0));
    if (envelope_scale == 0.0) return;

    double t = start;
    // Memory just after t, events at t included (phi is c0 on the plateau).
    double memory = memory_sum(std::nextafter(t, horizon), events, k);
    for (;;) {
        const double bound = envelope_scale * std::exp(-(t - rate.t0) / rate.tau_m) * memory;
        if (!std::isfinite(bound))
            throw Error(ErrorCode::non_finite, "simulate: proposal bound is not finite");
        if (bound <= 0.0) break;

        double next = t - std::log(uniform_open0(rng)) / bound;
        if (next <= t) next = std::nextafter(t, horizon + 1.0);
        if (next > horizon) break;
        t = next;
        if (stats) ++stats->proposals;

        memory = memory_sum(t, events, k);
        const double lambda = infectious_rate(t, rate) * memory;
        assert(lambda <= bound * (1.0 + 1e-12));
        if (uniform_open0(rng) * bound <= lambda) {
            const std::int64_t d = followers.next();
            events.push_back(Event{t, d});
            memory += static_cast<double>(d) * k.c0;
            if (stats) ++stats->accepted;
        }
    }
}

void check_run(const InfectiousRateParams& rate, const KernelParams& k, const FollowerSampler& fs,
               double horizon) {
    rate.validate();
    k.validate();
    fs.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw Error(ErrorCode::invalid_argument, "simulate: horizon must be positive and finite");
}

} // namespace

FollowerSampler FollowerSampler::replay(std::vector<std::int64_t> values) {
    FollowerSampler fs;
    fs.mode = Mode::replay;
    fs.values = std::move(values);
    fs.validate();
    return fs;
}

FollowerSampler FollowerSampler::empirical(std::vector<std::int64_t> donor, std::uint64_t seed) {
    FollowerSampler fs;
    fs.mode = Mode::empirical;
    fs.values = std::move(donor);
    fs.seed = seed;
    fs.validate();
    return fs;
}

FollowerSampler FollowerSampler::constant(std::int64_t value) {
    FollowerSampler fs;
    fs.mode = Mode::constant;
    fs.constant_value = value;
    fs.validate();
    return fs;
}

void FollowerSampler::validate() const {
    if (mode == Mode::constant) {
        if (constant_value < 0)
            throw Error(ErrorCode::invalid_argument, "follower sampler: constant must be >= 0");
        return;
    }
    if (values.empty())
        throw Error(ErrorCode::invalid_argument, "follower sampler: donor list is empty");
    for (auto v : values)
        if (v < 0) throw Error(ErrorCode::invalid_argument, "follower sampler: negative count");
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
    return splitmix64(base_seed + 0x632be59bd9b4e019ULL * (index + 1));
}

Cascade simulate(const InfectiousRateParams& rate, const KernelParams& k,
                 std::int64_t origin_followers, const FollowerSampler& fs, double horizon,
                 std::uint64_t seed, SimulationStats* stats) {
    check_run(rate, k, fs, horizon);
    if (origin_followers < 0)
        throw Error(ErrorCode::invalid_argument, "simulate: origin follower count must be >= 0");
    std::vector<Event> events{Event{0.0, origin_followers}};
    thin(events, 0.0, rate, k, fs, horizon, seed, stats);
    return Cascade("sim-" + std::to_string(seed), std::move(events));
}

Cascade simulate_continuation(const Cascade& history, double start,
                              const InfectiousRateParams& rate, const KernelParams& k,
                              const FollowerSampler& fs, double horizon, std::uint64_t seed,
                              SimulationStats* stats) {
    check_run(rate, k, fs, horizon);
    if (!(start >= 0.0) || start >= horizon)
        throw Error(ErrorCode::invalid_argument, "simulate: start must lie in [0, horizon)");
    const Cascade kept = history.prefix(start);
    std::vector<Event> events(kept.events().begin(), kept.events().end());
    thin(events, start, rate, k, fs, horizon, seed, stats);
    return Cascade(history.id(), std::move(events));
}

std::vector<Cascade> simulate_batch_serial(std::size_t n, const InfectiousRateParams& rate,
                                           const KernelParams& k, std::int64_t origin_followers,
                                           const FollowerSampler& fs, double horizon,
                                           std::uint64_t base_seed) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "simulate_batch: n must be >= 1");
    std::vector<Cascade> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(
            simulate(rate, k, origin_followers, fs, horizon, derive_seed(base_seed, i)));
    return out;
}

std::vector<Cascade> simulate_batch(std::size_t n, const InfectiousRateParams& rate,
                                    const KernelParams& k, std::int64_t origin_followers,
                                    const FollowerSampler& fs, double horizon,
                                    std::uint64_t base_seed) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "simulate_batch: n must be >= 1");
    check_run(rate, k, fs, horizon);
    std::vector<Cascade> out(n);
    std::exception_ptr failure;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            out[i] = simulate(rate, k, origin_followers, fs, horizon,
                              derive_seed(base_seed, static_cast<std::uint64_t>(i)));
        } catch (...) {
#pragma omp critical(tideh_batch_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

} // namespace tideh
