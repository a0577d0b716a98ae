#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_support.hpp"
#include "tideh/error.hpp"
#include "tideh/estimation.hpp"
#include "tideh/simulator.hpp"

using namespace tideh;
using tideh::testing::make_cascade;

namespace {

const InfectiousRateParams kTrue{0.001, 0.424, days(0.125), days(2.0)};

RateProfile exact_profile(const InfectiousRateParams& q, double T, double window) {
    RateProfile p;
    p.window = window;
    p.T = T;
    const auto m = static_cast<std::size_t>(std::floor(T / window));
    for (std::size_t i = 0; i < m; ++i) {
        RateBin b;
        b.index = i;
        b.start = i * window;
        b.end = (i + 1) * window;
        b.p_hat = infectious_rate(b.midpoint(), q);
        b.events = 1;
        b.exposure = 1.0;
        b.usable = true;
        p.bins.push_back(b);
    }
    return p;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected tideh::Error";
    return ErrorCode::invalid_argument;
}

FollowerSampler donor() {
    return FollowerSampler::empirical(tideh::testing::lognormal_followers(2000, 17), 3);
}

} // namespace

TEST(WindowedMle, SingleExposedOrigin) {
    // The re-share lands on the window end, so it adds no exposure of its own.
    const Cascade c = make_cascade({{0, 100}, {300, 50}});
    const double p = windowed_mle(c, 0.0, 300.0);
    EXPECT_NEAR(p, 1.0 / (100 * kernel_integral(300.0, {})), 1e-15);
    EXPECT_NEAR(p, 1.0 / 19.47, 1e-6);
    EXPECT_NEAR(p, 0.05136, 1e-5);
    EXPECT_DOUBLE_EQ(fit_constant(c, 300.0), p);
}

TEST(WindowedMle, ExposureFormulaMatchesBruteForce) {
    const KernelParams k;
    const Cascade c = make_cascade({{0, 1000}, {100, 20}, {700, 300}, {2000, 5}, {4000, 80}});
    const double t_st = 600.0, t_en = 3600.0;
    double exposure = 0.0;
    for (const auto& e : c.events()) {
        if (e.time >= t_en) continue;
        auto phi = [&](double s) { return memory_kernel(s - e.time, k); };
        const double lo = std::max(t_st, e.time);
        exposure += e.followers * tideh::testing::integrate_pieces(phi, lo, t_en, {e.time + k.s0});
    }
    EXPECT_NEAR(windowed_mle(c, t_st, t_en, k), 2.0 / exposure, 1e-9 * 2.0 / exposure);
}

TEST(WindowedMle, EmptyWindowAndUndefinedRate) {
    const Cascade c = make_cascade({{0, 100}, {10, 5}});
    EXPECT_EQ(windowed_mle(c, 20.0, 500.0), 0.0);
    const Cascade z = make_cascade({{0, 0}, {10, 0}});
    EXPECT_EQ(code_of([&] { (void)windowed_mle(z, 0.0, 100.0); }), ErrorCode::undefined_rate);
    EXPECT_EQ(code_of([&] { (void)windowed_mle(c, 50.0, 50.0); }), ErrorCode::invalid_argument);
}

TEST(RateProfile, BinCountAndTiling) {
    const auto c = simulate(kTrue, {}, 100000, donor(), days(2), 1);
    const auto p = rate_profile(c, days(2), hours(4));
    ASSERT_EQ(p.bins.size(), 12u);
    for (std::size_t i = 0; i < p.bins.size(); ++i) {
        EXPECT_DOUBLE_EQ(p.bins[i].start, i * hours(4));
        EXPECT_DOUBLE_EQ(p.bins[i].end, (i + 1) * hours(4));
        EXPECT_GE(p.bins[i].p_hat, 0.0);
    }
    EXPECT_EQ(rate_profile(c, hours(6), hours(4)).bins.size(), 1u);
    EXPECT_EQ(code_of([&] { (void)rate_profile(c, hours(3), hours(4)); }), ErrorCode::no_bins);
}

TEST(RateProfile, UnusableBinsAreFlagged) {
    const Cascade c = make_cascade({{0, 0}, {100, 0}});
    const auto p = rate_profile(c, 400.0, 200.0);
    ASSERT_EQ(p.bins.size(), 2u);
    EXPECT_FALSE(p.bins[0].usable);
    EXPECT_FALSE(p.bins[1].usable);
    EXPECT_EQ(p.usable_count(), 0u);
}

// Mean of per-cascade constant-rate estimates approaches the true rate.
TEST(WindowedMle, ConsistentOnConstantRateData) {
    const double p = 0.001;
    const auto fs = FollowerSampler::constant(100);
    std::vector<double> rms;
    std::uint64_t seed = 500;
    for (std::size_t size : {4, 64, 1024}) {
        double sq = 0.0;
        for (int rep = 0; rep < 8; ++rep) {
            const auto batch = simulate_batch(size, InfectiousRateParams::constant(p), {}, 100000,
                                              fs, days(2), seed++);
            double sum = 0.0;
            for (const auto& c : batch) sum += fit_constant(c, days(2));
            const double err = sum / size - p;
            sq += err * err;
        }
        rms.push_back(std::sqrt(sq / 8));
    }
    EXPECT_GT(rms[0], rms[1]);
    EXPECT_GT(rms[1], rms[2]);
    EXPECT_LT(rms[2], 0.05 * p);
}

TEST(FitFull, RecoversExactProfile) {
    const auto fit = fit_full(exact_profile(kTrue, days(2), hours(4)));
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.params.p0, kTrue.p0, 1e-4 * kTrue.p0);
    EXPECT_NEAR(fit.params.r0, kTrue.r0, 1e-4 * kTrue.r0);
    EXPECT_NEAR(fit.params.phi0, kTrue.phi0, 1e-4 * kTrue.phi0);
    EXPECT_NEAR(fit.params.tau_m, kTrue.tau_m, 1e-4 * kTrue.tau_m);
    EXPECT_LT(fit.residual, 1e-20);
}

TEST(FitFull, RecoversExactProfileAcrossPhases) {
    for (double phase_h : {0.0, 5.0, 11.0, 17.0, 23.0}) {
        InfectiousRateParams q{0.004, 0.6, hours(phase_h), days(1.5)};
        const auto fit = fit_full(exact_profile(q, days(3), hours(2)));
        EXPECT_NEAR(fit.params.r0, q.r0, 1e-4 * q.r0) << phase_h;
        const double dphi = std::remainder(fit.params.phi0 - q.phi0, days(1));
        EXPECT_LT(std::abs(dphi), 1e-4 * days(1)) << phase_h;
        EXPECT_NEAR(fit.params.tau_m, q.tau_m, 1e-4 * q.tau_m) << phase_h;
    }
}

TEST(FitFull, ResidualNoWorseThanTruthAndInsideBox) {
    const auto batch = simulate_batch(20, kTrue, {}, 100000, donor(), days(2), 31);
    for (const auto& c : batch) {
        const auto profile = rate_profile(c, days(2), hours(4));
        if (profile.usable_count() < 4) continue;
        const auto fit = fit_full(profile);
        EXPECT_LE(fit.residual, rate_residual(profile, kTrue) * (1.0 + 1e-9));
        EXPECT_GE(fit.params.r0, 0.0);
        EXPECT_LT(fit.params.r0, 1.0);
        EXPECT_GE(fit.params.phi0, 0.0);
        EXPECT_LT(fit.params.phi0, fit.params.Tm);
        EXPECT_GE(fit.params.tau_m, kMinDecayTime);
        EXPECT_LE(fit.params.tau_m, kMaxDecayTime);
        EXPECT_GE(fit.residual, 0.0);
    }
}

TEST(FitFull, DeterministicAndUnderdetermined) {
    const auto c = simulate(kTrue, {}, 100000, donor(), days(2), 8);
    const auto profile = rate_profile(c, days(2), hours(4));
    const auto a = fit_full(profile), b = fit_full(profile);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.residual, b.residual);
    EXPECT_EQ(code_of([&] { (void)fit_full(exact_profile(kTrue, hours(12), hours(4))); }),
              ErrorCode::underdetermined);
}

TEST(Canonical, PreservesRateFunction) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> r(-0.95, 0.95), ph(-3e5, 3e5), t(0, 1e6);
    for (int i = 0; i < 500; ++i) {
        const InfectiousRateParams q{0.002, r(rng), ph(rng), days(3)};
        const auto c = canonical(q);
        EXPECT_GE(c.r0, 0.0);
        EXPECT_GE(c.phi0, 0.0);
        EXPECT_LT(c.phi0, c.Tm);
        for (int j = 0; j < 5; ++j) {
            const double s = t(rng);
            EXPECT_NEAR(infectious_rate(s, c), infectious_rate(s, q), 1e-12 * q.p0);
        }
    }
}

TEST(FitAmplitude, ExactAndLocallyOptimal) {
    const auto profile = exact_profile(kTrue, hours(12), hours(1));
    const double p0 = fit_amplitude(profile, shape_of(kTrue));
    EXPECT_NEAR(p0, kTrue.p0, 1e-12 * kTrue.p0);

    const auto c = simulate(kTrue, {}, 100000, donor(), days(1), 12);
    const auto noisy = rate_profile(c, days(1), hours(2));
    const double est = fit_amplitude(noisy, shape_of(kTrue));
    const double base = rate_residual(noisy, with_amplitude(shape_of(kTrue), est));
    for (double f : {0.99, 1.01})
        EXPECT_GE(rate_residual(noisy, with_amplitude(shape_of(kTrue), est * f)), base);
}

TEST(FitAmplitude, ClampAndErrors) {
    auto profile = exact_profile(kTrue, hours(4), hours(1));
    for (auto& b : profile.bins) b.p_hat = -1e-3;
    EXPECT_EQ(fit_amplitude(profile, shape_of(kTrue)), 0.0);

    RateProfile empty;
    EXPECT_EQ(code_of([&] { (void)fit_amplitude(empty, shape_of(kTrue)); }),
              ErrorCode::underdetermined);
    const auto late = exact_profile(kTrue, days(2), hours(4));
    EXPECT_EQ(code_of([&] { (void)fit_amplitude(late, RateShape{0.1, 0.0, 1.0}); }),
              ErrorCode::degenerate_shape);
}

TEST(TrainShape, NoWorseThanTrueShape) {
    const auto batch = simulate_batch(3, kTrue, {}, 100000, donor(), days(3), 71);
    TrainingOptions opts;
    opts.max_iterations = 60;
    const double T = hours(12), dp = hours(4), Tmax = hours(60);
    const auto res = train_shape(batch, T, dp, Tmax, opts);
    const double at_truth = shape_objective(batch, shape_of(kTrue), T, dp, Tmax, opts);
    EXPECT_LE(res.objective, at_truth * 1.001);
    EXPECT_NEAR(shape_objective(batch, res.shape, T, dp, Tmax, opts), res.objective,
                1e-9 * res.objective);
    EXPECT_GE(res.shape.r0, 0.0);
    EXPECT_LT(res.shape.r0, 1.0);
    EXPECT_GE(res.shape.tau_m, kMinDecayTime);
    EXPECT_LE(res.shape.tau_m, kMaxDecayTime);
}

TEST(TrainShape, EmptyTraining) {
    EXPECT_EQ(code_of([] { (void)train_shape({}, hours(6), hours(4), hours(48)); }),
              ErrorCode::empty_training);
}
