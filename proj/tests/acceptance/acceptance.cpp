// Acceptance run: one PASS / FAIL / SKIP line per criterion.
//
//   tideh_acceptance [--known-red N[,N...]]
//
// Exit status is nonzero when a criterion fails that is not listed as known
// red, or when a listed criterion passes (the list is then stale).
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <omp.h>

#include "tideh/baselines.hpp"
#include "tideh/cascade_io.hpp"
#include "tideh/error.hpp"
#include "tideh/estimation.hpp"
#include "tideh/experiment.hpp"
#include "tideh/metrics.hpp"
#include "tideh/model.hpp"
#include "tideh/prediction.hpp"
#include "tideh/simulator.hpp"

using namespace tideh;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status{Status::fail};
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Ground truth of the synthetic parameter-recovery runs.
const InfectiousRateParams kTruth{0.001, 0.424, days(0.125), days(2.0)};
// Recovery runs use a larger origin; at T = 2 d the estimates then spread by
// about 8e-5 in p0 and 0.03 d in phi0.
constexpr std::int64_t kRecoveryOrigin = 4000000;
constexpr std::int64_t kOriginFollowers = 1000000;

// Donor follower counts for re-shares: lognormal, median 150.
std::vector<std::int64_t> donor_followers() {
    std::mt19937_64 rng(20170101);
    std::lognormal_distribution<double> ln(std::log(150.0), 1.4);
    std::vector<std::int64_t> out(5000);
    for (auto& v : out) v = static_cast<std::int64_t>(std::llround(ln(rng)));
    return out;
}

const FollowerSampler& donor() {
    static const FollowerSampler fs = FollowerSampler::empirical(donor_followers(), 3);
    return fs;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Phase differences are taken on the circle of one period.
double phase_offset(double phi, double truth, double Tm) {
    double d = std::fmod(phi - truth, Tm);
    if (d > 0.5 * Tm) d -= Tm;
    if (d <= -0.5 * Tm) d += Tm;
    return d;
}

// ---------------------------------------------------------------------------

Outcome kernel_normalization() {
    const KernelParams k;
    const double mass = kernel_total_mass(k);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lg(-1.0, 6.5);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = std::pow(10.0, lg(rng));
        auto f = [&](double s) { return memory_kernel(s, k); };
        double q = 0.0;
        if (t <= k.s0) {
            q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t, 15, 1e-14);
        } else {
            q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, k.s0, 15, 1e-14);
            // Log-spaced pieces resolve the power-law tail.
            double a = k.s0;
            while (a < t) {
                const double b = std::min(t, a * 4.0);
                q += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
                a = b;
            }
        }
        worst = std::max(worst, std::abs(kernel_integral(t, k) - q) / q);
    }
    const bool ok = std::abs(mass - 0.99924) <= 1e-5 && worst <= 1e-6;
    return {ok ? Status::pass : Status::fail,
            fmt("total mass %.7f (target 0.99924 +- 1e-5); worst relative quadrature gap %.2e "
                "over 100 points (tol 1e-6)",
                mass, worst)};
}

struct Estimates {
    std::vector<double> p0, r0, phi0_days, tau_days;
    std::size_t failed{0};
};

Estimates recover(double T, double delta_obs, std::uint64_t seed) {
    const auto cascades = simulate_batch(100, kTruth, {}, kRecoveryOrigin, donor(), T, seed);
    std::vector<std::optional<InfectiousRateParams>> fits(cascades.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < cascades.size(); ++i) {
        try {
            const auto fit = fit_full(rate_profile(cascades[i], T, delta_obs));
            fits[i] = canonical(fit.params);
        } catch (const Error&) {
        }
    }
    Estimates e;
    for (const auto& f : fits) {
        if (!f) {
            ++e.failed;
            continue;
        }
        e.p0.push_back(f->p0);
        e.r0.push_back(f->r0);
        e.phi0_days.push_back(
            (kTruth.phi0 + phase_offset(f->phi0, kTruth.phi0, f->Tm)) / kSecondsPerDay);
        e.tau_days.push_back(f->tau_m / kSecondsPerDay);
    }
    return e;
}

const Estimates& two_day_estimates() {
    static const Estimates e = recover(days(2), hours(4), 1001);
    return e;
}

Outcome table1_recovery() {
    const auto& e = two_day_estimates();
    if (e.p0.size() < 2) return {Status::fail, "fewer than two successful fits"};
    struct Row {
        const char* name;
        const std::vector<double>* v;
        double truth, band;
    };
    const Row rows[] = {{"p0", &e.p0, 0.001, 0.00027},
                        {"r0", &e.r0, 0.424, 0.207},
                        {"phi0[d]", &e.phi0_days, 0.125, 0.090},
                        {"tau_m[d]", &e.tau_days, 2.0, 1.98}};
    bool ok = e.failed == 0;
    std::string detail;
    for (const auto& r : rows) {
        const double m = mean_of(*r.v);
        ok = ok && std::abs(m - r.truth) <= r.band;
        detail += fmt("%s %.4g+-%.2g (want %.4g+-%.3g); ", r.name, m, sd_of(*r.v), r.truth, r.band);
    }
    detail += fmt("%zu/100 fits failed", e.failed);
    return {ok ? Status::pass : Status::fail, detail};
}

Outcome observation_length() {
    const auto& longer = two_day_estimates();
    const auto shorter = recover(hours(12), hours(2), 1002);
    const double phi_ratio = sd_of(shorter.phi0_days) / sd_of(longer.phi0_days);
    const double tau_ratio = sd_of(shorter.tau_days) / sd_of(longer.tau_days);

    // Amplitude with the shape fixed to the truth, one hour of data.
    const auto cascades = simulate_batch(100, kTruth, {}, kRecoveryOrigin, donor(), hours(1), 1003);
    std::vector<double> amp(cascades.size());
    for (std::size_t i = 0; i < cascades.size(); ++i)
        amp[i] = fit_amplitude(rate_profile(cascades[i], hours(1), hours(1)), shape_of(kTruth));
    const double rel = std::abs(mean_of(amp) - kTruth.p0) / kTruth.p0;
    double per_trial = 0.0;
    for (double a : amp) per_trial += std::abs(a - kTruth.p0) / kTruth.p0;
    per_trial /= static_cast<double>(amp.size());

    const bool ok = phi_ratio >= 2.0 && tau_ratio >= 2.0 && rel < 0.10;
    return {ok ? Status::pass : Status::fail,
            fmt("SD ratio 12h/2d: phi0 %.2f, tau_m %.2f (want >= 2; %zu fits failed at 12h); "
                "p0 from 1h with true shape: mean relative error %.3f (want < 0.10), "
                "per-trial %.3f",
                phi_ratio, tau_ratio, shorter.failed, rel, per_trial)};
}

Outcome volterra_vs_monte_carlo() {
    const KernelParams k;
    const double T = hours(2), T_max = hours(26), width = hours(1);
    const Cascade prefix = simulate(kTruth, k, kOriginFollowers, donor(), T, 4242);
    const auto& pool = donor().values;
    const double d_mean = std::accumulate(pool.begin(), pool.end(), 0.0) /
                          static_cast<double>(pool.size());
    const auto act = predict_activity(ObservedMemory(prefix, {T, T_max, 60.0}, k).solve(kTruth, d_mean),
                                      width);
    const std::size_t bins = act.values.size();

    const int runs = 10000;
    std::vector<std::vector<double>> counts(runs, std::vector<double>(bins, 0.0));
#pragma omp parallel for schedule(dynamic, 16)
    for (int r = 0; r < runs; ++r) {
        const auto c = simulate_continuation(prefix, T, kTruth, k, donor(), T_max,
                                             derive_seed(77, static_cast<std::uint64_t>(r)));
        counts[r] = actual_activity(c, act.edges);
    }
    std::size_t inside = 0;
    double worst_z = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        double m = 0.0, s2 = 0.0;
        for (const auto& row : counts) m += row[b];
        m /= runs;
        for (const auto& row : counts) s2 += (row[b] - m) * (row[b] - m);
        const double se = std::sqrt(s2 / (runs - 1) / runs);
        const double z = std::abs(act.values[b] - m) / se;
        worst_z = std::max(worst_z, z);
        inside += z <= 3.0;
    }
    const double frac = static_cast<double>(inside) / static_cast<double>(bins);
    return {frac >= 0.95 ? Status::pass : Status::fail,
            fmt("%zu/%zu hourly bins within 3 SE of %d continuations (%.1f%%, want >= 95%%); "
                "worst |z| %.2f; prefix R(T)=%lld",
                inside, bins, runs, 100.0 * frac, worst_z,
                static_cast<long long>(prefix.retweets_until(T)))};
}

double rpp_ode(const RppModel& m, double R_T, double T, double t) {
    using State = std::array<double, 1>;
    State x{R_T};
    auto rhs = [&](const State& s, State& dx, double time) { dx[0] = rpp_intensity(m, time, s[0]); };
    namespace ode = boost::numeric::odeint;
    ode::integrate_adaptive(ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<State>()), rhs,
                            x, T, t, (t - T) * 1e-6);
    return x[0];
}

// Reinforced Poisson process on [t_floor, T] by thinning.
std::vector<double> simulate_rpp(const RppModel& m, double T, double t_floor, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> times;
    double t = t_floor;
    for (;;) {
        const double bound = rpp_intensity(m, t, static_cast<double>(times.size()));
        t += std::exponential_distribution<double>(bound)(rng);
        if (t > T) break;
        if (u(rng) * bound <= rpp_intensity(m, t, static_cast<double>(times.size())))
            times.push_back(t);
    }
    return times;
}

Outcome rpp_closed_form() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lc(-2.0, 3.0), g(1.5, 3.5), la(-3.0, -1.0), lt(0.0, 5.0),
        span(0.0, 3.0), R(1.0, 3000.0), eps(0.0, 1.0);
    double worst_ode = 0.0;
    for (int i = 0; i < 50; ++i) {
        const RppModel m{std::pow(10.0, lc(rng)), g(rng), std::pow(10.0, la(rng)), eps(rng)};
        const double T = std::pow(10.0, lt(rng));
        const double t = T * std::pow(10.0, span(rng));
        const double R_T = std::floor(R(rng));
        const double ode = rpp_ode(m, R_T, T, t);
        worst_ode = std::max(worst_ode, std::abs(rpp_predict(m, R_T, T, t) - ode) / ode);
    }

    const double horizon = 20000.0;
    const auto times = simulate_rpp({5.0, 1.8, 0.02, 0.1}, horizon, 1.0, 1);
    std::uniform_real_distribution<double> c(0.5, 20.0), gg(1.6, 3.4), a(0.002, 0.09);
    double worst_grad = 0.0;
    for (int i = 0; i < 50; ++i) {
        const RppModel m{c(rng), gg(rng), a(rng), 0.1};
        const auto grad = rpp_gradient(times, horizon, m);
        for (int j = 0; j < 3; ++j) {
            RppModel up = m, dn = m;
            double* pu = j == 0 ? &up.c : j == 1 ? &up.gamma : &up.alpha;
            double* pd = j == 0 ? &dn.c : j == 1 ? &dn.gamma : &dn.alpha;
            const double h = 1e-6 * *pu;
            *pu += h;
            *pd -= h;
            const double fd = (rpp_log_likelihood(times, horizon, up) -
                               rpp_log_likelihood(times, horizon, dn)) / (2 * h);
            worst_grad = std::max(worst_grad, std::abs(grad[j] - fd) / std::max(std::abs(fd), 1e-3));
        }
    }
    const bool ok = worst_ode <= 1e-3 && worst_grad <= 1e-4;
    return {ok ? Status::pass : Status::fail,
            fmt("closed form vs ODE worst relative %.2e over 50 points (tol 1e-3); gradient vs "
                "central differences worst relative %.2e over 150 components (tol 1e-4); %zu events",
                worst_ode, worst_grad, times.size())};
}

Outcome baseline_sanity() {
    std::mt19937_64 rng(6);
    std::vector<std::string> notes;
    bool ok = true;

    // LR: log R(t) = alpha + log R(T) + noise.
    {
        std::uniform_real_distribution<double> lr(1.0, 7.0);
        std::normal_distribution<double> noise(0.0, 0.4);
        const double alpha = 0.7;
        std::vector<LrRow> rows;
        for (int i = 0; i < 400; ++i) {
            const double R = std::exp(lr(rng));
            rows.push_back({R, 1.0, 1.0, {R * std::exp(alpha + noise(rng))}});
        }
        const std::vector<double> targets{1.0};
        const auto m = lr_fit_rows(rows, 0.5, targets);
        const double se = std::sqrt(m.coefficients[0].sigma2 / static_cast<double>(rows.size()));
        const double z = std::abs(m.coefficients[0].alpha - alpha) / se;
        ok = ok && z <= 3.0;
        notes.push_back(fmt("LR alpha |z| %.2f", z));
    }
    // LR-N: all four coefficients.
    {
        std::uniform_real_distribution<double> lr(1.0, 7.0), ld(4.0, 14.0), l0(3.0, 12.0);
        std::normal_distribution<double> noise(0.0, 0.3);
        const std::array<double, 4> planted{0.4, 0.9, 0.15, -0.05};
        std::vector<LrRow> rows;
        for (int i = 0; i < 400; ++i) {
            const double x1 = lr(rng), x2 = ld(rng), x3 = l0(rng);
            const double y = planted[0] + planted[1] * x1 + planted[2] * x2 + planted[3] * x3 + noise(rng);
            rows.push_back({std::exp(x1), std::exp(x2), std::exp(x3), {std::exp(y)}});
        }
        const std::vector<double> targets{1.0};
        const auto m = lrn_fit_rows(rows, 0.5, targets);
        const auto se = lrn_standard_errors(rows, m, 0);
        const auto& c = m.coefficients[0];
        const std::array<double, 4> got{c.alpha, c.beta_count, c.beta_exposure, c.beta_origin};
        double worst = 0.0;
        for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(got[j] - planted[j]) / se[j]);
        ok = ok && worst <= 3.0;
        notes.push_back(fmt("LR-N worst |z| %.2f", worst));
    }
    // SEISMIC with a zero rate estimate returns the observed count.
    {
        const auto c = simulate(kTruth, {}, 100000, donor(), hours(6), 8);
        const double T = hours(6);
        const auto est = seismic_from_rate(c, T, 0.0);
        const double R_T = static_cast<double>(c.retweets_until(T));
        ok = ok && est.final_count == R_T;
        // No re-shares in the trailing hour before T = 9 h: the rate estimate is zero.
        const Cascade q = c.prefix(hours(5));
        const double from_data = seismic_predict_final(q, hours(9));
        ok = ok && from_data == static_cast<double>(q.retweets_until(hours(9)));
        notes.push_back(fmt("SEISMIC p=0: %.0f vs R(T) %.0f, quiet window %.0f vs %lld",
                            est.final_count, R_T, from_data,
                            static_cast<long long>(q.retweets_until(hours(9)))));
    }
    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    detail += " (tol 3 SE)";
    return {ok ? Status::pass : Status::fail, detail};
}

Outcome method_ordering() {
    const auto corpus = simulate_batch(50, kTruth, {}, kOriginFollowers, donor(), hours(168), 7007);
    ExperimentConfig cfg;
    cfg.T = hours(24);
    cfg.delta_pred = hours(4);
    cfg.popularity_threshold = 0;
    cfg.method = Method::tideh_untrained;
    const auto a = run_experiment(cfg, corpus);
    cfg.method = Method::hawkes_const;
    const auto b = run_experiment(cfg, corpus);
    const bool ok = a.aggregates.median_eps < b.aggregates.median_eps;
    return {ok ? Status::pass : Status::fail,
            fmt("median eps_A: tideh_untrained %.4g (%zu evaluated) vs hawkes_const %.4g "
                "(%zu evaluated); want tideh_untrained lower",
                a.aggregates.median_eps, a.aggregates.evaluated, b.aggregates.median_eps,
                b.aggregates.evaluated)};
}

bool within(double value, double target, double rel) {
    return std::abs(value - target) <= rel * target;
}

Outcome dataset_results() {
    const char* dir = std::getenv("TIDEH_DATA_DIR");
    if (!dir || !*dir) return {Status::skip, "TIDEH_DATA_DIR not set; corpus not available"};
    const auto corpus = load_corpus(dir);
    auto run = [&](Method m, double T) {
        ExperimentConfig cfg;
        cfg.method = m;
        cfg.T = T;
        cfg.seed = 2016;
        return run_experiment(cfg, corpus);
    };
    bool ok = true;
    std::string detail;
    const auto t1 = run(Method::tideh_trained, hours(1));
    const auto t24 = run(Method::tideh_trained, hours(24));
    ok = ok && within(t1.aggregates.median_eps, 8.2, 0.3) && within(t24.aggregates.median_eps, 1.6, 0.3);
    detail += fmt("median eps_A T=1h %.3g (want 8.2+-30%%), T=24h %.3g (want 1.6+-30%%); ",
                  t1.aggregates.median_eps, t24.aggregates.median_eps);

    // Improvement over RPP, averaged over observation times.
    double mean_imp = 0.0, median_imp = 0.0;
    const double Ts[] = {hours(1), hours(6), hours(24)};
    for (double T : Ts) {
        const auto tideh = T == hours(1) ? t1 : T == hours(24) ? t24 : run(Method::tideh_trained, T);
        const auto rpp = run(Method::rpp, T);
        mean_imp += (rpp.aggregates.mean_eps - tideh.aggregates.mean_eps) / rpp.aggregates.mean_eps;
        median_imp +=
            (rpp.aggregates.median_eps - tideh.aggregates.median_eps) / rpp.aggregates.median_eps;
    }
    mean_imp /= 3.0;
    median_imp /= 3.0;
    ok = ok && std::abs(mean_imp - 0.179) <= 0.10 && std::abs(median_imp - 0.217) <= 0.10;
    detail += fmt("improvement over RPP mean %.1f%% median %.1f%% (want 17.9/21.7 +- 10pp); ",
                  100 * mean_imp, 100 * median_imp);

    const auto t6 = run(Method::tideh_trained, hours(6));
    for (Method m : {Method::seismic_final, Method::rpp}) {
        const auto other = run(m, hours(6));
        const double imp = (other.aggregates.median_final_error - t6.aggregates.median_final_error) /
                           other.aggregates.median_final_error;
        ok = ok && std::abs(imp - 0.30) <= 0.10;
        detail += fmt("final-count improvement over %s %.1f%% (want 30 +- 10pp); ",
                      std::string(method_name(m)).c_str(), 100 * imp);
    }
    return {ok ? Status::pass : Status::fail, detail};
}

Outcome determinism_and_hygiene() {
    std::vector<Cascade> corpus;
    for (std::uint64_t i = 0; i < 24; ++i)
        corpus.push_back(simulate(kTruth, {}, 50000 + 5000 * static_cast<std::int64_t>(i), donor(),
                                  hours(48), derive_seed(99, i)));
    bool identical = true, hygiene = true;
    std::vector<std::string> failed;
    const int max_threads = omp_get_max_threads();
    for (Method m : {Method::tideh_trained, Method::tideh_untrained, Method::hawkes_const,
                     Method::lr, Method::lrn, Method::rpp, Method::seismic_final}) {
        ExperimentConfig cfg;
        cfg.method = m;
        cfg.T = hours(6);
        cfg.T_max = hours(48);
        cfg.delta_obs = hours(2);
        cfg.folds = 3;
        cfg.popularity_threshold = 10;
        cfg.seed = 31;
        cfg.training_iterations = 20;
        std::string first;
        for (int threads : {1, std::max(4, max_threads), 1}) {
            omp_set_num_threads(threads);
            const auto r = run_experiment(cfg, corpus);
            std::ostringstream csv;
            write_records_csv(csv, r);
            const std::string out = summary_json(r) + csv.str();
            if (first.empty()) first = out;
            if (out != first) {
                identical = false;
                failed.emplace_back(method_name(m));
            }
            for (const auto& fm : r.fold_models) {
                const std::set<std::string> train(fm.training_ids.begin(), fm.training_ids.end());
                for (const auto& rec : r.records)
                    if (rec.fold == fm.fold && train.count(rec.id)) hygiene = false;
            }
        }
    }
    omp_set_num_threads(max_threads);
    // The guard must fire on a planted leak.
    bool guard = false;
    try {
        const std::vector<std::string> train{"a", "b"}, test{"c", "b"};
        check_fold_hygiene(train, test);
    } catch (const Error& e) {
        guard = e.code() == ErrorCode::fold_leak;
    }
    const bool ok = identical && hygiene && guard;
    std::string detail = fmt("7 methods x 3 runs (1 and %d threads): outputs %s; training and "
                             "held-out sets %s; planted leak %s",
                             std::max(4, max_threads), identical ? "byte-identical" : "DIFFER",
                             hygiene ? "disjoint" : "OVERLAP", guard ? "rejected" : "NOT rejected");
    for (const auto& f : failed) detail += " [" + f + "]";
    return {ok ? Status::pass : Status::fail, detail};
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> known_red;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--known-red" && i + 1 < argc) {
            std::stringstream list(argv[++i]);
            for (std::string item; std::getline(list, item, ',');)
                if (!item.empty()) known_red.insert(std::stoi(item));
        } else {
            std::fprintf(stderr, "usage: %s [--known-red N[,N...]]\n", argv[0]);
            return 2;
        }
    }
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "kernel normalization", kernel_normalization},
        {2, "parameter recovery at T = 2 d", table1_recovery},
        {3, "observation-length degradation", observation_length},
        {4, "Volterra vs Monte Carlo", volterra_vs_monte_carlo},
        {5, "RPP closed form and gradient", rpp_closed_form},
        {6, "baseline sanity", baseline_sanity},
        {7, "method ordering on synthetic corpus", method_ordering},
        {8, "dataset-dependent results", dataset_results},
        {9, "determinism and fold hygiene", determinism_and_hygiene},
    };
    int unexpected = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::skip ? "SKIP" : "FAIL";
        const bool listed = known_red.count(c.id) > 0;
        const char* note = "";
        if (o.status == Status::fail && listed) {
            note = " [known red]";
        } else if (o.status == Status::fail) {
            ++unexpected;
        } else if (o.status == Status::pass && listed) {
            note = " [listed as known red but passed]";
            ++unexpected;
        }
        std::printf("%s [%d] %s: %s (%.1f s)%s\n", tag, c.id, c.name, o.detail.c_str(), secs, note);
        std::fflush(stdout);
    }
    return unexpected == 0 ? 0 : 1;
}
