#include "tideh/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "tideh/error.hpp"
#include "tideh/metrics.hpp"
#include "tideh/optimize.hpp"
#include "tideh/prediction.hpp"

namespace tideh {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxAmplitudeCoord = 15.0;   // tanh(15) < 1 in double
constexpr double kMaxDecayCoord = 30.0;       // logistic(+-30) stays inside (0, 1)

struct Exposure {
    std::int64_t events{0};
    double exposure{0.0};
};

Exposure window_exposure(const Cascade& c, double t_st, double t_en, const KernelParams& k) {
    Exposure out;
    out.events = c.retweets_until(t_en) - c.retweets_until(t_st);
    const auto before = c.events().first(c.count_before(t_en));
    for (const Event& e : before) {
        if (e.followers == 0) continue;
        out.exposure += static_cast<double>(e.followers) *
                        (kernel_integral(t_en - e.time, k) - kernel_integral(t_st - e.time, k));
    }
    return out;
}

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Unconstrained coordinates for the shape: r0 = tanh(u), phase angle w, and
// tau_m = min + (max - min) * logistic(v).
struct ShapeCoords {
    double u, w, v;
};

RateShape decode_shape(const ShapeCoords& x, double Tm) {
    const double u = std::clamp(x.u, -kMaxAmplitudeCoord, kMaxAmplitudeCoord);
    const double v = std::clamp(x.v, -kMaxDecayCoord, kMaxDecayCoord);
    RateShape s;
    s.r0 = std::tanh(u);
    s.phi0 = x.w / kTwoPi * Tm;
    s.tau_m = kMinDecayTime + (kMaxDecayTime - kMinDecayTime) * logistic(v);
    return s;
}

ShapeCoords encode_shape(const RateShape& s, double Tm) {
    const double r = std::clamp(s.r0, -0.999999, 0.999999);
    double frac = (s.tau_m - kMinDecayTime) / (kMaxDecayTime - kMinDecayTime);
    frac = std::clamp(frac, 1e-9, 1.0 - 1e-9);
    return {std::atanh(r), kTwoPi * s.phi0 / Tm, std::log(frac / (1.0 - frac))};
}

std::vector<const RateBin*> usable_bins(const RateProfile& profile) {
    std::vector<const RateBin*> out;
    for (const auto& b : profile.bins)
        if (b.usable) out.push_back(&b);
    return out;
}

// Initial amplitude and decay time from a least-squares line through log p_hat.
std::pair<double, double> log_linear_start(const std::vector<const RateBin*>& bins) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double n = static_cast<double>(bins.size());
    for (const auto* b : bins) {
        const double t = b->midpoint(), y = std::log(b->p_hat);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double denom = n * stt - st * st;
    const double slope = denom > 0.0 ? (n * sty - st * sy) / denom : 0.0;
    const double intercept = (sy - slope * st) / n;
    double tau = slope < 0.0 ? -1.0 / slope : 0.9 * kMaxDecayTime;
    tau = std::clamp(tau, 1.05 * kMinDecayTime, 0.95 * kMaxDecayTime);
    return {std::exp(intercept), tau};
}

} // namespace

double windowed_mle(const Cascade& c, double t_st, double t_en, const KernelParams& k) {
    k.validate();
    if (!(t_st >= 0.0) || !(t_en > t_st) || !std::isfinite(t_en))
        throw Error(ErrorCode::invalid_argument, "windowed_mle: need 0 <= t_st < t_en");
    const Exposure w = window_exposure(c, t_st, t_en, k);
    if (w.events == 0) return 0.0;
    if (!(w.exposure > 0.0))
        throw Error(ErrorCode::undefined_rate,
                    "windowed_mle: " + std::to_string(w.events) +
                        " events in a window with zero exposure");
    return static_cast<double>(w.events) / w.exposure;
}

std::size_t RateProfile::usable_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(bins.begin(), bins.end(), [](const RateBin& b) { return b.usable; }));
}

RateProfile rate_profile(const Cascade& c, double T, double delta_obs, const KernelParams& k) {
    k.validate();
    if (!(delta_obs > 0.0) || !std::isfinite(T))
        throw Error(ErrorCode::invalid_argument, "rate_profile: window must be positive");
    if (T < delta_obs * (1.0 - 1e-12))
        throw Error(ErrorCode::no_bins, "rate_profile: observation T=" + std::to_string(T) +
                                            " s is shorter than one window");
    const auto m = static_cast<std::size_t>(std::floor(T / delta_obs * (1.0 + 1e-12)));
    RateProfile profile;
    profile.window = delta_obs;
    profile.T = T;
    profile.bins.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        RateBin b;
        b.index = i;
        b.start = static_cast<double>(i) * delta_obs;
        b.end = static_cast<double>(i + 1) * delta_obs;
        const Exposure w = window_exposure(c, b.start, b.end, k);
        b.events = w.events;
        b.exposure = w.exposure;
        b.usable = w.events > 0 && w.exposure > 0.0;
        b.p_hat = b.usable ? static_cast<double>(w.events) / w.exposure : 0.0;
        profile.bins.push_back(b);
    }
    return profile;
}

RateShape shape_of(const InfectiousRateParams& q) noexcept { return {q.r0, q.phi0, q.tau_m}; }

InfectiousRateParams with_amplitude(const RateShape& s, double p0, double Tm) noexcept {
    InfectiousRateParams q;
    q.p0 = p0;
    q.r0 = s.r0;
    q.phi0 = s.phi0;
    q.tau_m = s.tau_m;
    q.Tm = Tm;
    return q;
}

InfectiousRateParams canonical(InfectiousRateParams q) noexcept {
    if (q.r0 < 0.0) {
        q.r0 = -q.r0;
        q.phi0 += 0.5 * q.Tm;
    }
    q.phi0 = std::fmod(q.phi0, q.Tm);
    if (q.phi0 < 0.0) q.phi0 += q.Tm;
    if (q.phi0 >= q.Tm) q.phi0 = 0.0;
    return q;
}

double rate_residual(const RateProfile& profile, const InfectiousRateParams& q) {
    double sum = 0.0;
    for (const auto& b : profile.bins) {
        if (!b.usable) continue;
        const double d = b.p_hat - infectious_rate(b.midpoint(), q);
        sum += d * d;
    }
    return sum;
}

FitResult fit_full(const RateProfile& profile, const FitOptions& opts) {
    const auto bins = usable_bins(profile);
    if (bins.size() < 4)
        throw Error(ErrorCode::underdetermined,
                    "fit_full: " + std::to_string(bins.size()) +
                        " usable bins for 4 parameters; observe longer or use a smaller window");
    const double Tm = opts.Tm;
    double scale = 0.0;
    for (const auto* b : bins) scale += b->p_hat;
    scale /= static_cast<double>(bins.size());

    // x = (log p0, u, w, v); residuals scaled by the mean estimate.
    auto residuals = [&](std::span<const double> x, std::span<double> r, std::span<double> jac) {
        const double p0 = std::exp(x[0]);
        const double u = std::clamp(x[1], -kMaxAmplitudeCoord, kMaxAmplitudeCoord);
        const double r0 = std::tanh(u);
        const double v = std::clamp(x[3], -kMaxDecayCoord, kMaxDecayCoord);
        const double sig = logistic(v);
        const double tau = kMinDecayTime + (kMaxDecayTime - kMinDecayTime) * sig;
        for (std::size_t i = 0; i < bins.size(); ++i) {
            const double t = bins[i]->midpoint();
            const double arg = kTwoPi * t / Tm + x[2];
            const double decay = std::exp(-t / tau);
            const double osc = 1.0 - r0 * std::sin(arg);
            const double p = p0 * osc * decay;
            r[i] = (bins[i]->p_hat - p) / scale;
            if (!jac.empty()) {
                double* row = jac.data() + 4 * i;
                row[0] = -p / scale;
                row[1] = std::abs(x[1]) > kMaxAmplitudeCoord
                             ? 0.0
                             : p0 * decay * std::sin(arg) * (1.0 - r0 * r0) / scale;
                row[2] = p0 * decay * r0 * std::cos(arg) / scale;
                row[3] = std::abs(x[3]) > kMaxDecayCoord
                             ? 0.0
                             : -p * t / (tau * tau) * (kMaxDecayTime - kMinDecayTime) * sig *
                                   (1.0 - sig) / scale;
            }
        }
    };

    const auto [p0_start, tau_start] = log_linear_start(bins);
    optimize::LmOptions lm;
    lm.max_iterations = opts.max_iterations;

    std::optional<optimize::LmResult> best;
    const int starts = std::max(1, opts.phase_starts);
    for (int j = 0; j < starts; ++j) {
        const ShapeCoords c0 = encode_shape({0.3, 0.0, tau_start}, Tm);
        std::vector<double> x0{std::log(p0_start), c0.u, kTwoPi * j / starts, c0.v};
        auto res = optimize::levenberg_marquardt(residuals, bins.size(), std::move(x0), lm);
        if (!best || res.cost < best->cost) best = std::move(res);
    }

    const RateShape shape = decode_shape({best->x[1], best->x[2], best->x[3]}, Tm);
    FitResult out;
    out.params = canonical(with_amplitude(shape, std::exp(best->x[0]), Tm));
    out.residual = rate_residual(profile, out.params);
    out.converged = best->converged;
    out.iterations = best->iterations;
    return out;
}

double fit_amplitude(const RateProfile& profile, const RateShape& shape, double Tm) {
    const auto bins = usable_bins(profile);
    if (bins.empty())
        throw Error(ErrorCode::underdetermined, "fit_amplitude: profile has no usable bins");
    const InfectiousRateParams unit = with_amplitude(shape, 1.0, Tm);
    double num = 0.0, den = 0.0;
    for (const auto* b : bins) {
        const double g = rate_shape(b->midpoint(), unit);
        num += b->p_hat * g;
        den += g * g;
    }
    if (!(den > 0.0))
        throw Error(ErrorCode::degenerate_shape, "fit_amplitude: shape vanishes on every bin");
    return std::max(0.0, num / den);
}

double fit_constant(const Cascade& c, double T, const KernelParams& k) {
    return windowed_mle(c, 0.0, T, k);
}

namespace {

struct TrainingCase {
    RateProfile profile;
    ObservedMemory memory;
    std::vector<double> actual;
};

std::vector<TrainingCase> prepare_cases(std::span<const Cascade> training, double T,
                                        double delta_pred, double T_max,
                                        const TrainingOptions& opts, const KernelParams& k) {
    const ForecastGrid grid{T, T_max, opts.step};
    grid.validate();
    const auto edges = prediction_edges(T, T_max, delta_pred);
    const double window = std::min(opts.delta_obs, T);
    std::vector<TrainingCase> cases;
    for (const Cascade& c : training) {
        RateProfile profile = rate_profile(c, T, window, k);
        if (profile.usable_count() == 0) continue;
        cases.push_back(TrainingCase{std::move(profile), ObservedMemory(c, grid, k),
                                     actual_activity(c, edges)});
    }
    if (cases.empty())
        throw Error(ErrorCode::empty_training,
                    "train_shape: no training cascade has a usable rate estimate");
    return cases;
}

double case_error(const TrainingCase& tc, const RateShape& shape, double delta_pred,
                  double Tm) {
    const double p0 = fit_amplitude(tc.profile, shape, Tm);
    const Forecast f = tc.memory.solve(with_amplitude(shape, p0, Tm));
    const Activity a = predict_activity(f, delta_pred);
    return error_per_hour(a.values, tc.actual, f.T, f.T_max);
}

double mean_case_error(const std::vector<TrainingCase>& cases, const RateShape& shape,
                       double delta_pred, double Tm) {
    std::vector<double> errors(cases.size());
    const auto n = static_cast<std::ptrdiff_t>(cases.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            errors[i] = case_error(cases[i], shape, delta_pred, Tm);
        } catch (const Error&) {
            errors[i] = std::numeric_limits<double>::infinity();
        }
    }
    return mean(errors);
}

} // namespace

double shape_objective(std::span<const Cascade> training, const RateShape& shape, double T,
                       double delta_pred, double T_max, const TrainingOptions& opts,
                       const KernelParams& k) {
    if (training.empty()) throw Error(ErrorCode::empty_training, "empty training set");
    const auto cases = prepare_cases(training, T, delta_pred, T_max, opts, k);
    return mean_case_error(cases, shape, delta_pred, opts.Tm);
}

TrainingResult train_shape(std::span<const Cascade> training, double T, double delta_pred,
                           double T_max, const TrainingOptions& opts, const KernelParams& k) {
    if (training.empty()) throw Error(ErrorCode::empty_training, "empty training set");
    const auto cases = prepare_cases(training, T, delta_pred, T_max, opts, k);
    const double Tm = opts.Tm;

    std::vector<RateShape> starts = opts.starts;
    if (starts.empty())
        for (int j = 0; j < 3; ++j) starts.push_back({0.2, j * Tm / 3.0, 2.0 * kSecondsPerDay});

    auto objective = [&](std::span<const double> x) {
        return mean_case_error(cases, decode_shape({x[0], x[1], x[2]}, Tm), delta_pred, Tm);
    };

    optimize::NelderMeadOptions nm;
    nm.max_iterations = opts.max_iterations;
    nm.relative_spread = opts.relative_spread;
    nm.initial_step = {0.3, 0.8, 0.8};

    std::optional<optimize::NelderMeadResult> best;
    for (const RateShape& s : starts) {
        const ShapeCoords c = encode_shape(s, Tm);
        std::vector<double> x0{c.u, c.w, c.v};
        if (!std::isfinite(objective(x0))) continue;
        auto res = optimize::nelder_mead(objective, std::move(x0), nm);
        if (!best || res.value < best->value) best = std::move(res);
    }
    if (!best || !std::isfinite(best->value))
        throw Error(ErrorCode::objective_failure,
                    "train_shape: objective could not be evaluated at any start point");

    const RateShape raw = decode_shape({best->x[0], best->x[1], best->x[2]}, Tm);
    const InfectiousRateParams canon = canonical(with_amplitude(raw, 1.0, Tm));
    TrainingResult out;
    out.shape = shape_of(canon);
    out.objective = best->value;
    out.iterations = best->iterations;
    out.converged = best->converged;
    return out;
}

} // namespace tideh
