#include "tideh/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include <Eigen/Dense>

#include "tideh/error.hpp"
#include "tideh/estimation.hpp"

namespace tideh {
namespace {

constexpr std::array<const char*, 4> kLrnColumns{"intercept", "log R(T)", "log D(T)", "log d0"};

bool usable_row(const LrRow& r, bool with_followers) {
    if (!(r.R_T > 0.0)) return false;
    return !with_followers || (r.D_T > 0.0 && r.d0 > 0.0);
}

std::vector<const LrRow*> filter_rows(std::span<const LrRow> rows, std::size_t targets,
                                      bool with_followers, std::size_t& excluded) {
    std::vector<const LrRow*> out;
    excluded = 0;
    for (const auto& r : rows) {
        if (r.R_targets.size() != targets)
            throw Error(ErrorCode::invalid_argument, "lr: row does not cover every target time");
        if (usable_row(r, with_followers))
            out.push_back(&r);
        else
            ++excluded;
    }
    if (excluded > 0)
        std::cerr << "warning: regression excluded " << excluded
                  << " training rows with zero features\n";
    return out;
}

Eigen::MatrixXd design(const std::vector<const LrRow*>& rows) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        x(r, 0) = 1.0;
        x(r, 1) = std::log(rows[i]->R_T);
        x(r, 2) = std::log(rows[i]->D_T);
        x(r, 3) = std::log(rows[i]->d0);
    }
    return x;
}

void check_rank(const Eigen::MatrixXd& x) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> full(x);
    full.setThreshold(1e-10);
    if (full.rank() == x.cols()) return;
    // Name every column that adds nothing to the span of the columns before it.
    std::string names;
    Eigen::Index rank = 0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.leftCols(j + 1));
        qr.setThreshold(1e-10);
        if (qr.rank() == rank) {
            if (!names.empty()) names += ", ";
            names += kLrnColumns[static_cast<std::size_t>(j)];
        }
        rank = qr.rank();
    }
    throw Error(ErrorCode::rank_deficient,
                "lrn_fit: design matrix is rank deficient; collinear columns: " + names);
}

double log1mexp_neg(double a) { return -std::expm1(-a); }  // 1 - e^{-a}

double reinforcement(double count, double alpha, double eps) {
    return eps + log1mexp_neg(alpha * (count + 1.0)) / log1mexp_neg(alpha);
}

double reinforcement_dalpha(double count, double alpha) {
    const double n = count + 1.0;
    const double num = log1mexp_neg(alpha * n);
    const double den = log1mexp_neg(alpha);
    return (n * std::exp(-alpha * n) * den - num * std::exp(-alpha)) / (den * den);
}

// \int_a^b t^-gamma dt and its derivative in gamma.
double power_integral(double a, double b, double gamma) {
    return (std::pow(a, 1.0 - gamma) - std::pow(b, 1.0 - gamma)) / (gamma - 1.0);
}

double power_integral_dgamma(double a, double b, double gamma) {
    const double pa = std::pow(a, 1.0 - gamma), pb = std::pow(b, 1.0 - gamma);
    const double g1 = gamma - 1.0;
    return ((-std::log(a) * pa + std::log(b) * pb) * g1 - (pa - pb)) / (g1 * g1);
}

struct RppTerms {
    double sum_log_t{0.0};
    double sum_log_r{0.0};
    double sum_dr_over_r{0.0};
    double exposure{0.0};    // sum over segments of r * J
    double exposure_dgamma{0.0};
    double exposure_dalpha{0.0};
};

RppTerms rpp_terms(std::span<const double> times, double T, double gamma, double alpha, double eps,
                   double t_floor) {
    RppTerms out;
    double prev = t_floor;
    for (std::size_t i = 0; i <= times.size(); ++i) {
        const double count = static_cast<double>(i);
        const double end = i < times.size() ? times[i] : T;
        const double r = reinforcement(count, alpha, eps);
        const double dr = reinforcement_dalpha(count, alpha);
        if (end > prev) {
            const double j = power_integral(prev, end, gamma);
            out.exposure += r * j;
            out.exposure_dgamma += r * power_integral_dgamma(prev, end, gamma);
            out.exposure_dalpha += dr * j;
        }
        if (i < times.size()) {
            out.sum_log_t += std::log(times[i]);
            out.sum_log_r += std::log(r);
            out.sum_dr_over_r += dr / r;
            prev = std::max(prev, times[i]);
        }
    }
    return out;
}

void check_rpp_params(const RppModel& m) {
    if (!(m.c > 0.0) || !(m.gamma > 1.0) || !(m.alpha > 0.0) || !(m.epsilon >= 0.0))
        throw Error(ErrorCode::invalid_argument,
                    "rpp: need c > 0, gamma > 1, alpha > 0 and epsilon >= 0");
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

} // namespace

const LrCoefficients& LrModel::at(double t) const {
    for (std::size_t i = 0; i < target_times.size(); ++i)
        if (std::abs(target_times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t)))
            return coefficients[i];
    throw Error(ErrorCode::not_fitted,
                "regression has no coefficients for target time " + std::to_string(t));
}

double cumulative_followers(const Cascade& c, double T) {
    double sum = 0.0;
    for (const Event& e : c.events().first(c.count_before(T))) sum += static_cast<double>(e.followers);
    return sum;
}

LrRow lr_row(const Cascade& c, double T, std::span<const double> target_times) {
    LrRow row;
    row.R_T = static_cast<double>(c.retweets_until(T));
    row.D_T = cumulative_followers(c, T);
    row.d0 = static_cast<double>(c.origin().followers);
    for (double t : target_times) row.R_targets.push_back(static_cast<double>(c.retweets_until(t)));
    return row;
}

LrModel lr_fit_rows(std::span<const LrRow> rows, double T, std::span<const double> target_times) {
    LrModel m;
    m.T = T;
    m.target_times.assign(target_times.begin(), target_times.end());
    const auto used = filter_rows(rows, target_times.size(), false, m.rows_excluded);
    m.rows_used = used.size();
    if (used.size() < 2)
        throw Error(ErrorCode::empty_training,
                    "lr_fit: need at least 2 training cascades with R(T) >= 1");
    const double n = static_cast<double>(used.size());
    for (std::size_t k = 0; k < target_times.size(); ++k) {
        double alpha = 0.0;
        for (const auto* r : used) alpha += std::log(r->R_targets[k]) - std::log(r->R_T);
        alpha /= n;
        double sse = 0.0;
        for (const auto* r : used) {
            const double e = std::log(r->R_targets[k]) - std::log(r->R_T) - alpha;
            sse += e * e;
        }
        LrCoefficients c;
        c.alpha = alpha;
        c.sigma2 = sse / n;
        m.coefficients.push_back(c);
    }
    return m;
}

LrModel lr_fit(std::span<const Cascade> training, double T, std::span<const double> target_times) {
    std::vector<LrRow> rows;
    for (const auto& c : training) rows.push_back(lr_row(c, T, target_times));
    return lr_fit_rows(rows, T, target_times);
}

double lr_predict(const LrModel& m, double R_T, double t) {
    if (!(R_T >= 1.0)) throw Error(ErrorCode::invalid_argument, "lr_predict: need R(T) >= 1");
    const LrCoefficients& c = m.at(t);
    return R_T * std::exp(c.alpha + 0.5 * c.sigma2);
}

LrModel lrn_fit_rows(std::span<const LrRow> rows, double T, std::span<const double> target_times) {
    LrModel m;
    m.with_followers = true;
    m.T = T;
    m.target_times.assign(target_times.begin(), target_times.end());
    const auto used = filter_rows(rows, target_times.size(), true, m.rows_excluded);
    m.rows_used = used.size();
    if (used.size() < 5)
        throw Error(ErrorCode::empty_training,
                    "lrn_fit: need at least 5 training cascades with positive features");
    const Eigen::MatrixXd x = design(used);
    check_rank(x);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    const double n = static_cast<double>(used.size());
    for (std::size_t k = 0; k < target_times.size(); ++k) {
        Eigen::VectorXd y(x.rows());
        for (std::size_t i = 0; i < used.size(); ++i)
            y(static_cast<Eigen::Index>(i)) = std::log(used[i]->R_targets[k]);
        const Eigen::VectorXd beta = qr.solve(y);
        LrCoefficients c;
        c.alpha = beta(0);
        c.beta_count = beta(1);
        c.beta_exposure = beta(2);
        c.beta_origin = beta(3);
        c.sigma2 = (y - x * beta).squaredNorm() / n;
        m.coefficients.push_back(c);
    }
    return m;
}

LrModel lrn_fit(std::span<const Cascade> training, double T, std::span<const double> target_times) {
    std::vector<LrRow> rows;
    for (const auto& c : training) rows.push_back(lr_row(c, T, target_times));
    return lrn_fit_rows(rows, T, target_times);
}

double lrn_predict(const LrModel& m, double R_T, double D_T, double d0, double t) {
    if (!(R_T > 0.0) || !(D_T > 0.0) || !(d0 > 0.0))
        throw Error(ErrorCode::invalid_argument, "lrn_predict: features must be positive");
    const LrCoefficients& c = m.at(t);
    return std::pow(R_T, c.beta_count) * std::pow(D_T, c.beta_exposure) *
           std::pow(d0, c.beta_origin) * std::exp(c.alpha + 0.5 * c.sigma2);
}

std::array<double, 4> lrn_standard_errors(std::span<const LrRow> rows, const LrModel& m,
                                          std::size_t index) {
    std::size_t excluded = 0;
    const auto used = filter_rows(rows, m.target_times.size(), true, excluded);
    const Eigen::MatrixXd x = design(used);
    const LrCoefficients& c = m.coefficients.at(index);
    const Eigen::Vector4d beta(c.alpha, c.beta_count, c.beta_exposure, c.beta_origin);
    double sse = 0.0;
    for (std::size_t i = 0; i < used.size(); ++i) {
        const double e = std::log(used[i]->R_targets[index]) -
                         x.row(static_cast<Eigen::Index>(i)).dot(beta);
        sse += e * e;
    }
    const double s2 = sse / (static_cast<double>(used.size()) - 4.0);
    const Eigen::MatrixXd cov = (x.transpose() * x).inverse() * s2;
    return {std::sqrt(cov(0, 0)), std::sqrt(cov(1, 1)), std::sqrt(cov(2, 2)), std::sqrt(cov(3, 3))};
}

std::vector<double> rpp_event_times(const Cascade& c, double T, double t_floor) {
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(c.retweets_until(T));
    for (std::size_t i = 1; i <= n; ++i) out.push_back(std::max(c.events()[i].time, t_floor));
    return out;
}

double rpp_log_likelihood(std::span<const double> times, double T, const RppModel& m,
                          double t_floor) {
    check_rpp_params(m);
    const RppTerms s = rpp_terms(times, T, m.gamma, m.alpha, m.epsilon, t_floor);
    const double n = static_cast<double>(times.size());
    return n * std::log(m.c) - m.gamma * s.sum_log_t + s.sum_log_r - m.c * s.exposure;
}

std::array<double, 3> rpp_gradient(std::span<const double> times, double T, const RppModel& m,
                                   double t_floor) {
    check_rpp_params(m);
    const RppTerms s = rpp_terms(times, T, m.gamma, m.alpha, m.epsilon, t_floor);
    const double n = static_cast<double>(times.size());
    return {n / m.c - s.exposure, -s.sum_log_t - m.c * s.exposure_dgamma,
            s.sum_dr_over_r - m.c * s.exposure_dalpha};
}

RppModel rpp_fit_times(std::span<const double> times, double T, const RppOptions& opts) {
    if (times.empty())
        throw Error(ErrorCode::invalid_argument, "rpp_fit: need at least one retweet before T");
    if (!(T > opts.t_floor))
        throw Error(ErrorCode::invalid_argument, "rpp_fit: T must exceed the time floor");

    RppModel m;
    m.epsilon = opts.epsilon;
    m.gamma = 2.0;
    m.alpha = 0.01;
    const double n = static_cast<double>(times.size());
    auto profile_c = [&](RppModel& mm) {
        mm.c = n / rpp_terms(times, T, mm.gamma, mm.alpha, mm.epsilon, opts.t_floor).exposure;
    };
    profile_c(m);
    m.log_likelihood = rpp_log_likelihood(times, T, m, opts.t_floor);

    double lr = opts.learning_rate;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const auto g = rpp_gradient(times, T, m, opts.t_floor);
        RppModel next = m;
        next.gamma = std::clamp(m.gamma + lr * g[1], kRppGammaMin, kRppGammaMax);
        next.alpha = std::clamp(m.alpha + lr * g[2], kRppAlphaMin, kRppAlphaMax);
        profile_c(next);
        next.log_likelihood = rpp_log_likelihood(times, T, next, opts.t_floor);
        if (!(next.log_likelihood >= m.log_likelihood)) {
            lr *= 0.5;
            if (lr < 1e-30) {
                m.converged = true;
                break;
            }
            continue;
        }
        const double change = std::max(std::abs(next.gamma - m.gamma) / m.gamma,
                                        std::abs(next.alpha - m.alpha) / m.alpha);
        m = next;
        lr = std::min(opts.learning_rate, 2.0 * lr);
        if (change < opts.relative_tolerance) {
            m.converged = true;
            break;
        }
    }
    m.iterations = it;
    return m;
}

RppModel rpp_fit(const Cascade& c, double T, const RppOptions& opts) {
    if (c.retweets_until(T) < 1)
        throw Error(ErrorCode::invalid_argument, "rpp_fit: need R(T) >= 1");
    return rpp_fit_times(rpp_event_times(c, T, opts.t_floor), T, opts);
}

double rpp_intensity(const RppModel& m, double t, double count) {
    return m.c * std::pow(t, -m.gamma) * reinforcement(count, m.alpha, m.epsilon);
}

double rpp_predict(const RppModel& m, double R_T, double T, double t) {
    check_rpp_params(m);
    if (!(t >= T) || !(T > 0.0))
        throw Error(ErrorCode::invalid_argument, "rpp_predict: need 0 < T <= t");
    const double a = m.alpha;
    const double one_minus_ea = log1mexp_neg(a);
    const double eps_excess = m.epsilon * one_minus_ea;  // eps_tilde - 1
    const double log_eps_tilde = std::log1p(eps_excess);
    const double aging = (std::pow(T, 1.0 - m.gamma) - std::pow(t, 1.0 - m.gamma)) / (1.0 - m.gamma);
    // eps_tilde - e^{-a (R + 1)} = (eps_tilde - 1) + (1 - e^{-a (R + 1)})
    const double x = (1.0 + eps_excess) * m.c * a * aging / one_minus_ea - (R_T + 1.0) * a -
                     std::log(eps_excess + log1mexp_neg(a * (R_T + 1.0)));
    // log(1 + e^x) - x = softplus(-x)
    return (softplus(-x) - log_eps_tilde - a) / a;
}

SeismicEstimate seismic_from_rate(const Cascade& c, double T, double p_hat,
                                  const SeismicParams& sp, const KernelParams& k) {
    SeismicEstimate out;
    out.p_hat = p_hat;
    for (const Event& e : c.events().first(c.count_before(T)))
        out.remaining_exposure +=
            static_cast<double>(e.followers) * (1.0 - kernel_integral(T - e.time, k));
    if (sp.beta_T * p_hat >= 1.0)
        throw Error(ErrorCode::supercritical,
                    "seismic: beta_T * p_hat(T) = " + std::to_string(sp.beta_T * p_hat) +
                        " >= 1, final size is unbounded");
    out.final_count = static_cast<double>(c.retweets_until(T)) +
                      sp.alpha_T * p_hat * out.remaining_exposure / (1.0 - sp.beta_T * p_hat);
    return out;
}

double seismic_predict_final(const Cascade& c, double T, const SeismicParams& sp,
                             const KernelParams& k) {
    const double start = std::max(0.0, T - sp.rate_window);
    const double p_hat = windowed_mle(c, start, T, k);
    return seismic_from_rate(c, T, p_hat, sp, k).final_count;
}

} // namespace tideh
