#include "tideh/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "tideh/error.hpp"

namespace tideh::optimize {
namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double finite_or_inf(double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

} // namespace

LmResult levenberg_marquardt(const ResidualFn& fn, std::size_t n_residuals,
                             std::vector<double> x0, const LmOptions& opts) {
    const auto n = static_cast<Eigen::Index>(x0.size());
    const auto m = static_cast<Eigen::Index>(n_residuals);
    if (n == 0 || m == 0)
        throw Error(ErrorCode::invalid_argument, "levenberg_marquardt: empty problem");

    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(x0.data(), n);
    Eigen::VectorXd r(m), r_trial(m);
    Matrix jac(m, n);
    std::span<double> no_jac;

    auto eval = [&](const Eigen::VectorXd& at, Eigen::VectorXd& res, bool with_jac) {
        fn(std::span<const double>(at.data(), static_cast<std::size_t>(n)),
           std::span<double>(res.data(), static_cast<std::size_t>(m)),
           with_jac ? std::span<double>(jac.data(), static_cast<std::size_t>(m * n)) : no_jac);
        return finite_or_inf(res.squaredNorm());
    };

    LmResult result;
    double cost = eval(x, r, true);
    if (!std::isfinite(cost))
        throw Error(ErrorCode::non_finite, "levenberg_marquardt: non-finite initial residual");

    double mu = opts.initial_damping;
    double nu = 2.0;
    int it = 0;
    bool converged = false;
    while (it < opts.max_iterations) {
        ++it;
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance || cost == 0.0) {
            converged = true;
            break;
        }
        Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-12 * std::max(jtj.diagonal().maxCoeff(), 1e-300));

        bool stepped = false;
        while (!stepped) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += mu * scale;
            const Eigen::VectorXd delta = a.ldlt().solve(-grad);
            if (!delta.allFinite()) {
                mu *= nu;
                nu *= 2.0;
                if (mu > 1e30) break;
                continue;
            }
            const Eigen::VectorXd x_trial = x + delta;
            const double trial_cost = eval(x_trial, r_trial, false);
            const double predicted = -(delta.dot(grad) * 2.0 + delta.dot(jtj * delta));
            const double actual = cost - trial_cost;
            if (actual > 0.0 && std::isfinite(trial_cost)) {
                const double rho = predicted > 0.0 ? actual / predicted : 1.0;
                mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                nu = 2.0;
                const double rel_cost = actual / std::max(cost, 1e-300);
                const double rel_step = delta.norm() / (x.norm() + opts.step_tolerance);
                x = x_trial;
                cost = eval(x, r, true);
                stepped = true;
                if (rel_cost < opts.cost_tolerance || rel_step < opts.step_tolerance)
                    converged = true;
            } else {
                mu *= nu;
                nu *= 2.0;
                if (mu > 1e30) break;
            }
        }
        if (!stepped) {
            // No decrease possible along any damped direction: a stationary point.
            converged = true;
            break;
        }
        if (converged) break;
    }

    result.x.assign(x.data(), x.data() + n);
    result.cost = cost;
    result.iterations = it;
    result.converged = converged;
    return result;
}

NelderMeadResult nelder_mead(const ObjectiveFn& fn, std::vector<double> x0,
                             const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    if (n == 0) throw Error(ErrorCode::invalid_argument, "nelder_mead: empty parameter vector");
    std::vector<double> step = opts.initial_step;
    if (step.empty()) {
        step.resize(n);
        for (std::size_t i = 0; i < n; ++i) step[i] = 0.1 * std::max(std::abs(x0[i]), 1.0);
    }
    if (step.size() != n)
        throw Error(ErrorCode::invalid_argument, "nelder_mead: initial_step has wrong size");

    auto value = [&](const std::vector<double>& x) { return finite_or_inf(fn(x)); };

    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
    for (std::size_t i = 0; i <= n; ++i) f[i] = value(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (auto i : order) {
            s2.push_back(simplex[i]);
            f2.push_back(f[i]);
        }
        simplex = std::move(s2);
        f = std::move(f2);
    };
    auto along = [&](const std::vector<double>& from, const std::vector<double>& to, double coef) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = from[i] + coef * (to[i] - from[i]);
        return out;
    };

    NelderMeadResult result;
    int it = 0;
    bool converged = false;
    sort_simplex();
    while (it < opts.max_iterations) {
        const double spread = f[n] - f[0];
        if (std::isfinite(spread) && spread <= opts.relative_spread * std::abs(f[0])) {
            converged = true;
            break;
        }
        ++it;
        std::vector<double> centroid(n, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[j][i] / static_cast<double>(n);

        const auto reflected = along(centroid, simplex[n], -opts.reflection);
        const double fr = value(reflected);
        if (fr < f[0]) {
            const auto expanded = along(centroid, simplex[n], -opts.reflection * opts.expansion);
            const double fe = value(expanded);
            if (fe < fr) {
                simplex[n] = expanded;
                f[n] = fe;
            } else {
                simplex[n] = reflected;
                f[n] = fr;
            }
        } else if (fr < f[n - 1]) {
            simplex[n] = reflected;
            f[n] = fr;
        } else {
            const bool outside = fr < f[n];
            const auto contracted = outside
                                        ? along(centroid, reflected, opts.contraction)
                                        : along(centroid, simplex[n], opts.contraction);
            const double fc = value(contracted);
            if (fc < std::min(fr, f[n])) {
                simplex[n] = contracted;
                f[n] = fc;
            } else {
                for (std::size_t j = 1; j <= n; ++j) {
                    simplex[j] = along(simplex[0], simplex[j], opts.shrink);
                    f[j] = value(simplex[j]);
                }
            }
        }
        sort_simplex();
    }

    result.x = simplex[0];
    result.value = f[0];
    result.iterations = it;
    result.converged = converged;
    return result;
}

} // namespace tideh::optimize
