// Command-line front end: simulate, fit, predict, evaluate, compare.
//
// Durations on the command line are in hours except --step (seconds).
// Failures print {"error": <code>, "message": <text>} to stderr and exit 1.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tideh/baselines.hpp"
#include "tideh/cascade_io.hpp"
#include "tideh/error.hpp"
#include "tideh/estimation.hpp"
#include "tideh/experiment.hpp"
#include "tideh/prediction.hpp"
#include "tideh/simulator.hpp"
#include "tideh/text_format.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tideh;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json number(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

json params_json(const InfectiousRateParams& q) {
    return json{{"p0", q.p0},
                {"r0", q.r0},
                {"phi0_hours", q.phi0 / kSecondsPerHour},
                {"tau_m_hours", number(q.tau_m / kSecondsPerHour)},
                {"Tm_hours", q.Tm / kSecondsPerHour}};
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error(ErrorCode::io, "failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

struct RateFlags {
    double p0{0.001};
    double r0{0.0};
    double phi0_h{0.0};
    double tau_h{kInf};
    double Tm_h{24.0};

    void add(CLI::App* app) {
        app->add_option("--p0", p0, "Infectious rate amplitude");
        app->add_option("--r0", r0, "Relative circadian amplitude");
        app->add_option("--phi0", phi0_h, "Circadian phase (hours)");
        app->add_option("--tau-m", tau_h, "Decay time (hours; inf for none)");
        app->add_option("--Tm", Tm_h, "Oscillation period (hours)");
    }
    [[nodiscard]] InfectiousRateParams params() const {
        InfectiousRateParams q;
        q.p0 = p0;
        q.r0 = r0;
        q.phi0 = hours(phi0_h);
        q.tau_m = hours(tau_h);
        q.Tm = hours(Tm_h);
        q.validate();
        return q;
    }
};

struct KernelFlags {
    KernelParams k;
    void add(CLI::App* app) {
        app->add_option("--c0", k.c0, "Kernel plateau density (1/s)");
        app->add_option("--s0", k.s0, "Kernel plateau cutoff (s)");
        app->add_option("--theta", k.theta, "Kernel tail exponent");
    }
};

// ---- simulate --------------------------------------------------------------

struct SimulateCmd {
    RateFlags rate;
    KernelFlags kernel;
    std::int64_t origin_followers{1000};
    std::int64_t constant_followers{-1};
    std::string donor;
    double horizon_h{168.0};
    std::uint64_t seed{0};
    std::size_t count{1};
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("simulate", "Sample cascades from the model");
        rate.add(app);
        kernel.add(app);
        app->add_option("--origin-followers", origin_followers, "Followers of the origin post");
        auto* c = app->add_option("--followers", constant_followers,
                                  "Constant follower count for every re-share");
        app->add_option("--donor", donor,
                        "Cascade file whose follower counts are resampled for re-shares")
            ->excludes(c);
        app->add_option("--horizon", horizon_h, "Simulated duration (hours)");
        app->add_option("--seed", seed, "Random seed")->required();
        app->add_option("--count", count, "Number of cascades");
        app->add_option("--out", out,
                        "Corpus directory (required when --count > 1; stdout otherwise)");
        app->callback([this] { run(); });
    }

    void run() const {
        FollowerSampler fs_ = FollowerSampler::constant(origin_followers);
        if (!donor.empty()) {
            const Cascade d = load_cascade(donor);
            std::vector<std::int64_t> values;
            for (const auto& e : d.events()) values.push_back(e.followers);
            fs_ = FollowerSampler::empirical(std::move(values), seed);
        } else if (constant_followers >= 0) {
            fs_ = FollowerSampler::constant(constant_followers);
        }
        const auto cascades = simulate_batch(count, rate.params(), kernel.k, origin_followers, fs_,
                                             hours(horizon_h), seed);
        if (count == 1 && out.empty()) {
            write_cascade(std::cout, cascades.front());
        } else {
            if (out.empty()) throw Error(ErrorCode::invalid_argument, "--out is required for --count > 1");
            save_corpus(cascades, out);
            std::cout << json{{"cascades", count}, {"out", out}}.dump() << '\n';
        }
    }
};

// ---- fit -------------------------------------------------------------------

struct FitCmd {
    KernelFlags kernel;
    std::string cascade;
    double T_h{24.0};
    double delta_obs_h{4.0};
    std::string model{"full"};

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("fit", "Estimate the infectious rate from a prefix");
        kernel.add(app);
        app->add_option("--cascade", cascade, "Cascade file")->required();
        app->add_option("--T", T_h, "Observation window (hours)");
        app->add_option("--delta-obs", delta_obs_h, "Estimation bin width (hours)");
        app->add_option("--model", model, "full or constant")
            ->check(CLI::IsMember({"full", "constant"}));
        app->callback([this] { run(); });
    }

    void run() const {
        std::vector<std::string> warnings;
        const Cascade c = load_cascade(cascade, &warnings);
        print_warnings(warnings);
        const double T = hours(T_h);
        json j{{"cascade", c.id()}, {"T_hours", T_h}, {"retweets", c.retweets_until(T)}};
        if (model == "constant") {
            j["params"] = params_json(InfectiousRateParams::constant(fit_constant(c, T, kernel.k)));
        } else {
            const RateProfile profile = rate_profile(c, T, std::min(hours(delta_obs_h), T), kernel.k);
            const FitResult fit = fit_full(profile);
            j["params"] = params_json(fit.params);
            j["residual"] = fit.residual;
            j["converged"] = fit.converged;
            j["iterations"] = fit.iterations;
            json bins = json::array();
            for (const auto& b : profile.bins)
                bins.push_back({{"start_hours", b.start / kSecondsPerHour},
                                {"end_hours", b.end / kSecondsPerHour},
                                {"p_hat", b.p_hat},
                                {"events", b.events},
                                {"usable", b.usable}});
            j["bins"] = bins;
        }
        std::cout << j.dump(2) << '\n';
    }
};

// ---- predict ---------------------------------------------------------------

struct PredictCmd {
    RateFlags rate;
    KernelFlags kernel;
    std::string cascade;
    double T_h{6.0};
    double T_max_h{168.0};
    double step{kDefaultStep};
    double delta_pred_h{4.0};
    double delta_obs_h{4.0};
    bool use_given{false};
    std::string activity_csv;
    std::string forecast_csv;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand(
            "predict", "Forecast future activity; fits the rate on the prefix unless --given-rate");
        rate.add(app);
        kernel.add(app);
        app->add_option("--cascade", cascade, "Cascade file")->required();
        app->add_option("--T", T_h, "Observation window (hours)");
        app->add_option("--T-max", T_max_h, "Forecast horizon (hours)");
        app->add_option("--step", step, "Solver grid step (seconds)");
        app->add_option("--delta-pred", delta_pred_h, "Prediction bin width (hours)");
        app->add_option("--delta-obs", delta_obs_h, "Estimation bin width (hours)");
        app->add_flag("--given-rate", use_given, "Use --p0/--r0/--phi0/--tau-m instead of fitting");
        app->add_option("--activity-csv", activity_csv, "Binned activity output");
        app->add_option("--forecast-csv", forecast_csv, "Expected intensity on the grid");
        app->callback([this] { run(); });
    }

    void run() const {
        std::vector<std::string> warnings;
        const Cascade c = load_cascade(cascade, &warnings);
        print_warnings(warnings);
        const double T = hours(T_h);
        InfectiousRateParams q;
        json j{{"cascade", c.id()}, {"T_hours", T_h}, {"T_max_hours", T_max_h}};
        if (use_given) {
            q = rate.params();
        } else {
            const FitResult fit =
                fit_full(rate_profile(c, T, std::min(hours(delta_obs_h), T), kernel.k));
            q = fit.params;
            j["converged"] = fit.converged;
        }
        const ForecastGrid grid{T, hours(T_max_h), step};
        const Forecast f = solve_volterra(c, q, kernel.k, grid);
        const Activity a = predict_activity(f, hours(delta_pred_h));
        j["params"] = params_json(q);
        j["retweets_at_T"] = c.retweets_until(T);
        j["predicted_final"] = predict_final(c, f);
        if (!activity_csv.empty()) {
            std::ostringstream ss;
            write_activity_csv(ss, a);
            write_text(activity_csv, ss.str());
        }
        if (!forecast_csv.empty()) {
            std::ostringstream ss;
            write_forecast_csv(ss, f);
            write_text(forecast_csv, ss.str());
        }
        std::cout << j.dump(2) << '\n';
    }
};

// ---- evaluate --------------------------------------------------------------

struct EvaluateCmd {
    KernelFlags kernel;
    std::string data_dir;
    std::string method{"tideh_trained"};
    double T_h{6.0};
    double delta_pred_h{4.0};
    double delta_obs_h{4.0};
    double T_max_h{168.0};
    double step{kDefaultStep};
    int folds{5};
    std::int64_t threshold{2000};
    std::optional<std::uint64_t> seed;
    int training_iterations{200};
    double rpp_epsilon{0.1};
    std::string records_csv;
    std::string summary_json_path;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("evaluate", "Run one method over a corpus");
        kernel.add(app);
        app->add_option("--data-dir", data_dir, "Corpus directory (default: $TIDEH_DATA_DIR)");
        app->add_option("--method", method, "Prediction method")
            ->check(CLI::IsMember({"tideh_trained", "tideh_untrained", "hawkes_const", "lr", "lrn",
                                   "rpp", "seismic_final"}));
        app->add_option("--T", T_h, "Observation window (hours)");
        app->add_option("--delta-pred", delta_pred_h, "Prediction bin width (hours)");
        app->add_option("--delta-obs", delta_obs_h, "Estimation bin width (hours)");
        app->add_option("--T-max", T_max_h, "Horizon (hours)");
        app->add_option("--step", step, "Solver grid step (seconds)");
        app->add_option("--folds", folds, "Cross-validation folds");
        app->add_option("--popularity-threshold", threshold, "Minimum re-shares by T_max");
        app->add_option("--seed", seed, "Fold assignment seed (required for trained methods)");
        app->add_option("--training-iterations", training_iterations, "Simplex iteration cap");
        app->add_option("--rpp-epsilon", rpp_epsilon, "RPP reinforcement offset");
        app->add_option("--records-csv", records_csv, "Per-cascade CSV output");
        app->add_option("--summary-json", summary_json_path, "Summary JSON output (default stdout)");
        app->callback([this] { run(); });
    }

    void run() const {
        ExperimentConfig cfg;
        cfg.method = parse_method(method);
        if (is_trained(cfg.method) && !seed)
            throw Error(ErrorCode::invalid_argument, "--seed is required for trained methods");
        cfg.T = hours(T_h);
        cfg.delta_pred = hours(delta_pred_h);
        cfg.delta_obs = hours(delta_obs_h);
        cfg.T_max = hours(T_max_h);
        cfg.step = step;
        cfg.folds = folds;
        cfg.popularity_threshold = threshold;
        cfg.seed = seed.value_or(0);
        cfg.training_iterations = training_iterations;
        cfg.rpp_epsilon = rpp_epsilon;
        cfg.kernel = kernel.k;

        std::string dir = data_dir;
        if (dir.empty())
            if (const char* env = std::getenv("TIDEH_DATA_DIR")) dir = env;
        if (dir.empty())
            throw Error(ErrorCode::invalid_argument, "no corpus: pass --data-dir or set TIDEH_DATA_DIR");
        std::vector<std::string> warnings;
        const auto corpus = load_corpus(dir, &warnings);
        print_warnings(warnings);

        const EvalResult r = run_experiment(cfg, corpus);
        if (!records_csv.empty()) {
            std::ostringstream ss;
            write_records_csv(ss, r);
            write_text(records_csv, ss.str());
        }
        write_text(summary_json_path, summary_json(r));
    }
};

// ---- compare ---------------------------------------------------------------

struct CompareCmd {
    std::vector<std::string> summaries;
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("compare", "Tabulate evaluation summaries");
        app->add_option("summaries", summaries, "Summary JSON files")->required();
        app->add_option("--out", out, "Comparison CSV (default stdout)");
        app->callback([this] { run(); });
    }

    void run() const {
        std::vector<EvalResult> results;
        for (const auto& path : summaries) results.push_back(parse_summary_json(read_text(path)));
        std::ostringstream ss;
        write_comparison_csv(ss, compare_methods(results));
        write_text(out, ss.str());
    }
};

int fail(std::string_view code, const std::string& message) {
    std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-dependent Hawkes cascade model"};
    app.require_subcommand(1);
    SimulateCmd simulate;
    FitCmd fit;
    PredictCmd predict;
    EvaluateCmd evaluate;
    CompareCmd compare;
    simulate.add(app);
    fit.add(app);
    predict.add(app);
    evaluate.add(app);
    compare.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    } catch (const Error& e) {
        return fail(error_code_name(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
