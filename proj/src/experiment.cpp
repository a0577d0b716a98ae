#include "tideh/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <json.hpp>

#include "tideh/error.hpp"
#include "tideh/metrics.hpp"
#include "tideh/text_format.hpp"

namespace tideh {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kMedianConvention =
    "even counts average the two middle order statistics";

struct TrainedModel {
    std::optional<RateShape> shape;
    std::optional<LrModel> regression;
};

std::vector<double> finite_values(std::span<const CascadeRecord> records, bool eps) {
    std::vector<double> out;
    for (const auto& r : records) {
        if (!r.ok) continue;
        const double v = eps ? r.eps_a : std::abs(r.predicted_final - r.actual_final);
        if (!std::isnan(v)) out.push_back(v);
    }
    return out;
}

void fill_tideh(CascadeRecord& rec, const Cascade& c, const ExperimentConfig& cfg,
                const InfectiousRateParams& rate) {
    const ForecastGrid grid{cfg.T, cfg.T_max, cfg.step};
    const Forecast f = ObservedMemory(c, grid, cfg.kernel).solve(rate);
    rec.predicted = predict_activity(f, cfg.delta_pred).values;
    rec.predicted_final = predict_final(c, f);
}

// Differences a cumulative-count predictor over the bin edges.
template <typename CumulativeFn>
void fill_cumulative(CascadeRecord& rec, std::span<const double> edges, double R_T,
                     CumulativeFn&& cumulative) {
    double prev = R_T;
    for (std::size_t k = 1; k < edges.size(); ++k) {
        const double now = cumulative(edges[k]);
        rec.predicted.push_back(now - prev);
        prev = now;
    }
    rec.predicted_final = prev;
}

CascadeRecord evaluate_one(const Cascade& c, const ExperimentConfig& cfg,
                           std::span<const double> edges, const TrainedModel& model, int fold) {
    CascadeRecord rec;
    rec.id = c.id();
    rec.fold = fold;
    rec.actual = actual_activity(c, edges);
    rec.actual_final = static_cast<double>(c.retweets_until(cfg.T_max));
    rec.eps_a = kNaN;
    const double window = std::min(cfg.delta_obs, cfg.T);
    const double R_T = static_cast<double>(c.retweets_until(cfg.T));

    try {
        switch (cfg.method) {
        case Method::tideh_untrained: {
            const FitResult fit = fit_full(rate_profile(c, cfg.T, window, cfg.kernel));
            if (!fit.converged) throw Error(ErrorCode::objective_failure, "non_convergent fit");
            fill_tideh(rec, c, cfg, fit.params);
            break;
        }
        case Method::tideh_trained: {
            const RateShape& shape = model.shape.value();
            const double p0 = fit_amplitude(rate_profile(c, cfg.T, window, cfg.kernel), shape);
            fill_tideh(rec, c, cfg, with_amplitude(shape, p0));
            break;
        }
        case Method::hawkes_const:
            fill_tideh(rec, c, cfg,
                       InfectiousRateParams::constant(fit_constant(c, cfg.T, cfg.kernel)));
            break;
        case Method::lr:
            fill_cumulative(rec, edges, R_T,
                            [&](double t) { return lr_predict(*model.regression, R_T, t); });
            break;
        case Method::lrn: {
            const double D_T = cumulative_followers(c, cfg.T);
            const auto d0 = static_cast<double>(c.origin().followers);
            fill_cumulative(rec, edges, R_T, [&](double t) {
                return lrn_predict(*model.regression, R_T, D_T, d0, t);
            });
            break;
        }
        case Method::rpp: {
            RppOptions opts;
            opts.epsilon = cfg.rpp_epsilon;
            const RppModel m = rpp_fit(c, cfg.T, opts);
            if (!m.converged) throw Error(ErrorCode::objective_failure, "non_convergent fit");
            fill_cumulative(rec, edges, R_T,
                            [&](double t) { return rpp_predict(m, R_T, cfg.T, t); });
            break;
        }
        case Method::seismic_final:
            rec.predicted_final = seismic_predict_final(c, cfg.T, cfg.seismic, cfg.kernel);
            break;
        }
        if (!rec.predicted.empty())
            rec.eps_a = error_per_hour(rec.predicted, rec.actual, cfg.T, cfg.T_max);
        if (!std::isfinite(rec.predicted_final) ||
            (!std::isnan(rec.eps_a) && !std::isfinite(rec.eps_a)))
            throw Error(ErrorCode::non_finite, "prediction is not finite");
        rec.ok = true;
    } catch (const Error& e) {
        rec.ok = false;
        rec.reason = std::string(error_code_name(e.code())) + ": " + e.what();
        rec.predicted.clear();
        rec.predicted_final = kNaN;
        rec.eps_a = kNaN;
    }
    return rec;
}

TrainedModel train(const ExperimentConfig& cfg, std::span<const Cascade> training,
                   std::span<const double> edges, FoldModel& fm) {
    TrainedModel model;
    const std::vector<double> targets(edges.begin() + 1, edges.end());
    switch (cfg.method) {
    case Method::tideh_trained: {
        TrainingOptions opts;
        opts.delta_obs = cfg.delta_obs;
        opts.step = cfg.step;
        opts.max_iterations = cfg.training_iterations;
        const TrainingResult tr =
            train_shape(training, cfg.T, cfg.delta_pred, cfg.T_max, opts, cfg.kernel);
        model.shape = tr.shape;
        fm.shape = tr.shape;
        fm.training_objective = tr.objective;
        break;
    }
    case Method::lr: model.regression = lr_fit(training, cfg.T, targets); break;
    case Method::lrn: model.regression = lrn_fit(training, cfg.T, targets); break;
    default: break;
    }
    return model;
}

void evaluate_indices(const std::vector<std::size_t>& indices, std::span<const Cascade> corpus,
                      const ExperimentConfig& cfg, std::span<const double> edges,
                      const TrainedModel& model, int fold, std::vector<CascadeRecord>& out) {
    const auto n = static_cast<std::ptrdiff_t>(indices.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::size_t idx = indices[static_cast<std::size_t>(i)];
        out[idx] = evaluate_one(corpus[idx], cfg, edges, model, fold);
    }
}

json number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double number_of(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same(const Aggregates& a, const Aggregates& b) {
    return same(a.mean_eps, b.mean_eps) && same(a.median_eps, b.median_eps) &&
           same(a.mean_final_error, b.mean_final_error) &&
           same(a.median_final_error, b.median_final_error) && a.evaluated == b.evaluated &&
           a.excluded == b.excluded;
}

json config_json(const ExperimentConfig& c) {
    return json{{"method", method_name(c.method)},
                {"T", c.T},
                {"delta_pred", c.delta_pred},
                {"delta_obs", c.delta_obs},
                {"T_max", c.T_max},
                {"step", c.step},
                {"folds", c.folds},
                {"popularity_threshold", c.popularity_threshold},
                {"seed", c.seed},
                {"training_iterations", c.training_iterations},
                {"rpp_epsilon", c.rpp_epsilon},
                {"seismic",
                 {{"alpha_T", c.seismic.alpha_T},
                  {"beta_T", c.seismic.beta_T},
                  {"rate_window", c.seismic.rate_window}}},
                {"kernel", {{"c0", c.kernel.c0}, {"s0", c.kernel.s0}, {"theta", c.kernel.theta}}}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.method = parse_method(j.at("method").get<std::string>());
    c.T = j.at("T").get<double>();
    c.delta_pred = j.at("delta_pred").get<double>();
    c.delta_obs = j.at("delta_obs").get<double>();
    c.T_max = j.at("T_max").get<double>();
    c.step = j.at("step").get<double>();
    c.folds = j.at("folds").get<int>();
    c.popularity_threshold = j.at("popularity_threshold").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.training_iterations = j.at("training_iterations").get<int>();
    c.rpp_epsilon = j.at("rpp_epsilon").get<double>();
    c.seismic.alpha_T = j.at("seismic").at("alpha_T").get<double>();
    c.seismic.beta_T = j.at("seismic").at("beta_T").get<double>();
    c.seismic.rate_window = j.at("seismic").at("rate_window").get<double>();
    c.kernel.c0 = j.at("kernel").at("c0").get<double>();
    c.kernel.s0 = j.at("kernel").at("s0").get<double>();
    c.kernel.theta = j.at("kernel").at("theta").get<double>();
    return c;
}

json aggregates_json(const Aggregates& a) {
    return json{{"mean_eps_a", number(a.mean_eps)},
                {"median_eps_a", number(a.median_eps)},
                {"mean_final_error", number(a.mean_final_error)},
                {"median_final_error", number(a.median_final_error)},
                {"evaluated", a.evaluated},
                {"excluded", a.excluded}};
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += format_double(v[i]);
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

double improvement(double other, double reference) {
    if (std::isnan(other) || std::isnan(reference)) return kNaN;
    if (other == reference) return 0.0;
    return (other - reference) / other;
}

} // namespace

std::string_view method_name(Method m) noexcept {
    switch (m) {
    case Method::tideh_trained: return "tideh_trained";
    case Method::tideh_untrained: return "tideh_untrained";
    case Method::hawkes_const: return "hawkes_const";
    case Method::lr: return "lr";
    case Method::lrn: return "lrn";
    case Method::rpp: return "rpp";
    case Method::seismic_final: return "seismic_final";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::tideh_trained, Method::tideh_untrained, Method::hawkes_const,
                     Method::lr, Method::lrn, Method::rpp, Method::seismic_final})
        if (method_name(m) == name) return m;
    throw Error(ErrorCode::invalid_argument, "unknown method '" + std::string(name) + "'");
}

bool is_trained(Method m) noexcept {
    return m == Method::tideh_trained || m == Method::lr || m == Method::lrn;
}

void ExperimentConfig::validate() const {
    if (!(T > 0.0) || !(T < T_max))
        throw Error(ErrorCode::invalid_argument, "experiment: need 0 < T < T_max");
    if (!(delta_pred > 0.0))
        throw Error(ErrorCode::invalid_argument, "experiment: delta_pred must be positive");
    if (!(delta_obs > 0.0))
        throw Error(ErrorCode::invalid_argument, "experiment: delta_obs must be positive");
    if (is_trained(method) && folds < 2)
        throw Error(ErrorCode::invalid_argument, "experiment: trained methods need folds >= 2");
    ForecastGrid{T, T_max, step}.validate();
    kernel.validate();
}

Aggregates aggregate(std::span<const CascadeRecord> records) {
    Aggregates a;
    for (const auto& r : records) (r.ok ? a.evaluated : a.excluded)++;
    const auto eps = finite_values(records, true);
    const auto fin = finite_values(records, false);
    a.mean_eps = mean(eps);
    a.median_eps = median(eps);
    a.mean_final_error = mean(fin);
    a.median_final_error = median(fin);
    return a;
}

std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed) {
    if (folds < 1) throw Error(ErrorCode::invalid_argument, "assign_folds: folds must be >= 1");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    // Fisher-Yates with an explicit modulus draw so the split is the same on every platform.
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    std::vector<int> fold(n);
    for (std::size_t pos = 0; pos < n; ++pos)
        fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    return fold;
}

void check_fold_hygiene(std::span<const std::string> training_ids,
                        std::span<const std::string> evaluated_ids) {
    const std::set<std::string> train(training_ids.begin(), training_ids.end());
    for (const auto& id : evaluated_ids)
        if (train.count(id))
            throw Error(ErrorCode::fold_leak,
                        "cascade '" + id + "' is in both the training and evaluation sets");
}

EvalResult run_experiment(const ExperimentConfig& cfg, std::span<const Cascade> corpus_in) {
    cfg.validate();
    EvalResult result;
    result.config = cfg;
    result.corpus_size = corpus_in.size();

    std::vector<Cascade> corpus;
    for (const auto& c : corpus_in) {
        if (c.retweets_until(cfg.T_max) >= cfg.popularity_threshold)
            corpus.push_back(c);
        else
            ++result.below_threshold;
    }
    const auto edges = prediction_edges(cfg.T, cfg.T_max, cfg.delta_pred);
    result.records.resize(corpus.size());

    if (!is_trained(cfg.method)) {
        std::vector<std::size_t> all(corpus.size());
        std::iota(all.begin(), all.end(), 0);
        evaluate_indices(all, corpus, cfg, edges, TrainedModel{}, -1, result.records);
    } else {
        const auto fold_of = assign_folds(corpus.size(), cfg.folds, cfg.seed);
        for (int f = 0; f < cfg.folds; ++f) {
            std::vector<Cascade> training;
            std::vector<std::string> training_ids, test_ids;
            std::vector<std::size_t> test;
            for (std::size_t i = 0; i < corpus.size(); ++i) {
                if (fold_of[i] == f) {
                    test.push_back(i);
                    test_ids.push_back(corpus[i].id());
                } else {
                    training.push_back(corpus[i]);
                    training_ids.push_back(corpus[i].id());
                }
            }
            check_fold_hygiene(training_ids, test_ids);
            FoldModel fm;
            fm.fold = f;
            fm.training_ids = training_ids;
            try {
                const TrainedModel model = train(cfg, training, edges, fm);
                evaluate_indices(test, corpus, cfg, edges, model, f, result.records);
            } catch (const Error& e) {
                for (std::size_t i : test) {
                    CascadeRecord& rec = result.records[i];
                    rec.id = corpus[i].id();
                    rec.fold = f;
                    rec.ok = false;
                    rec.reason = std::string("training_failed: ") +
                                 std::string(error_code_name(e.code())) + ": " + e.what();
                    rec.actual = actual_activity(corpus[i], edges);
                    rec.actual_final = static_cast<double>(corpus[i].retweets_until(cfg.T_max));
                    rec.eps_a = kNaN;
                    rec.predicted_final = kNaN;
                }
            }
            result.fold_models.push_back(std::move(fm));
        }
    }
    result.aggregates = aggregate(result.records);
    return result;
}

void write_records_csv(std::ostream& os, const EvalResult& r) {
    os << "cascade_id,fold,status,eps_a,predicted_final,actual_final,predicted_activity,"
          "actual_activity,reason\n";
    for (const auto& rec : r.records)
        os << csv_field(rec.id) << ',' << rec.fold << ',' << (rec.ok ? "ok" : "excluded") << ','
           << format_double(rec.eps_a) << ',' << format_double(rec.predicted_final) << ','
           << format_double(rec.actual_final) << ',' << join(rec.predicted) << ','
           << join(rec.actual) << ',' << csv_field(rec.reason) << '\n';
}

std::string summary_json(const EvalResult& r) {
    json records = json::array();
    for (const auto& rec : r.records) {
        json pred = json::array(), act = json::array();
        for (double v : rec.predicted) pred.push_back(number(v));
        for (double v : rec.actual) act.push_back(number(v));
        records.push_back({{"id", rec.id},
                           {"fold", rec.fold},
                           {"status", rec.ok ? "ok" : "excluded"},
                           {"reason", rec.reason},
                           {"eps_a", number(rec.eps_a)},
                           {"predicted_final", number(rec.predicted_final)},
                           {"actual_final", number(rec.actual_final)},
                           {"predicted_activity", pred},
                           {"actual_activity", act}});
    }
    json folds = json::array();
    for (const auto& fm : r.fold_models) {
        json f{{"fold", fm.fold}, {"training_ids", fm.training_ids}};
        if (fm.shape) {
            f["shape"] = {{"r0", fm.shape->r0}, {"phi0", fm.shape->phi0}, {"tau_m", fm.shape->tau_m}};
            f["training_objective"] = number(fm.training_objective);
        }
        folds.push_back(f);
    }
    json j{{"schema", 1},
           {"config", config_json(r.config)},
           {"median_convention", kMedianConvention},
           {"corpus", {{"input", r.corpus_size}, {"below_threshold", r.below_threshold}}},
           {"aggregates", aggregates_json(r.aggregates)},
           {"fold_models", folds},
           {"records", records}};
    return j.dump(2) + "\n";
}

EvalResult parse_summary_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, std::string("summary json: ") + e.what());
    }
    try {
        if (j.at("schema").get<int>() != 1)
            throw Error(ErrorCode::parse, "summary json: unsupported schema version");
        EvalResult r;
        r.config = config_from_json(j.at("config"));
        r.corpus_size = j.at("corpus").at("input").get<std::size_t>();
        r.below_threshold = j.at("corpus").at("below_threshold").get<std::size_t>();
        for (const auto& jr : j.at("records")) {
            CascadeRecord rec;
            rec.id = jr.at("id").get<std::string>();
            rec.fold = jr.at("fold").get<int>();
            rec.ok = jr.at("status").get<std::string>() == "ok";
            rec.reason = jr.at("reason").get<std::string>();
            rec.eps_a = number_of(jr.at("eps_a"));
            rec.predicted_final = number_of(jr.at("predicted_final"));
            rec.actual_final = number_of(jr.at("actual_final"));
            for (const auto& v : jr.at("predicted_activity")) rec.predicted.push_back(number_of(v));
            for (const auto& v : jr.at("actual_activity")) rec.actual.push_back(number_of(v));
            r.records.push_back(std::move(rec));
        }
        for (const auto& jf : j.at("fold_models")) {
            FoldModel fm;
            fm.fold = jf.at("fold").get<int>();
            fm.training_ids = jf.at("training_ids").get<std::vector<std::string>>();
            if (jf.contains("shape")) {
                const auto& s = jf.at("shape");
                fm.shape = RateShape{s.at("r0").get<double>(), s.at("phi0").get<double>(),
                                     s.at("tau_m").get<double>()};
                fm.training_objective = number_of(jf.at("training_objective"));
            }
            r.fold_models.push_back(std::move(fm));
        }
        const auto& ja = j.at("aggregates");
        Aggregates stored;
        stored.mean_eps = number_of(ja.at("mean_eps_a"));
        stored.median_eps = number_of(ja.at("median_eps_a"));
        stored.mean_final_error = number_of(ja.at("mean_final_error"));
        stored.median_final_error = number_of(ja.at("median_final_error"));
        stored.evaluated = ja.at("evaluated").get<std::size_t>();
        stored.excluded = ja.at("excluded").get<std::size_t>();
        r.aggregates = aggregate(r.records);
        if (!same(stored, r.aggregates))
            throw Error(ErrorCode::inconsistent_results,
                        "summary json: stored aggregates do not match the per-cascade records");
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, std::string("summary json: ") + e.what());
    }
}

ComparisonTable compare_methods(std::span<const EvalResult> results) {
    if (results.empty()) throw Error(ErrorCode::mismatched_sweeps, "compare: no results");
    const ExperimentConfig& base = results.front().config;
    using Point = std::pair<double, double>;
    std::map<Method, std::map<Point, const EvalResult*>> by_method;
    std::set<Point> points;
    for (const auto& r : results) {
        const auto& c = r.config;
        if (c.T_max != base.T_max || c.delta_obs != base.delta_obs || c.step != base.step ||
            c.popularity_threshold != base.popularity_threshold || c.kernel != base.kernel)
            throw Error(ErrorCode::mismatched_sweeps,
                        "compare: results differ in configuration beyond method, T and delta_pred");
        const Point p{c.T, c.delta_pred};
        if (by_method[c.method].count(p))
            throw Error(ErrorCode::mismatched_sweeps,
                        "compare: duplicate result for " + std::string(method_name(c.method)));
        by_method[c.method][p] = &r;
        points.insert(p);
    }
    for (const auto& [m, pts] : by_method)
        if (pts.size() != points.size())
            throw Error(ErrorCode::mismatched_sweeps,
                        "compare: method " + std::string(method_name(m)) +
                            " does not cover every sweep point");

    ComparisonTable table;
    for (Method ref : {Method::tideh_trained, Method::tideh_untrained})
        if (by_method.count(ref)) {
            table.reference = ref;
            break;
        }
    for (const Point& p : points) {
        const Aggregates* ref = table.reference ? &by_method[*table.reference][p]->aggregates : nullptr;
        for (const auto& [m, pts] : by_method) {
            ComparisonRow row;
            row.T = p.first;
            row.delta_pred = p.second;
            row.method = m;
            row.aggregates = pts.at(p)->aggregates;
            const auto& a = row.aggregates;
            row.mean_improvement = ref ? improvement(a.mean_eps, ref->mean_eps) : kNaN;
            row.median_improvement = ref ? improvement(a.median_eps, ref->median_eps) : kNaN;
            row.final_mean_improvement =
                ref ? improvement(a.mean_final_error, ref->mean_final_error) : kNaN;
            row.final_median_improvement =
                ref ? improvement(a.median_final_error, ref->median_final_error) : kNaN;
            table.rows.push_back(row);
        }
    }
    return table;
}

void write_comparison_csv(std::ostream& os, const ComparisonTable& t) {
    os << "T_hours,delta_pred_hours,method,mean_eps_a,median_eps_a,mean_final_error,"
          "median_final_error,evaluated,excluded,mean_improvement,median_improvement,"
          "final_mean_improvement,final_median_improvement\n";
    for (const auto& r : t.rows)
        os << format_double(r.T / kSecondsPerHour) << ','
           << format_double(r.delta_pred / kSecondsPerHour) << ',' << method_name(r.method) << ','
           << format_double(r.aggregates.mean_eps) << ',' << format_double(r.aggregates.median_eps)
           << ',' << format_double(r.aggregates.mean_final_error) << ','
           << format_double(r.aggregates.median_final_error) << ',' << r.aggregates.evaluated << ','
           << r.aggregates.excluded << ',' << format_double(r.mean_improvement) << ','
           << format_double(r.median_improvement) << ',' << format_double(r.final_mean_improvement)
           << ',' << format_double(r.final_median_improvement) << '\n';
}

} // namespace tideh
