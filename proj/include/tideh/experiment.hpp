#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tideh/baselines.hpp"
#include "tideh/estimation.hpp"
#include "tideh/model.hpp"
#include "tideh/prediction.hpp"

namespace tideh {

enum class Method { tideh_trained, tideh_untrained, hawkes_const, lr, lrn, rpp, seismic_final };

[[nodiscard]] std::string_view method_name(Method m) noexcept;
[[nodiscard]] Method parse_method(std::string_view name);
/// Methods whose parameters are learned on training folds.
[[nodiscard]] bool is_trained(Method m) noexcept;

struct ExperimentConfig {
    Method method{Method::tideh_trained};
    double T{6.0 * kSecondsPerHour};
    double delta_pred{4.0 * kSecondsPerHour};
    double delta_obs{kDefaultObservationWindow};
    double T_max{kDefaultHorizon};
    double step{kDefaultStep};
    int folds{5};
    std::int64_t popularity_threshold{2000};
    std::uint64_t seed{0};
    int training_iterations{200};
    double rpp_epsilon{0.1};
    SeismicParams seismic;
    KernelParams kernel;

    void validate() const;
};

struct CascadeRecord {
    std::string id;
    int fold{-1};           // -1 for methods without training
    bool ok{false};
    std::string reason;     // set when the cascade is excluded
    double eps_a{0.0};      // NaN for final-count-only methods
    std::vector<double> predicted;
    std::vector<double> actual;
    double predicted_final{0.0};
    double actual_final{0.0};
};

struct Aggregates {
    double mean_eps{0.0};
    double median_eps{0.0};
    double mean_final_error{0.0};
    double median_final_error{0.0};
    std::size_t evaluated{0};
    std::size_t excluded{0};

    friend bool operator==(const Aggregates&, const Aggregates&) = default;
};

struct FoldModel {
    int fold{0};
    std::vector<std::string> training_ids;
    std::optional<RateShape> shape;  // tideh_trained
    double training_objective{0.0};
};

struct EvalResult {
    ExperimentConfig config;
    std::size_t corpus_size{0};
    std::size_t below_threshold{0};
    std::vector<CascadeRecord> records;
    std::vector<FoldModel> fold_models;
    Aggregates aggregates;
};

/// Mean and median over the records that were evaluated; eps_a aggregates skip NaN.
[[nodiscard]] Aggregates aggregate(std::span<const CascadeRecord> records);

/// Fold index per cascade: a seeded shuffle dealt round-robin into `folds` groups.
[[nodiscard]] std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed);

/// Throws fold_leak if any training cascade is also in the evaluated set.
void check_fold_hygiene(std::span<const std::string> training_ids,
                        std::span<const std::string> evaluated_ids);

[[nodiscard]] EvalResult run_experiment(const ExperimentConfig& cfg,
                                        std::span<const Cascade> corpus);

void write_records_csv(std::ostream& os, const EvalResult& r);
[[nodiscard]] std::string summary_json(const EvalResult& r);
/// Parses a summary and re-derives its aggregates; throws inconsistent_results on mismatch.
[[nodiscard]] EvalResult parse_summary_json(std::string_view text);

struct ComparisonRow {
    double T{0.0};
    double delta_pred{0.0};
    Method method{Method::tideh_trained};
    Aggregates aggregates;
    double mean_improvement{0.0};    // (other - tideh) / other on mean eps
    double median_improvement{0.0};
    double final_mean_improvement{0.0};
    double final_median_improvement{0.0};
};

struct ComparisonTable {
    std::optional<Method> reference;
    std::vector<ComparisonRow> rows;
};

[[nodiscard]] ComparisonTable compare_methods(std::span<const EvalResult> results);
void write_comparison_csv(std::ostream& os, const ComparisonTable& t);

} // namespace tideh
