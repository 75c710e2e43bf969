#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fcrec/config.hpp"
#include "fcrec/engine.hpp"
#include "fcrec/folds.hpp"

namespace fcrec {

// Decision counts over (user, test item) pairs:
// a = irrelevant & not recommended, b = irrelevant & recommended,
// c = relevant & not recommended,   d = relevant & recommended.
struct ConfusionCounts {
    long long a = 0;
    long long b = 0;
    long long c = 0;
    long long d = 0;

    long long total() const { return a + b + c + d; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        a += o.a; b += o.b; c += o.c; d += o.d;
        return *this;
    }
};

// Percentages; a metric with a zero denominator is absent, never NaN.
struct ConfusionMetrics {
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
};

ConfusionMetrics confusion_metrics(const ConfusionCounts& counts);

// Mean absolute error over (predicted, actual) pairs; throws
// std::invalid_argument on an empty list.
double mae(std::span<const std::pair<double, double>> pred_actual);

struct FoldDiagnostics {
    long long test_users = 0;
    long long skipped_users = 0;  // users with no test items this fold
    long long predictions = 0;
    long long user_mean_fallbacks = 0;
    long long global_mean_fallbacks = 0;
    long long pool_fallbacks = 0;
};

struct FoldScore {
    double mae = 0.0;
    std::vector<ConfusionCounts> per_n;  // aligned with config.top_n_list
    FoldDiagnostics diag;
};

// Everything score_fold needs that is measure-independent; built once per
// fold and reused across measures.
struct FoldModel {
    TrainModel model;
    ClusterAssignment clusters;
    int fcm_iterations = 0;
    bool fcm_converged = false;
};

FoldModel build_fold_model(RatingsMatrix train, const ExperimentConfig& config,
                           std::uint64_t fcm_seed);

FoldScore score_fold(const FoldModel& fold_model, std::span<const Rating> test,
                     const ExperimentConfig& config, MeasureId measure);

// Convenience overload fitting the clustering itself (seeded by config.seed).
FoldScore score_fold(const RatingsMatrix& train, std::span<const Rating> test,
                     const ExperimentConfig& config, MeasureId measure);

struct MeasureReport {
    MeasureId id;
    std::vector<FoldScore> folds;
};

// Cross-fold mean of one (measure, N) cell; also used for the
// Top-N-averaged summary row.
struct MeanCell {
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    double mae = 0.0;
};

struct DirectionalNote {
    double nhsm_mae = 0.0;
    double pearson_mae = 0.0;
    bool nhsm_not_worse = false;
};

struct EvaluationReport {
    ExperimentConfig config;
    std::vector<MeasureReport> measures;
    std::vector<int> fcm_iterations_per_fold;
    std::optional<DirectionalNote> directional;  // set when nhsm and pearson both ran

    double mean_mae(std::size_t measure_index) const;
    MeanCell mean_cell(std::size_t measure_index, std::size_t n_index) const;
    MeanCell top_n_averaged(std::size_t measure_index) const;
};

EvaluationReport run_experiment(const RatingsMatrix& matrix, const ExperimentConfig& config);

// Comma-separated tables: per-N cross-fold means per method, then the
// mean-over-N summary block.
void write_report_csv(const EvaluationReport& report, std::ostream& out);

// Structured dump with raw counts per (measure, fold, N) and the full
// protocol settings, so every reported number is attributable.
void write_report_json(const EvaluationReport& report, std::ostream& out);

}  // namespace fcrec
