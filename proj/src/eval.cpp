#include "fcrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "fcrec/parallel.hpp"

namespace fcrec {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct UserOutcome {
    double abs_error_sum = 0.0;
    long long predictions = 0;
    long long user_mean_fallbacks = 0;
    long long global_mean_fallbacks = 0;
    long long pool_fallbacks = 0;
    std::vector<ConfusionCounts> per_n;
};

}  // namespace

ConfusionMetrics confusion_metrics(const ConfusionCounts& counts) {
    ConfusionMetrics m;
    const long long total = counts.total();
    if (total > 0)
        m.accuracy = 100.0 * static_cast<double>(counts.a + counts.d) / total;
    if (counts.b + counts.d > 0)
        m.precision = 100.0 * static_cast<double>(counts.d) / (counts.b + counts.d);
    if (counts.c + counts.d > 0)
        m.recall = 100.0 * static_cast<double>(counts.d) / (counts.c + counts.d);
    return m;
}

double mae(std::span<const std::pair<double, double>> pred_actual) {
    if (pred_actual.empty())
        throw std::invalid_argument("mae is undefined for an empty prediction list");
    double sum = 0.0;
    for (const auto& [predicted, actual] : pred_actual)
        sum += std::abs(predicted - actual);
    return sum / pred_actual.size();
}

FoldModel build_fold_model(RatingsMatrix train, const ExperimentConfig& config,
                           std::uint64_t fcm_seed) {
    FoldModel fm;
    fm.model = TrainModel::build(std::move(train));

    FcmParams params;
    params.cluster_count = config.cluster_count;
    params.fuzzifier = config.fuzzifier;
    params.tolerance = config.fcm_tolerance;
    params.max_iterations = config.fcm_max_iterations;
    params.seed = fcm_seed;
    params.threads = config.threads;

    MembershipMatrix membership = fcm_fit(fm.model.train, params);
    fm.clusters = assign_clusters(membership, config.defuzzifier);
    fm.fcm_iterations = membership.iterations;
    fm.fcm_converged = membership.converged;
    return fm;
}

FoldScore score_fold(const FoldModel& fold_model, std::span<const Rating> test,
                     const ExperimentConfig& config, MeasureId measure) {
    const TrainModel& model = fold_model.model;
    const std::size_t n_cells = config.top_n_list.size();

    // test is sorted by (user, item); locate each user's run of entries
    std::vector<std::pair<std::size_t, std::size_t>> user_ranges;
    for (std::size_t i = 0; i < test.size();) {
        std::size_t j = i;
        while (j < test.size() && test[j].user == test[i].user) ++j;
        user_ranges.emplace_back(i, j);
        i = j;
    }

    std::vector<UserOutcome> outcomes(user_ranges.size());
    parallel_for(user_ranges.size(), config.threads, [&](std::size_t ri) {
        auto [begin, end] = user_ranges[ri];
        const int u = test[begin].user;
        UserOutcome& out = outcomes[ri];
        out.per_n.resize(n_cells);

        NeighborList neighbors = select_neighbors(u, fold_model.clusters, measure,
                                                  config.neighbor_count, model,
                                                  config.similarity);
        if (neighbors.pool_fallback) ++out.pool_fallbacks;

        const std::size_t n_test = end - begin;
        std::vector<double> predicted(n_test);
        for (std::size_t t = 0; t < n_test; ++t) {
            const Rating& entry = test[begin + t];
            Prediction p = predict(u, entry.item, neighbors, model);
            predicted[t] = p.value;
            out.abs_error_sum += std::abs(p.value - entry.value);
            ++out.predictions;
            if (p.source == PredictionSource::UserMean) ++out.user_mean_fallbacks;
            if (p.source == PredictionSource::GlobalMean) ++out.global_mean_fallbacks;
        }

        // Rank the user's test items once; Top-N lists are nested prefixes.
        std::vector<std::size_t> order(n_test);
        for (std::size_t t = 0; t < n_test; ++t) order[t] = t;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            if (predicted[x] != predicted[y]) return predicted[x] > predicted[y];
            return test[begin + x].item < test[begin + y].item;
        });
        std::vector<std::size_t> rank(n_test);
        for (std::size_t pos = 0; pos < n_test; ++pos) rank[order[pos]] = pos;

        for (std::size_t ni = 0; ni < n_cells; ++ni) {
            const std::size_t n = static_cast<std::size_t>(config.top_n_list[ni]);
            ConfusionCounts& cc = out.per_n[ni];
            for (std::size_t t = 0; t < n_test; ++t) {
                const bool relevant = test[begin + t].value >= config.relevance_threshold;
                const bool recommended = rank[t] < n;
                if (relevant)
                    recommended ? ++cc.d : ++cc.c;
                else
                    recommended ? ++cc.b : ++cc.a;
            }
        }
    });

    FoldScore score;
    score.per_n.resize(n_cells);
    double abs_error_sum = 0.0;
    for (const UserOutcome& out : outcomes) {
        abs_error_sum += out.abs_error_sum;
        score.diag.predictions += out.predictions;
        score.diag.user_mean_fallbacks += out.user_mean_fallbacks;
        score.diag.global_mean_fallbacks += out.global_mean_fallbacks;
        score.diag.pool_fallbacks += out.pool_fallbacks;
        for (std::size_t ni = 0; ni < n_cells; ++ni) score.per_n[ni] += out.per_n[ni];
    }
    score.diag.test_users = static_cast<long long>(user_ranges.size());
    score.diag.skipped_users = model.train.n_users() - score.diag.test_users;
    score.mae = score.diag.predictions > 0 ? abs_error_sum / score.diag.predictions : 0.0;
    return score;
}

FoldScore score_fold(const RatingsMatrix& train, std::span<const Rating> test,
                     const ExperimentConfig& config, MeasureId measure) {
    FoldModel fm = build_fold_model(train, config, config.seed);
    return score_fold(fm, test, config, measure);
}

EvaluationReport run_experiment(const RatingsMatrix& matrix, const ExperimentConfig& config) {
    config.validate(matrix.scale());

    EvaluationReport report;
    report.config = config;
    report.measures.reserve(config.measures.size());
    for (MeasureId id : config.measures) report.measures.push_back({id, {}});

    FoldSplit split = split_folds(matrix, config.fold_count, config.seed);
    for (int f = 0; f < split.fold_count; ++f) {
        FoldModel fold_model =
            build_fold_model(std::move(split.folds[f].train), config, mix_seed(config.seed, f));
        report.fcm_iterations_per_fold.push_back(fold_model.fcm_iterations);
        for (std::size_t mi = 0; mi < config.measures.size(); ++mi)
            report.measures[mi].folds.push_back(
                score_fold(fold_model, split.folds[f].test, config, config.measures[mi]));
    }

    auto find_measure = [&](MeasureId id) -> std::optional<std::size_t> {
        for (std::size_t mi = 0; mi < report.measures.size(); ++mi)
            if (report.measures[mi].id == id) return mi;
        return std::nullopt;
    };
    auto nhsm = find_measure(MeasureId::Nhsm);
    auto pearson = find_measure(MeasureId::Pearson);
    if (nhsm && pearson) {
        DirectionalNote note;
        note.nhsm_mae = report.mean_mae(*nhsm);
        note.pearson_mae = report.mean_mae(*pearson);
        note.nhsm_not_worse = note.nhsm_mae <= note.pearson_mae;
        report.directional = note;
    }
    return report;
}

namespace {

// Mean of the present constituents; absent when none are present.
std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
    double sum = 0.0;
    int n = 0;
    for (const auto& v : values)
        if (v) {
            sum += *v;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / n;
}

}  // namespace

double EvaluationReport::mean_mae(std::size_t measure_index) const {
    const auto& folds = measures[measure_index].folds;
    double sum = 0.0;
    for (const FoldScore& f : folds) sum += f.mae;
    return folds.empty() ? 0.0 : sum / folds.size();
}

MeanCell EvaluationReport::mean_cell(std::size_t measure_index, std::size_t n_index) const {
    const auto& folds = measures[measure_index].folds;
    std::vector<std::optional<double>> acc, prec, rec;
    for (const FoldScore& f : folds) {
        ConfusionMetrics m = confusion_metrics(f.per_n[n_index]);
        acc.push_back(m.accuracy);
        prec.push_back(m.precision);
        rec.push_back(m.recall);
    }
    MeanCell cell;
    cell.accuracy = mean_of(acc);
    cell.precision = mean_of(prec);
    cell.recall = mean_of(rec);
    cell.mae = mean_mae(measure_index);
    return cell;
}

MeanCell EvaluationReport::top_n_averaged(std::size_t measure_index) const {
    std::vector<std::optional<double>> acc, prec, rec;
    for (std::size_t ni = 0; ni < config.top_n_list.size(); ++ni) {
        MeanCell cell = mean_cell(measure_index, ni);
        acc.push_back(cell.accuracy);
        prec.push_back(cell.precision);
        rec.push_back(cell.recall);
    }
    MeanCell out;
    out.accuracy = mean_of(acc);
    out.precision = mean_of(prec);
    out.recall = mean_of(rec);
    out.mae = mean_mae(measure_index);
    return out;
}

namespace {

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string fmt4(const std::optional<double>& v) {
    return v ? fmt4(*v) : std::string{};
}

const char* aggregation_name(PssAggregation a) {
    return a == PssAggregation::Sum ? "sum" : "mean";
}

const char* singularity_name(SingularityForm f) {
    return f == SingularityForm::Centered ? "centered" : "signed";
}

}  // namespace

void write_report_csv(const EvaluationReport& report, std::ostream& out) {
    out << "method,metric";
    for (int n : report.config.top_n_list) out << ",N=" << n;
    out << "\n";
    for (std::size_t mi = 0; mi < report.measures.size(); ++mi) {
        const char* name = to_string(report.measures[mi].id);
        const char* metric_names[4] = {"accuracy", "precision", "recall", "mae"};
        for (int row = 0; row < 4; ++row) {
            out << name << ',' << metric_names[row];
            for (std::size_t ni = 0; ni < report.config.top_n_list.size(); ++ni) {
                MeanCell cell = report.mean_cell(mi, ni);
                switch (row) {
                    case 0: out << ',' << fmt4(cell.accuracy); break;
                    case 1: out << ',' << fmt4(cell.precision); break;
                    case 2: out << ',' << fmt4(cell.recall); break;
                    case 3: out << ',' << fmt4(cell.mae); break;
                }
            }
            out << "\n";
        }
    }
    out << "\nmethod,metric,mean_over_n\n";
    for (std::size_t mi = 0; mi < report.measures.size(); ++mi) {
        const char* name = to_string(report.measures[mi].id);
        MeanCell cell = report.top_n_averaged(mi);
        out << name << ",accuracy," << fmt4(cell.accuracy) << "\n";
        out << name << ",precision," << fmt4(cell.precision) << "\n";
        out << name << ",recall," << fmt4(cell.recall) << "\n";
        out << name << ",mae," << fmt4(cell.mae) << "\n";
    }
}

void write_report_json(const EvaluationReport& report, std::ostream& out) {
    using nlohmann::json;
    const ExperimentConfig& cfg = report.config;

    json top_n_list = json::array();
    for (int n : cfg.top_n_list) top_n_list.push_back(n);

    json measures_cfg = json::array();
    for (MeasureId id : cfg.measures) measures_cfg.push_back(to_string(id));

    json doc;
    doc["config"] = {
        {"cluster_count", cfg.cluster_count},
        {"fuzzifier", cfg.fuzzifier},
        {"neighbor_count", cfg.neighbor_count},
        {"top_n_list", top_n_list},
        {"relevance_threshold", cfg.relevance_threshold},
        {"fcm_tolerance", cfg.fcm_tolerance},
        {"fcm_max_iterations", cfg.fcm_max_iterations},
        {"seed", cfg.seed},
        {"fold_count", cfg.fold_count},
        {"measures", measures_cfg},
        {"defuzzifier", to_string(cfg.defuzzifier)},
        {"gamma", cfg.similarity.gamma},
        {"threads", cfg.threads},
    };
    doc["protocol"] = {
        {"relevance_rule", "actual rating >= relevance_threshold"},
        {"top_n_candidate_pool", "the user's own test-fold items"},
        {"users_without_test_items", "skipped for confusion counts, counted in diagnostics"},
        {"prediction", "user mean plus similarity-weighted neighbor deviations, clamped to scale"},
        {"fallback_ladder", json::array({"in-cluster neighbors", "user train mean", "global train mean"})},
        {"aggregates", "user/item means and deviations computed on the train fold only"},
        {"pss_aggregation", aggregation_name(cfg.similarity.pss_aggregation)},
        {"singularity_form", singularity_name(cfg.similarity.singularity_form)},
        {"user_std_dev", "population form (divide by rated-item count)"},
        {"fold_split", "seeded shuffle of rating entries into near-equal folds"},
    };
    doc["fcm_iterations_per_fold"] = report.fcm_iterations_per_fold;

    json measures = json::array();
    for (std::size_t mi = 0; mi < report.measures.size(); ++mi) {
        const MeasureReport& mr = report.measures[mi];
        json folds = json::array();
        for (std::size_t f = 0; f < mr.folds.size(); ++f) {
            const FoldScore& fs = mr.folds[f];
            json per_n = json::array();
            for (std::size_t ni = 0; ni < cfg.top_n_list.size(); ++ni) {
                const ConfusionCounts& cc = fs.per_n[ni];
                ConfusionMetrics m = confusion_metrics(cc);
                json cell = {
                    {"n", cfg.top_n_list[ni]},
                    {"counts", {{"a", cc.a}, {"b", cc.b}, {"c", cc.c}, {"d", cc.d}}},
                };
                cell["accuracy"] = m.accuracy ? json(*m.accuracy) : json(nullptr);
                cell["precision"] = m.precision ? json(*m.precision) : json(nullptr);
                cell["recall"] = m.recall ? json(*m.recall) : json(nullptr);
                per_n.push_back(cell);
            }
            folds.push_back({
                {"fold", f},
                {"mae", fs.mae},
                {"per_n", per_n},
                {"diagnostics",
                 {{"test_users", fs.diag.test_users},
                  {"skipped_users", fs.diag.skipped_users},
                  {"predictions", fs.diag.predictions},
                  {"user_mean_fallbacks", fs.diag.user_mean_fallbacks},
                  {"global_mean_fallbacks", fs.diag.global_mean_fallbacks},
                  {"pool_fallbacks", fs.diag.pool_fallbacks}}},
            });
        }

        json per_n_means = json::array();
        for (std::size_t ni = 0; ni < cfg.top_n_list.size(); ++ni) {
            MeanCell cell = report.mean_cell(mi, ni);
            json jc = {{"n", cfg.top_n_list[ni]}, {"mae", cell.mae}};
            jc["accuracy"] = cell.accuracy ? json(*cell.accuracy) : json(nullptr);
            jc["precision"] = cell.precision ? json(*cell.precision) : json(nullptr);
            jc["recall"] = cell.recall ? json(*cell.recall) : json(nullptr);
            per_n_means.push_back(jc);
        }
        MeanCell avg = report.top_n_averaged(mi);
        json javg = {{"mae", avg.mae}};
        javg["accuracy"] = avg.accuracy ? json(*avg.accuracy) : json(nullptr);
        javg["precision"] = avg.precision ? json(*avg.precision) : json(nullptr);
        javg["recall"] = avg.recall ? json(*avg.recall) : json(nullptr);

        measures.push_back({
            {"measure", to_string(mr.id)},
            {"folds", folds},
            {"per_n_means", per_n_means},
            {"top_n_averaged", javg},
        });
    }
    doc["measures"] = measures;

    if (report.directional) {
        doc["directional_check"] = {
            {"nhsm_mean_mae", report.directional->nhsm_mae},
            {"pearson_mean_mae", report.directional->pearson_mae},
            {"nhsm_not_worse", report.directional->nhsm_not_worse},
        };
    } else {
        doc["directional_check"] = nullptr;
    }

    out << doc.dump(2) << "\n";
}

}  // namespace fcrec
