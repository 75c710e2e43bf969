#include "fcrec/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace fcrec {

TrainModel TrainModel::build(RatingsMatrix train_matrix) {
    TrainModel m;
    m.train = std::move(train_matrix);
    m.users = profile_users(m.train);
    m.items = profile_items(m.train);
    if (m.train.n_entries() > 0) {
        double sum = 0.0;
        for (const Rating& r : m.train.entries()) sum += r.value;
        m.global_mean = sum / m.train.n_entries();
    } else {
        m.global_mean = m.train.scale().median();
    }
    return m;
}

namespace {

// Walks two item-sorted rating lists and calls fn(item, r_u, r_v) on each
// co-rated item.
template <typename Fn>
void for_each_corated(const TrainModel& m, int u, int v, Fn&& fn) {
    auto a = m.train.ratings_of(u);
    auto b = m.train.ratings_of(v);
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].item < b[j].item) {
            ++i;
        } else if (b[j].item < a[i].item) {
            ++j;
        } else {
            fn(a[i].item, a[i].value, b[j].value);
            ++i;
            ++j;
        }
    }
}

int overlap_count(const TrainModel& m, int u, int v) {
    int n = 0;
    for_each_corated(m, u, v, [&](int, int, int) { ++n; });
    return n;
}

}  // namespace

double proximity(double r_up, double r_vp) {
    return 1.0 - 1.0 / (1.0 + std::exp(-std::abs(r_up - r_vp)));
}

double significance(double r_up, double r_vp, double r_med) {
    return 1.0 / (1.0 + std::exp(-std::abs(r_up - r_med) * std::abs(r_vp - r_med)));
}

double singularity(double r_up, double r_vp, double mu_p, SingularityForm form) {
    double arg = form == SingularityForm::Centered
                     ? std::abs((r_up + r_vp) / 2.0 - mu_p)
                     : (r_up + r_vp - mu_p) / 2.0;
    return 1.0 - 1.0 / (1.0 + std::exp(-arg));
}

double pss_sim(const TrainModel& m, int u, int v, const SimilarityOptions& opts) {
    const double r_med = m.train.scale().median();
    double sum = 0.0;
    int n = 0;
    for_each_corated(m, u, v, [&](int item, int r_u, int r_v) {
        sum += proximity(r_u, r_v) *
               significance(r_u, r_v, r_med) *
               singularity(r_u, r_v, m.items[item].mean, opts.singularity_form);
        ++n;
    });
    if (n == 0) return 0.0;
    return opts.pss_aggregation == PssAggregation::Mean ? sum / n : sum;
}

double jaccard_mod(const TrainModel& m, int u, int v) {
    const double nu = static_cast<double>(m.users[u].n_rated);
    const double nv = static_cast<double>(m.users[v].n_rated);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return overlap_count(m, u, v) / (nu * nv);
}

double jpss_sim(const TrainModel& m, int u, int v, const SimilarityOptions& opts) {
    return pss_sim(m, u, v, opts) * jaccard_mod(m, u, v);
}

double urp_sim(const UserProfile& a, const UserProfile& b) {
    double arg = std::abs(a.mean - b.mean) * std::abs(a.stddev - b.stddev);
    return 1.0 - 1.0 / (1.0 + std::exp(-arg));
}

double urp_sim(const TrainModel& m, int u, int v) {
    return urp_sim(m.users[u], m.users[v]);
}

double nhsm_sim(const TrainModel& m, int u, int v, const SimilarityOptions& opts) {
    return jpss_sim(m, u, v, opts) * urp_sim(m, u, v);
}

double pearson_sim(const TrainModel& m, int u, int v) {
    double sum_a = 0.0, sum_b = 0.0;
    int n = 0;
    for_each_corated(m, u, v, [&](int, int r_u, int r_v) {
        sum_a += r_u;
        sum_b += r_v;
        ++n;
    });
    if (n < 2) return 0.0;
    const double mean_a = sum_a / n;
    const double mean_b = sum_b / n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for_each_corated(m, u, v, [&](int, int r_u, int r_v) {
        double da = r_u - mean_a;
        double db = r_v - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    });
    if (var_a == 0.0 || var_b == 0.0) return 0.0;
    return cov / std::sqrt(var_a * var_b);
}

double cosine_sim(const TrainModel& m, int u, int v) {
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for_each_corated(m, u, v, [&](int, int r_u, int r_v) {
        dot += static_cast<double>(r_u) * r_v;
        norm_a += static_cast<double>(r_u) * r_u;
        norm_b += static_cast<double>(r_v) * r_v;
    });
    if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

double herlocker_weighted(const TrainModel& m, int u, int v, int gamma) {
    int n = overlap_count(m, u, v);
    if (n == 0) return 0.0;
    return pearson_sim(m, u, v) * (static_cast<double>(std::min(n, gamma)) / gamma);
}

double mclaughlin_weighted(const TrainModel& m, int u, int v, int gamma) {
    int n = overlap_count(m, u, v);
    if (n == 0) return 0.0;
    return pearson_sim(m, u, v) * (static_cast<double>(n) / std::max(n, gamma));
}

double ra_sim(const TrainModel& m, int u, int v) {
    double sum = 0.0;
    for_each_corated(m, u, v, [&](int item, int, int) {
        sum += 1.0 / m.items[item].n_raters;
    });
    return sum;
}

const char* to_string(MeasureId id) {
    switch (id) {
        case MeasureId::Nhsm: return "nhsm";
        case MeasureId::Pearson: return "pearson";
        case MeasureId::Cosine: return "cosine";
        case MeasureId::HerlockerWeighted: return "herlocker_weighted";
        case MeasureId::MclaughlinWeighted: return "mclaughlin_weighted";
        case MeasureId::Ra: return "ra";
    }
    return "?";
}

const std::vector<MeasureId>& all_measures() {
    static const std::vector<MeasureId> ids = {
        MeasureId::Nhsm,       MeasureId::Pearson,
        MeasureId::Cosine,     MeasureId::HerlockerWeighted,
        MeasureId::MclaughlinWeighted, MeasureId::Ra,
    };
    return ids;
}

std::optional<MeasureId> measure_from_string(const std::string& name) {
    for (MeasureId id : all_measures())
        if (name == to_string(id)) return id;
    return std::nullopt;
}

std::string measure_names_joined() {
    std::string out;
    for (MeasureId id : all_measures()) {
        if (!out.empty()) out += ", ";
        out += to_string(id);
    }
    return out;
}

double similarity(MeasureId id, const TrainModel& m, int u, int v,
                  const SimilarityOptions& opts) {
    switch (id) {
        case MeasureId::Nhsm: return nhsm_sim(m, u, v, opts);
        case MeasureId::Pearson: return pearson_sim(m, u, v);
        case MeasureId::Cosine: return cosine_sim(m, u, v);
        case MeasureId::HerlockerWeighted: return herlocker_weighted(m, u, v, opts.gamma);
        case MeasureId::MclaughlinWeighted: return mclaughlin_weighted(m, u, v, opts.gamma);
        case MeasureId::Ra: return ra_sim(m, u, v);
    }
    return 0.0;
}

}  // namespace fcrec
