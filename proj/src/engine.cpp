#include "fcrec/engine.hpp"

#include <algorithm>
#include <cmath>

namespace fcrec {

namespace {

void rank_and_truncate(std::vector<Neighbor>& scored, int neighbor_count) {
    auto by_sim_then_index = [](const Neighbor& a, const Neighbor& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return a.user < b.user;
    };
    std::size_t keep = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(neighbor_count));
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(), by_sim_then_index);
    scored.resize(keep);
}

}  // namespace

NeighborList select_neighbors(int u, const ClusterAssignment& assignment, MeasureId measure,
                              int neighbor_count, const TrainModel& model,
                              const SimilarityOptions& opts, bool allow_pool_fallback) {
    NeighborList out;
    out.user = u;
    if (neighbor_count <= 0) return out;

    std::vector<Neighbor> scored;
    const auto& members = assignment.members[assignment.cluster_of[u]];
    scored.reserve(members.size());
    for (int v : members) {
        if (v == u) continue;
        scored.push_back({v, similarity(measure, model, u, v, opts)});
    }

    if (scored.empty() && allow_pool_fallback && model.train.n_users() > 1) {
        out.pool_fallback = true;
        scored.reserve(model.train.n_users() - 1);
        for (int v = 0; v < model.train.n_users(); ++v) {
            if (v == u) continue;
            scored.push_back({v, similarity(measure, model, u, v, opts)});
        }
    }

    rank_and_truncate(scored, neighbor_count);
    out.neighbors = std::move(scored);
    return out;
}

Prediction predict(int u, int item, const NeighborList& neighbors, const TrainModel& model) {
    Prediction p;
    p.user = u;
    p.item = item;

    const RatingScale& scale = model.train.scale();
    if (model.users[u].empty) {
        p.value = model.global_mean;
        p.source = PredictionSource::GlobalMean;
        return p;
    }

    double numer = 0.0;
    double denom = 0.0;
    for (const Neighbor& nb : neighbors.neighbors) {
        auto r = model.train.rating(nb.user, item);
        if (!r) continue;
        ++p.support;
        numer += (*r - model.users[nb.user].mean) * nb.sim;
        denom += std::abs(nb.sim);
    }

    if (p.support == 0 || denom == 0.0) {
        p.value = std::clamp(model.users[u].mean,
                             static_cast<double>(scale.min), static_cast<double>(scale.max));
        p.source = PredictionSource::UserMean;
        return p;
    }

    double raw = model.users[u].mean + numer / denom;
    p.value = std::clamp(raw, static_cast<double>(scale.min), static_cast<double>(scale.max));
    p.source = PredictionSource::Neighbors;
    return p;
}

std::vector<std::pair<int, double>> recommend_top_n(int u, int n, std::span<const int> candidates,
                                                    const NeighborList& neighbors,
                                                    const TrainModel& model) {
    std::vector<std::pair<int, double>> scored;
    if (n <= 0) return scored;
    scored.reserve(candidates.size());
    for (int item : candidates)
        scored.emplace_back(item, predict(u, item, neighbors, model).value);

    auto by_score_then_item = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    std::size_t keep = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(n));
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(), by_score_then_item);
    scored.resize(keep);
    return scored;
}

}  // namespace fcrec
