#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fcrec/fcm.hpp"
#include "fcrec/similarity.hpp"

namespace fcrec {

struct Neighbor {
    int user;
    double sim;
};

// The active user's most similar peers, non-increasing similarity, ties by
// ascending user index. Drawn from the user's hard cluster unless the pool
// fallback kicked in.
struct NeighborList {
    int user = -1;
    std::vector<Neighbor> neighbors;
    bool pool_fallback = false;
};

// Top 'neighbor_count' users from u's cluster, excluding u. With
// allow_pool_fallback, an empty in-cluster candidate set widens to all
// users (flagged on the result).
NeighborList select_neighbors(int u, const ClusterAssignment& assignment, MeasureId measure,
                              int neighbor_count, const TrainModel& model,
                              const SimilarityOptions& opts = {},
                              bool allow_pool_fallback = false);

enum class PredictionSource {
    Neighbors,   // mean-centered weighted deviation over neighbors who rated the item
    UserMean,    // no usable neighbor evidence
    GlobalMean,  // user has no train ratings at all
};

struct Prediction {
    int user = -1;
    int item = -1;
    double value = 0.0;  // clamped to the rating scale
    int support = 0;     // neighbors who rated the item
    PredictionSource source = PredictionSource::Neighbors;

    bool fallback_used() const { return source != PredictionSource::Neighbors; }
};

Prediction predict(int u, int item, const NeighborList& neighbors, const TrainModel& model);

// Candidates scored by predict(), ordered by predicted value descending,
// ties by ascending item index, truncated to n.
std::vector<std::pair<int, double>> recommend_top_n(int u, int n, std::span<const int> candidates,
                                                    const NeighborList& neighbors,
                                                    const TrainModel& model);

}  // namespace fcrec
