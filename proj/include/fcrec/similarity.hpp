#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fcrec/ratings.hpp"

namespace fcrec {

// Train-fold aggregates every similarity kernel works from. Immutable, so
// kernels can be evaluated concurrently without restriction.
struct TrainModel {
    RatingsMatrix train;
    std::vector<UserProfile> users;
    std::vector<ItemStats> items;
    double global_mean = 0.0;  // mean of all train ratings, scale midpoint if empty

    static TrainModel build(RatingsMatrix train);
};

enum class PssAggregation { Sum, Mean };

// Centered exponentiates |(r_u + r_v)/2 - mu_p|; Signed keeps the sign and
// halves the whole difference, (r_u + r_v - mu_p)/2.
enum class SingularityForm { Centered, Signed };

struct SimilarityOptions {
    PssAggregation pss_aggregation = PssAggregation::Sum;
    SingularityForm singularity_form = SingularityForm::Centered;
    int gamma = 50;  // overlap cap for the significance-weighted variants
};

// Scalar kernels. Ranges on a 1..5 scale: proximity and singularity in
// (0, 0.5], significance in [0.5, 1).
double proximity(double r_up, double r_vp);
double significance(double r_up, double r_vp, double r_med);
double singularity(double r_up, double r_vp, double mu_p,
                   SingularityForm form = SingularityForm::Centered);

// User-pair measures over the train fold.
double pss_sim(const TrainModel& m, int u, int v, const SimilarityOptions& opts = {});
double jaccard_mod(const TrainModel& m, int u, int v);
double jpss_sim(const TrainModel& m, int u, int v, const SimilarityOptions& opts = {});
double urp_sim(const UserProfile& a, const UserProfile& b);
double urp_sim(const TrainModel& m, int u, int v);
double nhsm_sim(const TrainModel& m, int u, int v, const SimilarityOptions& opts = {});
double pearson_sim(const TrainModel& m, int u, int v);
double cosine_sim(const TrainModel& m, int u, int v);
double herlocker_weighted(const TrainModel& m, int u, int v, int gamma = 50);
double mclaughlin_weighted(const TrainModel& m, int u, int v, int gamma = 50);
double ra_sim(const TrainModel& m, int u, int v);

enum class MeasureId {
    Nhsm,
    Pearson,
    Cosine,
    HerlockerWeighted,
    MclaughlinWeighted,
    Ra,
};

const char* to_string(MeasureId id);
std::optional<MeasureId> measure_from_string(const std::string& name);
const std::vector<MeasureId>& all_measures();
std::string measure_names_joined();  // "nhsm, pearson, ..." for error messages

// Uniform entry point used by neighbor selection and the CLI registry.
double similarity(MeasureId id, const TrainModel& m, int u, int v,
                  const SimilarityOptions& opts = {});

}  // namespace fcrec
