#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fcrec/fcm.hpp"
#include "fcrec/similarity.hpp"

namespace fcrec {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every experiment tunable. Defaults: 3 clusters, 50 neighbors,
// N in {5,10,15,20,30}, 5 folds, NHSM.
struct ExperimentConfig {
    int cluster_count = 3;
    double fuzzifier = 2.0;
    int neighbor_count = 50;
    std::vector<int> top_n_list = {5, 10, 15, 20, 30};
    int relevance_threshold = 4;  // actual rating >= threshold counts as relevant
    double fcm_tolerance = 1e-4;
    int fcm_max_iterations = 300;
    std::uint64_t seed = 1;
    int fold_count = 5;
    std::vector<MeasureId> measures = {MeasureId::Nhsm};
    Defuzzifier defuzzifier = Defuzzifier::Cog;
    SimilarityOptions similarity;
    int threads = 0;  // 0 = hardware concurrency

    // Throws ConfigError on violated invariants (empty / non-ascending
    // top_n_list, threshold outside the scale, ...).
    void validate(const RatingScale& scale) const;
};

// Applies one "key = value" setting; throws ConfigError on unknown keys or
// unparseable values.
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

// Flat text format: one "key = value" per line, '#' starts a comment.
ExperimentConfig load_config_file(const std::string& path,
                                  ExperimentConfig base = ExperimentConfig{});

// Command-line values recorded only when the flag was actually given;
// set flags win over config-file values, which win over defaults.
struct FlagOverrides {
    std::optional<std::vector<std::string>> measures;
    std::optional<int> cluster_count;
    std::optional<int> neighbor_count;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<int>> top_n_list;
    std::optional<std::string> defuzzifier;
    std::optional<int> threads;
    std::optional<std::string> pss_aggregation;
    std::optional<std::string> singularity_form;
};

ExperimentConfig resolve_config(const std::optional<std::string>& config_path,
                                const FlagOverrides& flags);

std::vector<int> parse_int_list(const std::string& text);  // "5,10,15"

}  // namespace fcrec
