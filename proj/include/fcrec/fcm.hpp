#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fcrec/ratings.hpp"

namespace fcrec {

struct FcmParams {
    int cluster_count = 3;
    double fuzzifier = 2.0;       // > 1
    double tolerance = 1e-4;      // stop when max membership change drops below
    int max_iterations = 300;
    std::uint64_t seed = 0;
    int threads = 1;              // 0 = hardware concurrency; result is identical either way
};

// Fuzzy membership degrees per user plus the fitted centroids. Rows sum to 1.
class MembershipMatrix {
public:
    MembershipMatrix(int n_users, int n_clusters)
        : n_users_(n_users), n_clusters_(n_clusters),
          degrees_(static_cast<std::size_t>(n_users) * n_clusters, 0.0) {}

    int n_users() const { return n_users_; }
    int n_clusters() const { return n_clusters_; }

    std::span<double> row(int user) {
        return {degrees_.data() + static_cast<std::size_t>(user) * n_clusters_,
                static_cast<std::size_t>(n_clusters_)};
    }
    std::span<const double> row(int user) const {
        return {degrees_.data() + static_cast<std::size_t>(user) * n_clusters_,
                static_cast<std::size_t>(n_clusters_)};
    }
    const std::vector<double>& degrees() const { return degrees_; }

    std::vector<std::vector<double>> centroids;   // cluster_count x n_items
    std::vector<double> objective_trace;          // one value per iteration, non-increasing
    int iterations = 0;
    bool converged = false;

private:
    int n_users_;
    int n_clusters_;
    std::vector<double> degrees_;
};

// Standard FCM alternating optimization over user rating vectors
// (unrated entries treated as 0, Euclidean distance).
MembershipMatrix fcm_fit(const RatingsMatrix& train, const FcmParams& params);

enum class Defuzzifier { Cog, Max };

const char* to_string(Defuzzifier d);
bool defuzzifier_from_string(const std::string& name, Defuzzifier& out);

// Center-of-gravity over cluster indices: returns the index nearest to
// sum_k k * mu_k; exact half-way ties go to the lower index.
int defuzzify_cog(std::span<const double> row);

// Argmax of the row; ties go to the lower index.
int defuzzify_max(std::span<const double> row);

struct ClusterAssignment {
    std::vector<int> cluster_of;           // per user
    std::vector<std::vector<int>> members; // per cluster, ascending user index

    int n_clusters() const { return static_cast<int>(members.size()); }
};

ClusterAssignment assign_clusters(const MembershipMatrix& membership, Defuzzifier strategy);

}  // namespace fcrec
