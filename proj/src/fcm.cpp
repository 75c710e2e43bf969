#include "fcrec/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fcrec/parallel.hpp"

namespace fcrec {

namespace {

// Uniform double in [0, 1) from the top 53 bits, independent of the standard
// library's distribution implementation.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// d(u,k)^2 expanded around the user's rated items:
//   sum_{j in I_u} ((r_uj - v_kj)^2 - v_kj^2) + ||v_k||^2
double squared_distance(std::span<const ItemRating> row, const std::vector<double>& centroid,
                        double centroid_sq_norm) {
    double acc = centroid_sq_norm;
    for (const ItemRating& r : row) {
        double v = centroid[r.item];
        double d = r.value - v;
        acc += d * d - v * v;
    }
    return acc < 0.0 ? 0.0 : acc;
}

constexpr double kZeroDistance = 1e-24;  // on d^2; rating-scale distances are O(1)

}  // namespace

MembershipMatrix fcm_fit(const RatingsMatrix& train, const FcmParams& params) {
    const int n_users = train.n_users();
    const int n_items = train.n_items();
    const int c = params.cluster_count;
    if (c < 1)
        throw std::invalid_argument("cluster count must be at least 1");
    if (c > n_users)
        throw std::invalid_argument("cluster count " + std::to_string(c) +
                                    " exceeds user count " + std::to_string(n_users));
    if (params.fuzzifier <= 1.0)
        throw std::invalid_argument("fuzzifier must be greater than 1");
    if (params.tolerance <= 0.0)
        throw std::invalid_argument("tolerance must be positive");

    MembershipMatrix mm(n_users, c);
    mm.centroids.assign(c, std::vector<double>(n_items, 0.0));

    // Seeded random row-stochastic initialization, drawn serially so the
    // result does not depend on the thread count.
    std::mt19937_64 rng(params.seed);
    for (int u = 0; u < n_users; ++u) {
        auto row = mm.row(u);
        double sum = 0.0;
        for (int k = 0; k < c; ++k) {
            row[k] = uniform01(rng) + 1e-9;
            sum += row[k];
        }
        for (int k = 0; k < c; ++k) row[k] /= sum;
    }

    const double exponent = 2.0 / (params.fuzzifier - 1.0);
    std::vector<double> weight_sum(c);
    std::vector<double> centroid_sq(c);
    std::vector<double> shift_per_user(n_users);
    std::vector<double> objective_per_user(n_users);
    std::vector<std::vector<double>> dist_sq(n_users, std::vector<double>(c));

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        // Centroid step: v_k = sum_u mu_uk^m x_u / sum_u mu_uk^m.
        // Serial accumulation in user order keeps the reduction deterministic.
        for (int k = 0; k < c; ++k) weight_sum[k] = 0.0;
        std::vector<std::vector<double>> accum(c, std::vector<double>(n_items, 0.0));
        for (int u = 0; u < n_users; ++u) {
            auto row = mm.row(u);
            auto ratings = train.ratings_of(u);
            for (int k = 0; k < c; ++k) {
                double w = std::pow(row[k], params.fuzzifier);
                weight_sum[k] += w;
                if (w == 0.0) continue;
                auto& acc = accum[k];
                for (const ItemRating& r : ratings) acc[r.item] += w * r.value;
            }
        }
        for (int k = 0; k < c; ++k) {
            if (weight_sum[k] > 0.0) {
                auto& cent = mm.centroids[k];
                const auto& acc = accum[k];
                for (int j = 0; j < n_items; ++j) cent[j] = acc[j] / weight_sum[k];
            }
            // weight_sum == 0: keep the previous centroid
            double sq = 0.0;
            for (double v : mm.centroids[k]) sq += v * v;
            centroid_sq[k] = sq;
        }

        // Membership step, independent per user.
        parallel_for(static_cast<std::size_t>(n_users), params.threads, [&](std::size_t ui) {
            int u = static_cast<int>(ui);
            auto ratings = train.ratings_of(u);
            auto& d2 = dist_sq[u];
            int zero_k = -1;
            for (int k = 0; k < c; ++k) {
                d2[k] = squared_distance(ratings, mm.centroids[k], centroid_sq[k]);
                if (d2[k] <= kZeroDistance && (zero_k < 0 || d2[k] < d2[zero_k])) zero_k = k;
            }
            auto row = mm.row(u);
            double shift = 0.0;
            double obj = 0.0;
            if (zero_k >= 0) {
                for (int k = 0; k < c; ++k) {
                    double nu = (k == zero_k) ? 1.0 : 0.0;
                    shift = std::max(shift, std::abs(nu - row[k]));
                    row[k] = nu;
                }
                // distance is zero at the assigned cluster, so no objective mass
            } else {
                // mu_uk = d_uk^{-2/(m-1)} / sum_j d_uj^{-2/(m-1)}
                double total = 0.0;
                for (int k = 0; k < c; ++k) total += std::pow(d2[k], -exponent / 2.0);
                for (int k = 0; k < c; ++k) {
                    double nu = std::pow(d2[k], -exponent / 2.0) / total;
                    shift = std::max(shift, std::abs(nu - row[k]));
                    row[k] = nu;
                    obj += std::pow(nu, params.fuzzifier) * d2[k];
                }
            }
            shift_per_user[u] = shift;
            objective_per_user[u] = obj;
        });

        double shift = 0.0;
        double objective = 0.0;
        for (int u = 0; u < n_users; ++u) {
            shift = std::max(shift, shift_per_user[u]);
            objective += objective_per_user[u];
        }
        mm.objective_trace.push_back(objective);
        mm.iterations = iter + 1;
        if (shift < params.tolerance) {
            mm.converged = true;
            break;
        }
    }
    return mm;
}

const char* to_string(Defuzzifier d) {
    return d == Defuzzifier::Cog ? "cog" : "max";
}

bool defuzzifier_from_string(const std::string& name, Defuzzifier& out) {
    if (name == "cog") { out = Defuzzifier::Cog; return true; }
    if (name == "max") { out = Defuzzifier::Max; return true; }
    return false;
}

int defuzzify_cog(std::span<const double> row) {
    const int c = static_cast<int>(row.size());
    double g = 0.0;
    for (int k = 0; k < c; ++k) g += k * row[k];
    int lo = static_cast<int>(std::floor(g));
    if (lo >= c - 1) return c - 1;
    if (lo < 0) return 0;
    return (g - lo > 0.5) ? lo + 1 : lo;
}

int defuzzify_max(std::span<const double> row) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(row.size()); ++k)
        if (row[k] > row[best]) best = k;
    return best;
}

ClusterAssignment assign_clusters(const MembershipMatrix& membership, Defuzzifier strategy) {
    ClusterAssignment a;
    a.cluster_of.resize(membership.n_users());
    a.members.resize(membership.n_clusters());
    for (int u = 0; u < membership.n_users(); ++u) {
        int k = strategy == Defuzzifier::Cog ? defuzzify_cog(membership.row(u))
                                             : defuzzify_max(membership.row(u));
        a.cluster_of[u] = k;
        a.members[k].push_back(u);
    }
    return a;
}

}  // namespace fcrec
